#pragma once

// Realizations of the construction steps F_n as bit lattices, generated by a
// depth-first walk over the Galton-Watson subdivision tree. Dead subtrees are
// never visited, so the expected work is proportional to the expected number
// of surviving nodes.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"
#include "fracperc/grid.hpp"
#include "fracperc/rng.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace fracperc {

using analytic::Target;

struct SampleOptions {
  /// Upper bound on the bytes of one bit lattice.
  std::uint64_t memory_budget_bytes = std::uint64_t{2} << 30;
  /// Share node uniforms across p so that F_n(p) ⊆ F_n(p') for p <= p'.
  bool coupled = true;
};

struct GridRealization {
  int M = 2;
  double p = 1.0;
  int n = 0;
  int d = 2;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  Target target = Target::F;
  BitGrid grid;

  [[nodiscard]] std::int64_t side() const { return grid.width(); }
  /// Side length M^{-n} of one cell.
  [[nodiscard]] double cell_size() const { return std::pow(static_cast<double>(M), -n); }
};

/// Number of cells per axis, M^n, after checking the memory guard.
inline std::int64_t lattice_side(int M, int n, int d, const SampleOptions& options = {}) {
  if (M < 2) throw std::invalid_argument("lattice_side: M must be >= 2");
  if (n < 0) throw std::invalid_argument("lattice_side: n must be >= 0");
  if (d != 1 && d != 2) throw std::invalid_argument("lattice_side: d must be 1 or 2");
  const double bits = d * n * std::log2(static_cast<double>(M));
  if (bits > 34.0 + 1e-9) {
    throw ResourceError("lattice of " + std::to_string(M) + "^(" + std::to_string(d) + "*" +
                        std::to_string(n) + ") cells exceeds the 2^34 cell limit");
  }
  std::int64_t side = 1;
  for (int i = 0; i < n; ++i) side *= M;
  const std::uint64_t cells = d == 2 ? static_cast<std::uint64_t>(side) * side
                                     : static_cast<std::uint64_t>(side);
  if ((cells + 7) / 8 > options.memory_budget_bytes) {
    throw ResourceError("lattice of " + std::to_string(cells) +
                        " cells exceeds the memory budget of " +
                        std::to_string(options.memory_budget_bytes) + " bytes");
  }
  return side;
}

namespace detail {

class TreeWalker {
 public:
  TreeWalker(int M, int d, int n, double p, NodeUniforms uniforms, BitGrid& grid)
      : M_(M), d_(d), n_(n), p_(p), uniforms_(uniforms), grid_(grid) {}

  void visit(int level, std::int64_t y, std::int64_t x, std::int64_t level_side) {
    if (level == n_) {
      grid_.set(x, y);
      return;
    }
    const std::int64_t child_side = level_side * M_;
    const int rows = d_ == 2 ? M_ : 1;
    for (int dy = 0; dy < rows; ++dy) {
      const std::int64_t cy = d_ == 2 ? y * M_ + dy : 0;
      for (int dx = 0; dx < M_; ++dx) {
        const std::int64_t cx = x * M_ + dx;
        const auto node = static_cast<std::uint64_t>(cy * child_side + cx);
        if (uniforms_.uniform(level + 1, node) < p_) visit(level + 1, cy, cx, child_side);
      }
    }
  }

 private:
  int M_, d_, n_;
  double p_;
  NodeUniforms uniforms_;
  BitGrid& grid_;
};

}  // namespace detail

/// Samples F_n. Identical (params, n, seed, sample_index, options) give
/// identical grids; the level-(n-1) realization with the same seed is exactly
/// the parent-block structure of the level-n one.
inline GridRealization sample(const ModelParams& params, int n, std::uint64_t seed,
                              std::uint64_t sample_index, const SampleOptions& options = {}) {
  params.validate();
  const std::int64_t side = lattice_side(params.M, n, params.d, options);
  GridRealization out;
  out.M = params.M;
  out.p = params.p;
  out.n = n;
  out.d = params.d;
  out.seed = seed;
  out.sample_index = sample_index;
  out.target = Target::F;
  out.grid = BitGrid(side, params.d == 2 ? side : 1);

  NodeUniforms uniforms(seed, sample_index);
  if (!options.coupled) uniforms = uniforms.with_stream(std::bit_cast<std::uint64_t>(params.p));
  detail::TreeWalker walker(params.M, params.d, n, params.p, uniforms, out.grid);
  walker.visit(0, 0, 0, 1);
  return out;
}

/// Closed complement: the cells not in F_n, again read as closed cells.
inline GridRealization complement(const GridRealization& realization) {
  GridRealization out = realization;
  out.grid = realization.grid.inverted();
  out.target = realization.target == Target::F ? Target::C : Target::F;
  return out;
}

}  // namespace fracperc
