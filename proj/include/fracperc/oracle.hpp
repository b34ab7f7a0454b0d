#pragma once

// Exhaustive enumeration of the subdivision tree for tiny instances. Every
// keep/drop assignment of the tree nodes is visited once (dead subtrees are
// not expanded: their assignments sum to probability one), and the outcome is
// recorded as the final occupancy mask together with the numbers of kept and
// dropped nodes. Expectations are then polynomials sum c_ab p^a (1-p)^b with
// integer coefficients, which can be evaluated exactly.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"
#include "fracperc/geometry.hpp"
#include "fracperc/grid.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fracperc::oracle {

using analytic::Configuration;
using analytic::Target;

/// Feasibility envelope: number of non-root nodes of the full tree.
inline constexpr std::int64_t kMaxTreeNodes = 21;

/// Dense table of integer coefficients c_ab of p^a (1-p)^b.
class ExponentTable {
 public:
  explicit ExponentTable(int max_exponent = 0)
      : max_(max_exponent), coeffs_(static_cast<std::size_t>((max_ + 1) * (max_ + 1)), 0) {}

  void add(int kept, int dropped, std::int64_t count) {
    if (kept > max_ || dropped > max_) throw std::out_of_range("ExponentTable: exponent too large");
    coeffs_[static_cast<std::size_t>(kept * (max_ + 1) + dropped)] += count;
  }

  [[nodiscard]] std::int64_t at(int kept, int dropped) const {
    return coeffs_[static_cast<std::size_t>(kept * (max_ + 1) + dropped)];
  }

  [[nodiscard]] int max_exponent() const { return max_; }

  template <class Real>
  [[nodiscard]] Real evaluate(const Real& p) const {
    std::vector<Real> kept_pow(static_cast<std::size_t>(max_ + 1));
    std::vector<Real> drop_pow(static_cast<std::size_t>(max_ + 1));
    kept_pow[0] = Real(1);
    drop_pow[0] = Real(1);
    const Real q = Real(1) - p;
    for (int e = 1; e <= max_; ++e) {
      kept_pow[e] = kept_pow[e - 1] * p;
      drop_pow[e] = drop_pow[e - 1] * q;
    }
    CompensatedSum<Real> sum;
    for (int a = 0; a <= max_; ++a) {
      for (int b = 0; b <= max_; ++b) {
        const std::int64_t c = at(a, b);
        if (c != 0) sum += Real(c) * kept_pow[a] * drop_pow[b];
      }
    }
    return sum.value();
  }

 private:
  int max_;
  std::vector<std::int64_t> coeffs_;
};

/// Sparse (kept, dropped) -> number of assignments, for one final mask.
using MaskWeights = std::map<std::pair<int, int>, std::int64_t>;

/// All outcomes of the level-n tree grouped by final occupancy mask. Bit
/// y * side + x of a mask is the cell (x, y).
struct OutcomeDistribution {
  int M = 2;
  int n = 0;
  int d = 2;
  std::int64_t side = 1;
  std::int64_t tree_nodes = 0;
  std::unordered_map<std::uint64_t, MaskWeights> masks;

  [[nodiscard]] BitGrid grid(std::uint64_t mask) const {
    BitGrid out(side, d == 2 ? side : 1);
    for (std::int64_t i = 0; i < out.cell_count(); ++i) {
      if ((mask >> i) & 1u) out.set(i % side, i / side);
    }
    return out;
  }
};

/// Non-root nodes of the full M^d-ary tree of depth n.
inline std::int64_t tree_node_count(int M, int n, int d) {
  std::int64_t total = 0, level = 1;
  const std::int64_t branching = d == 2 ? std::int64_t{M} * M : M;
  for (int i = 0; i < n; ++i) {
    level *= branching;
    total += level;
    if (total > (std::int64_t{1} << 40)) break;
  }
  return total;
}

namespace detail {

class Enumerator {
 public:
  explicit Enumerator(OutcomeDistribution& out) : out_(out) {}

  void expand(int level, const std::vector<std::pair<std::int64_t, std::int64_t>>& alive,
              int kept, int dropped) {
    if (level == out_.n) {
      std::uint64_t mask = 0;
      for (auto [x, y] : alive) mask |= std::uint64_t{1} << (y * out_.side + x);
      out_.masks[mask][{kept, dropped}] += 1;
      return;
    }
    const int M = out_.M;
    const int children = out_.d == 2 ? M * M : M;
    const int bits = static_cast<int>(alive.size()) * children;
    std::vector<std::pair<std::int64_t, std::int64_t>> next;
    for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << bits); ++subset) {
      next.clear();
      for (int i = 0; i < bits; ++i) {
        if (!((subset >> i) & 1u)) continue;
        const auto [x, y] = alive[static_cast<std::size_t>(i / children)];
        const int child = i % children;
        next.emplace_back(x * M + child % M, out_.d == 2 ? y * M + child / M : 0);
      }
      const int k = std::popcount(subset);
      expand(level + 1, next, kept + k, dropped + bits - k);
    }
  }

 private:
  OutcomeDistribution& out_;
};

}  // namespace detail

/// Enumerates every keep/drop assignment of the level-n tree.
inline OutcomeDistribution enumerate_outcomes(int M, int n, int d) {
  if (M < 2) throw std::invalid_argument("oracle: M must be >= 2");
  if (n < 0) throw std::invalid_argument("oracle: n must be >= 0");
  if (d != 1 && d != 2) throw std::invalid_argument("oracle: d must be 1 or 2");
  const std::int64_t nodes = tree_node_count(M, n, d);
  if (nodes > kMaxTreeNodes) {
    throw InstanceTooLarge("oracle: tree with M=" + std::to_string(M) + ", n=" +
                           std::to_string(n) + ", d=" + std::to_string(d) + " has " +
                           std::to_string(nodes) + " nodes (limit " +
                           std::to_string(kMaxTreeNodes) + ")");
  }
  OutcomeDistribution out;
  out.M = M;
  out.n = n;
  out.d = d;
  out.tree_nodes = nodes;
  for (int i = 0; i < n; ++i) out.side *= M;
  detail::Enumerator(out).expand(0, {{0, 0}}, 0, 0);
  return out;
}

/// E f over the distribution for an integer-valued functional, divided by
/// `denominator` (the lattice unit of f).
template <class Real, class Functional>
Real expectation(const OutcomeDistribution& dist, const Real& p, Functional&& f,
                 std::int64_t denominator = 1) {
  ExponentTable table(static_cast<int>(dist.tree_nodes));
  for (const auto& [mask, weights] : dist.masks) {
    const std::int64_t value = f(mask);
    if (value == 0) continue;
    for (const auto& [exponents, count] : weights) {
      table.add(exponents.first, exponents.second, value * count);
    }
  }
  return table.evaluate(p) / Real(denominator);
}

/// E f(X1, X2) for two independent copies.
template <class Real, class Functional>
Real expectation_two_copies(const OutcomeDistribution& dist, const Real& p, Functional&& f,
                            std::int64_t denominator = 1) {
  ExponentTable table(static_cast<int>(2 * dist.tree_nodes));
  for (const auto& [mask1, weights1] : dist.masks) {
    for (const auto& [mask2, weights2] : dist.masks) {
      const std::int64_t value = f(mask1, mask2);
      if (value == 0) continue;
      for (const auto& [e1, c1] : weights1) {
        for (const auto& [e2, c2] : weights2) {
          table.add(e1.first + e2.first, e1.second + e2.second, value * c1 * c2);
        }
      }
    }
  }
  return table.evaluate(p) / Real(denominator);
}

// ---------------------------------------------------------------------------
// d = 1

/// Finite union of disjoint closed intervals with endpoints k / denominator.
/// A component with a == b is an isolated point.
class IntervalSet1D {
 public:
  struct Component {
    std::int64_t a = 0;
    std::int64_t b = 0;
    friend bool operator==(const Component&, const Component&) = default;
  };

  explicit IntervalSet1D(std::int64_t denominator = 1, std::vector<Component> components = {})
      : denominator_(denominator), components_(std::move(components)) {
    if (denominator_ <= 0) throw std::invalid_argument("IntervalSet1D: denominator must be > 0");
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (components_[i].a > components_[i].b) {
        throw std::invalid_argument("IntervalSet1D: component with a > b");
      }
      if (i > 0 && components_[i - 1].b >= components_[i].a) {
        throw std::invalid_argument("IntervalSet1D: components must be sorted and disjoint");
      }
    }
  }

  /// Union of the closed cells [i, i+1] with bit i set; touching cells merge.
  static IntervalSet1D from_cells(std::uint64_t mask, std::int64_t cells) {
    std::vector<Component> components;
    std::int64_t i = 0;
    while (i < cells) {
      if (!((mask >> i) & 1u)) {
        ++i;
        continue;
      }
      const std::int64_t start = i;
      while (i < cells && ((mask >> i) & 1u)) ++i;
      components.push_back({start, i});
    }
    return IntervalSet1D(cells, std::move(components));
  }

  [[nodiscard]] IntervalSet1D intersect(const IntervalSet1D& other) const {
    if (other.denominator_ != denominator_) {
      throw std::invalid_argument("IntervalSet1D: mismatched denominators");
    }
    std::vector<Component> out;
    std::size_t i = 0, j = 0;
    while (i < components_.size() && j < other.components_.size()) {
      const auto& x = components_[i];
      const auto& y = other.components_[j];
      const std::int64_t lo = std::max(x.a, y.a);
      const std::int64_t hi = std::min(x.b, y.b);
      if (lo <= hi) out.push_back({lo, hi});
      if (x.b < y.b) {
        ++i;
      } else {
        ++j;
      }
    }
    return IntervalSet1D(denominator_, std::move(out));
  }

  [[nodiscard]] std::int64_t V0() const { return static_cast<std::int64_t>(components_.size()); }
  /// Total length in units of 1 / denominator.
  [[nodiscard]] std::int64_t length_units() const {
    std::int64_t total = 0;
    for (const auto& c : components_) total += c.b - c.a;
    return total;
  }
  [[nodiscard]] Rational V1() const { return Rational(length_units(), denominator_); }
  [[nodiscard]] std::int64_t isolated_points() const {
    return std::count_if(components_.begin(), components_.end(),
                         [](const Component& c) { return c.a == c.b; });
  }
  /// Membership of the point k / denominator.
  [[nodiscard]] bool contains(std::int64_t k) const {
    return std::any_of(components_.begin(), components_.end(),
                       [k](const Component& c) { return c.a <= k && k <= c.b; });
  }
  [[nodiscard]] std::int64_t denominator() const { return denominator_; }
  [[nodiscard]] const std::vector<Component>& components() const { return components_; }

 private:
  std::int64_t denominator_;
  std::vector<Component> components_;
};

enum class Functional1D { V0, V1, isolated_points, contains_zero, contains_one };

inline const char* to_string(Functional1D f) {
  switch (f) {
    case Functional1D::V0: return "V0";
    case Functional1D::V1: return "V1";
    case Functional1D::isolated_points: return "N";
    case Functional1D::contains_zero: return "contains0";
    case Functional1D::contains_one: return "contains1";
  }
  return "?";
}

struct Query1D {
  Functional1D functional = Functional1D::V0;
  /// F: the set K_n itself; C: its closed complement D_n.
  Target target = Target::F;
  /// Intersection of two independent copies.
  bool two_copies = false;
};

namespace detail {

inline IntervalSet1D realize_1d(const OutcomeDistribution& dist, std::uint64_t mask,
                                Target target) {
  const std::uint64_t all = dist.side >= 64 ? ~std::uint64_t{0}
                                            : (std::uint64_t{1} << dist.side) - 1;
  return IntervalSet1D::from_cells(target == Target::F ? mask : (~mask & all), dist.side);
}

inline std::int64_t evaluate_1d(const IntervalSet1D& set, Functional1D f) {
  switch (f) {
    case Functional1D::V0: return set.V0();
    case Functional1D::V1: return set.length_units();
    case Functional1D::isolated_points: return set.isolated_points();
    case Functional1D::contains_zero: return set.contains(0);
    case Functional1D::contains_one: return set.contains(set.denominator());
  }
  return 0;
}

}  // namespace detail

template <class Real>
Real enumerate_1d(const OutcomeDistribution& dist, const Real& p, const Query1D& query) {
  if (dist.d != 1) throw std::invalid_argument("enumerate_1d: distribution is not 1D");
  const std::int64_t unit = query.functional == Functional1D::V1 ? dist.side : 1;
  if (!query.two_copies) {
    return expectation(dist, p, [&](std::uint64_t mask) {
      return detail::evaluate_1d(detail::realize_1d(dist, mask, query.target), query.functional);
    }, unit);
  }
  std::unordered_map<std::uint64_t, IntervalSet1D> sets;
  for (const auto& entry : dist.masks) {
    sets.emplace(entry.first, detail::realize_1d(dist, entry.first, query.target));
  }
  return expectation_two_copies(dist, p, [&](std::uint64_t a, std::uint64_t b) {
    return detail::evaluate_1d(sets.at(a).intersect(sets.at(b)), query.functional);
  }, unit);
}

template <class Real>
Real enumerate_1d(int M, const Real& p, int n, const Query1D& query) {
  return enumerate_1d(enumerate_outcomes(M, n, 1), p, query);
}

// ---------------------------------------------------------------------------
// d = 2

namespace detail {

inline BitGrid realize_2d(const OutcomeDistribution& dist, std::uint64_t mask, Target target) {
  BitGrid grid = dist.grid(mask);
  return target == Target::F ? grid : grid.inverted();
}

}  // namespace detail

/// E V_k(F_n) or E V_k(C_n), computed through the lattice functionals.
template <class Real>
Real enumerate_2d(const OutcomeDistribution& dist, const Real& p, int k, Target target) {
  if (dist.d != 2) throw std::invalid_argument("enumerate_2d: distribution is not 2D");
  if (k < 0 || k > 2) throw std::invalid_argument("enumerate_2d: k must be 0, 1 or 2");
  const std::int64_t unit = k == 0 ? 1 : k == 1 ? dist.side : dist.side * dist.side;
  return expectation(dist, p, [&](std::uint64_t mask) -> std::int64_t {
    const auto values = geometry::minkowski_2d(detail::realize_2d(dist, mask, target), 1.0);
    if (k == 0) return values.V0;
    if (k == 1) return values.half_perimeter_cells();
    return values.faces;
  }, unit);
}

template <class Real>
Real enumerate_2d(int M, const Real& p, int n, int k, Target target) {
  return enumerate_2d(enumerate_outcomes(M, n, 2), p, k, target);
}

/// Per-level intersection term: E V_k of the intersection of the parts of
/// F_n (or C_n) lying in the first-level blocks of `configuration`. Side uses
/// blocks (0,0) and (1,0); corner configurations use the blocks around the
/// point (1/M, 1/M): corner2 the diagonal pair (0,0),(1,1), corner3 the blocks
/// (0,0),(1,0),(0,1), corner4 all four.
template <class Real>
Real intersection_term_2d(const OutcomeDistribution& dist, const Real& p,
                          Configuration configuration, int k, Target target) {
  if (dist.d != 2) throw std::invalid_argument("intersection_term_2d: distribution is not 2D");
  if (dist.n < 1) throw std::invalid_argument("intersection_term_2d: n must be >= 1");
  if (k < 0 || k > 2) throw std::invalid_argument("intersection_term_2d: k must be 0, 1 or 2");
  if (k == 2) return Real(0);
  const std::int64_t b = dist.side / dist.M;  // cells per block side
  const bool want = target == Target::F;
  auto cell = [&](std::uint64_t mask, std::int64_t x, std::int64_t y) {
    return (((mask >> (y * dist.side + x)) & 1u) != 0) == want;
  };

  if (configuration == Configuration::side) {
    // Shared edge x = b (cell units), y in [0, b].
    const std::int64_t unit = k == 1 ? dist.side : 1;
    return expectation(dist, p, [&](std::uint64_t mask) -> std::int64_t {
      std::uint64_t left = 0, right = 0;
      for (std::int64_t y = 0; y < b; ++y) {
        if (cell(mask, b - 1, y)) left |= std::uint64_t{1} << y;
        if (cell(mask, b, y)) right |= std::uint64_t{1} << y;
      }
      const auto meet = IntervalSet1D::from_cells(left, b).intersect(
          IntervalSet1D::from_cells(right, b));
      return k == 0 ? meet.V0() : meet.length_units();
    }, unit);
  }

  if (k == 1) return Real(0);  // at most a point
  std::vector<std::pair<std::int64_t, std::int64_t>> corners;  // corner cell of each block
  const std::pair<std::int64_t, std::int64_t> c00{b - 1, b - 1}, c10{b, b - 1}, c01{b - 1, b},
      c11{b, b};
  switch (configuration) {
    case Configuration::corner2: corners = {c00, c11}; break;
    case Configuration::corner3: corners = {c00, c10, c01}; break;
    case Configuration::corner4: corners = {c00, c10, c01, c11}; break;
    case Configuration::side: break;
  }
  return expectation(dist, p, [&](std::uint64_t mask) -> std::int64_t {
    return std::all_of(corners.begin(), corners.end(),
                       [&](const auto& xy) { return cell(mask, xy.first, xy.second); });
  });
}

/// Exact value together with its double rendering.
struct OracleValue {
  Rational exact;
  double approx = 0.0;
};

inline OracleValue make_value(const Rational& x) { return {x, to_double(x)}; }

}  // namespace fracperc::oracle
