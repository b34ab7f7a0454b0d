#pragma once

// Minkowski functionals and cluster structure of unions of closed lattice
// cells. Present cells are closed squares: two cells touching at a single
// corner belong to the same connected set.

#include "fracperc/core.hpp"
#include "fracperc/grid.hpp"
#include "fracperc/sampler.hpp"
#include "fracperc/union_find.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fracperc::geometry {

/// Raw lattice counts and the derived functionals. V1 and V2 are in units of
/// the unit square, i.e. they already carry the cell size s.
struct MinkowskiValues {
  std::int64_t faces = 0;
  std::int64_t edges_any = 0;
  std::int64_t edges_shared = 0;
  std::int64_t vertices_any = 0;
  std::int64_t V0 = 0;
  double V1 = 0.0;
  double V2 = 0.0;
  double cell_size = 1.0;

  /// V1 / s, an integer.
  [[nodiscard]] std::int64_t half_perimeter_cells() const { return 2 * faces - edges_shared; }

  friend bool operator==(const MinkowskiValues&, const MinkowskiValues&) = default;
};

namespace detail {

struct WindowCounts {
  std::int8_t faces, edges_any, edges_shared, vertices_any;
};

// Window around the lattice vertex (x, y), bit 0 = cell (x-1, y-1), bit 1 =
// (x, y-1), bit 2 = (x-1, y), bit 3 = (x, y). Each window owns the vertex, the
// edge leaving it to the right, the edge leaving it downwards, and the cell
// whose top-left corner it is.
constexpr std::array<WindowCounts, 16> make_window_table() {
  std::array<WindowCounts, 16> table{};
  for (int mask = 0; mask < 16; ++mask) {
    const bool tr = mask & 2, bl = mask & 4, br = mask & 8;
    table[mask].faces = br;
    table[mask].edges_any = static_cast<std::int8_t>((tr || br) + (bl || br));
    table[mask].edges_shared = static_cast<std::int8_t>((tr && br) + (bl && br));
    table[mask].vertices_any = mask != 0;
  }
  return table;
}

inline constexpr auto kWindowTable = make_window_table();

inline MinkowskiValues finish(MinkowskiValues values, double cell_size, bool planar) {
  values.cell_size = cell_size;
  if (planar) {
    values.V0 = values.vertices_any - values.edges_any + values.faces;
    values.V1 = cell_size * static_cast<double>(values.half_perimeter_cells());
    values.V2 = cell_size * cell_size * static_cast<double>(values.faces);
  } else {
    // Cells are intervals: they play the role of edges.
    values.V0 = values.vertices_any - values.edges_any;
    values.V1 = cell_size * static_cast<double>(values.edges_any);
    values.V2 = 0.0;
  }
  return values;
}

}  // namespace detail

/// Functionals of a planar lattice: one pass over the (W+1)(H+1) zero-padded
/// 2x2 windows with a 16-entry lookup table.
inline MinkowskiValues minkowski_2d(const BitGrid& grid, double cell_size) {
  MinkowskiValues values;
  const std::int64_t width = grid.width();
  const std::int64_t height = grid.height();
  for (std::int64_t y = 0; y <= height; ++y) {
    const std::uint64_t* above = y > 0 ? grid.row(y - 1) : nullptr;
    const std::uint64_t* below = y < height ? grid.row(y) : nullptr;
    unsigned mask = 0;
    for (std::int64_t x = 0; x <= width; ++x) {
      unsigned top = 0, bottom = 0;
      if (x < width) {
        const int bit = static_cast<int>(x & 63);
        const std::int64_t word = x >> 6;
        if (above) top = (above[word] >> bit) & 1u;
        if (below) bottom = (below[word] >> bit) & 1u;
      }
      mask = ((mask & 0b1010u) >> 1) | (top << 1) | (bottom << 3);
      const auto& c = detail::kWindowTable[mask];
      values.faces += c.faces;
      values.edges_any += c.edges_any;
      values.edges_shared += c.edges_shared;
      values.vertices_any += c.vertices_any;
    }
  }
  return detail::finish(values, cell_size, true);
}

/// Functionals of a single row of closed intervals.
inline MinkowskiValues minkowski_1d(const BitGrid& grid, double cell_size) {
  if (grid.height() != 1) throw std::invalid_argument("minkowski_1d: expects a single row");
  MinkowskiValues values;
  bool previous = false;
  for (std::int64_t x = 0; x <= grid.width(); ++x) {
    const bool current = x < grid.width() && grid.get(x, 0);
    values.edges_any += current;
    values.vertices_any += current || previous;
    previous = current;
  }
  return detail::finish(values, cell_size, false);
}

inline MinkowskiValues minkowski(const GridRealization& realization) {
  return realization.d == 2 ? minkowski_2d(realization.grid, realization.cell_size())
                            : minkowski_1d(realization.grid, realization.cell_size());
}

/// Audit path: the four counts obtained by visiting every cell, edge and
/// vertex of the lattice separately.
inline MinkowskiValues minkowski_counts_direct(const BitGrid& grid, double cell_size) {
  MinkowskiValues values;
  const std::int64_t width = grid.width();
  const std::int64_t height = grid.height();
  values.faces = grid.popcount();
  // Horizontal edges: (height + 1) rows of `width` edges.
  for (std::int64_t y = 0; y <= height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const bool a = grid.get_padded(x, y - 1), b = grid.get_padded(x, y);
      values.edges_any += a || b;
      values.edges_shared += a && b;
    }
  }
  // Vertical edges.
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x <= width; ++x) {
      const bool a = grid.get_padded(x - 1, y), b = grid.get_padded(x, y);
      values.edges_any += a || b;
      values.edges_shared += a && b;
    }
  }
  for (std::int64_t y = 0; y <= height; ++y) {
    for (std::int64_t x = 0; x <= width; ++x) {
      values.vertices_any += grid.get_padded(x - 1, y - 1) || grid.get_padded(x, y - 1) ||
                             grid.get_padded(x - 1, y) || grid.get_padded(x, y);
    }
  }
  return detail::finish(values, cell_size, true);
}

// ---------------------------------------------------------------------------
// Connectivity

enum class Axis { horizontal = 0, vertical = 1 };

enum BorderBits : std::uint8_t {
  kLeft = 1,
  kRight = 2,
  kTop = 4,
  kBottom = 8,
};

struct ClusterLabeling {
  /// Component id per cell (row-major), -1 for absent cells.
  std::vector<std::int32_t> labels;
  std::int64_t width = 0;
  std::int64_t height = 0;
  int connectivity = 8;
  std::int64_t component_count = 0;
  /// Which lattice sides each component touches (BorderBits).
  std::vector<std::uint8_t> borders;
  /// spans[0]: some component touches left and right; spans[1]: top and bottom.
  std::array<bool, 2> spans{false, false};

  [[nodiscard]] std::int32_t label_at(std::int64_t x, std::int64_t y) const {
    return labels[static_cast<std::size_t>(y * width + x)];
  }
  [[nodiscard]] bool component_spans(std::int32_t id, Axis axis) const {
    const std::uint8_t need = axis == Axis::horizontal ? (kLeft | kRight) : (kTop | kBottom);
    return (borders[id] & need) == need;
  }
};

/// Union-find labeling of present cells with 4- or 8-connectivity.
inline ClusterLabeling label(const BitGrid& grid, int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw std::invalid_argument("label: connectivity must be 4 or 8");
  }
  const std::int64_t width = grid.width();
  const std::int64_t height = grid.height();
  if (grid.cell_count() > std::numeric_limits<std::int32_t>::max()) {
    throw ResourceError("label: lattice too large for 32-bit labels");
  }
  ClusterLabeling out;
  out.width = width;
  out.height = height;
  out.connectivity = connectivity;
  out.labels.assign(static_cast<std::size_t>(grid.cell_count()), -1);

  UnionFind<std::int32_t> sets(static_cast<std::size_t>(grid.cell_count()));
  auto id = [width](std::int64_t x, std::int64_t y) {
    return static_cast<std::int32_t>(y * width + x);
  };
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      if (!grid.get(x, y)) continue;
      // Join with already visited neighbours: left, up and (8-conn) both upper diagonals.
      if (x > 0 && grid.get(x - 1, y)) sets.unite(id(x, y), id(x - 1, y));
      if (y > 0 && grid.get(x, y - 1)) sets.unite(id(x, y), id(x, y - 1));
      if (connectivity == 8 && y > 0) {
        if (x > 0 && grid.get(x - 1, y - 1)) sets.unite(id(x, y), id(x - 1, y - 1));
        if (x + 1 < width && grid.get(x + 1, y - 1)) sets.unite(id(x, y), id(x + 1, y - 1));
      }
    }
  }

  std::vector<std::int32_t> compact(static_cast<std::size_t>(grid.cell_count()), -1);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      if (!grid.get(x, y)) continue;
      const std::int32_t root = sets.find(id(x, y));
      if (compact[root] < 0) {
        compact[root] = static_cast<std::int32_t>(out.component_count++);
        out.borders.push_back(0);
      }
      const std::int32_t component = compact[root];
      out.labels[id(x, y)] = component;
      std::uint8_t& border = out.borders[component];
      if (x == 0) border |= kLeft;
      if (x == width - 1) border |= kRight;
      if (y == 0) border |= kTop;
      if (y == height - 1) border |= kBottom;
    }
  }
  for (std::int32_t c = 0; c < out.component_count; ++c) {
    out.spans[0] = out.spans[0] || out.component_spans(c, Axis::horizontal);
    out.spans[1] = out.spans[1] || out.component_spans(c, Axis::vertical);
  }
  return out;
}

/// Cells belonging to a component that spans `axis` (or either axis when
/// `axis` is empty).
inline BitGrid spanning_mask(const ClusterLabeling& labeling, std::optional<Axis> axis = {}) {
  BitGrid mask(labeling.width, labeling.height);
  for (std::int64_t y = 0; y < labeling.height; ++y) {
    for (std::int64_t x = 0; x < labeling.width; ++x) {
      const std::int32_t c = labeling.label_at(x, y);
      if (c < 0) continue;
      const bool spans = axis ? labeling.component_spans(c, *axis)
                              : labeling.component_spans(c, Axis::horizontal) ||
                                    labeling.component_spans(c, Axis::vertical);
      if (spans) mask.set(x, y);
    }
  }
  return mask;
}

/// Independent Euler characteristic: 8-connected components of the present
/// cells minus the 4-connected components of absent cells that do not reach
/// the lattice border (the holes).
inline std::int64_t euler_crosscheck(const BitGrid& grid) {
  const auto present = label(grid, 8);
  const auto absent = label(grid.inverted(), 4);
  std::int64_t holes = 0;
  for (auto border : absent.borders) holes += border == 0;
  return present.component_count - holes;
}

}  // namespace fracperc::geometry
