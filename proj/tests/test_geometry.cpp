#include "fracperc/geometry.hpp"
#include "fracperc/rng.hpp"

#include <gtest/gtest.h>

using namespace fracperc;
using namespace fracperc::geometry;

namespace {

BitGrid from_rows(const std::vector<std::string>& rows) {
  BitGrid g(static_cast<std::int64_t>(rows.front().size()), static_cast<std::int64_t>(rows.size()));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) {
      if (rows[y][x] == '#') g.set(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y));
    }
  }
  return g;
}

BitGrid random_grid(std::int64_t w, std::int64_t h, double density, std::uint64_t seed) {
  const NodeUniforms u(seed, 0);
  BitGrid g(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      if (u.uniform(0, static_cast<std::uint64_t>(y * w + x)) < density) g.set(x, y);
    }
  }
  return g;
}

}  // namespace

TEST(Minkowski, SingleCell) {
  const double s = 0.25;
  const auto v = minkowski_2d(from_rows({"...", ".#.", "..."}), s);
  EXPECT_EQ(v.V0, 1);
  EXPECT_DOUBLE_EQ(v.V1, 2 * s);
  EXPECT_DOUBLE_EQ(v.V2, s * s);
}

TEST(Minkowski, Annulus) {
  const auto v = minkowski_2d(from_rows({"###", "#.#", "###"}), 1.0);
  EXPECT_EQ(v.V0, 0);
  EXPECT_EQ(euler_crosscheck(from_rows({"###", "#.#", "###"})), 0);
}

TEST(Minkowski, DiagonalPair) {
  const double s = 0.5;
  const auto g = from_rows({"#.", ".#"});
  const auto v = minkowski_2d(g, s);
  EXPECT_EQ(v.V0, 1);
  EXPECT_DOUBLE_EQ(v.V1, 4 * s);
  EXPECT_EQ(euler_crosscheck(g), 1);
}

TEST(Minkowski, FullAndEmpty) {
  BitGrid full(7, 7);
  full.fill(true);
  const auto v = minkowski_2d(full, 1.0 / 7);
  EXPECT_EQ(v.V0, 1);
  EXPECT_NEAR(v.V1, 2.0, 1e-15);
  EXPECT_NEAR(v.V2, 1.0, 1e-15);
  EXPECT_EQ(minkowski_2d(BitGrid(5, 5), 0.2).V0, 0);
}

TEST(Minkowski, HolesAndComponents) {
  const auto g = from_rows({"#####.##", "#.#.#.#.", "#####.##", "........", "#.#.#..#"});
  // 1 ring-like blob with 2 holes, one 2-cell L-shape with no hole, 4 singletons.
  EXPECT_EQ(minkowski_2d(g, 1.0).V0, 1 - 2 + 1 + 4);
  EXPECT_EQ(euler_crosscheck(g), 4);
}

TEST(Minkowski, LineSegments) {
  const auto g = from_rows({"##.#..###"});
  const auto v = minkowski_1d(g, 1.0 / 9);
  EXPECT_EQ(v.V0, 3);
  EXPECT_NEAR(v.V1, 6.0 / 9, 1e-15);
}

TEST(Minkowski, LookupMatchesDirectCounts) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::int64_t w = 8 + static_cast<std::int64_t>(seed % 57);
    const std::int64_t h = 8 + static_cast<std::int64_t>((seed * 7) % 57);
    const double density = (seed % 3 == 0) ? 0.2 : (seed % 3 == 1) ? 0.5 : 0.8;
    const auto g = random_grid(w, h, density, seed);
    const auto a = minkowski_2d(g, 1.0 / 64);
    const auto b = minkowski_counts_direct(g, 1.0 / 64);
    ASSERT_EQ(a, b) << seed;
    ASSERT_EQ(a.V0, euler_crosscheck(g)) << seed;
  }
}

TEST(Minkowski, ComponentsMinusHolesOnRandomSquares) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto g = random_grid(64, 64, 0.3 + 0.4 * static_cast<double>(seed % 5) / 4, seed + 500);
    ASSERT_EQ(minkowski_2d(g, 1.0).V0, euler_crosscheck(g)) << seed;
  }
}

// Split a grid at column k into closed sets A (x < k) and B (x >= k). Their
// intersection lies on the line x = k: unit segments where both neighbours
// are present, plus corner points touched from both sides.
TEST(Minkowski, AdditivityAcrossACut) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::int64_t w = 20, h = 17, k = 1 + static_cast<std::int64_t>(seed % 18);
    const auto g = random_grid(w, h, 0.55, seed + 9000);
    BitGrid a(w, h), b(w, h);
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        if (g.get(x, y)) (x < k ? a : b).set(x, y);
      }
    }
    std::int64_t segments = 0, points = 0;
    for (std::int64_t y = 0; y < h; ++y) segments += a.get(k - 1, y) && b.get(k, y);
    for (std::int64_t v = 0; v <= h; ++v) {
      const bool left = a.get_padded(k - 1, v - 1) || a.get_padded(k - 1, v);
      const bool right = b.get_padded(k, v - 1) || b.get_padded(k, v);
      points += left && right;
    }
    const double s = 1.0 / w;
    const auto whole = minkowski_2d(g, s), va = minkowski_2d(a, s), vb = minkowski_2d(b, s);
    ASSERT_EQ(whole.V0, va.V0 + vb.V0 - (points - segments)) << seed;
    ASSERT_NEAR(whole.V1, va.V1 + vb.V1 - segments * s, 1e-12) << seed;
    ASSERT_NEAR(whole.V2, va.V2 + vb.V2, 1e-12) << seed;
  }
}

TEST(Labeling, FullAndEmpty) {
  BitGrid full(6, 4);
  full.fill(true);
  const auto lf = label(full, 4);
  EXPECT_EQ(lf.component_count, 1);
  EXPECT_TRUE(lf.spans[0]);
  EXPECT_TRUE(lf.spans[1]);
  EXPECT_EQ(spanning_mask(lf), full);
  const auto le = label(BitGrid(6, 4), 8);
  EXPECT_EQ(le.component_count, 0);
  EXPECT_FALSE(le.spans[0]);
  EXPECT_FALSE(le.spans[1]);
  EXPECT_EQ(spanning_mask(le).popcount(), 0);
}

TEST(Labeling, DiagonalConnectivity) {
  const auto g = from_rows({"#.", ".#"});
  EXPECT_EQ(label(g, 8).component_count, 1);
  EXPECT_EQ(label(g, 4).component_count, 2);
  EXPECT_TRUE(label(g, 8).spans[0]);
  EXPECT_FALSE(label(g, 4).spans[0]);
  EXPECT_THROW(label(g, 6), std::invalid_argument);
}

TEST(Labeling, SpanningAxes) {
  const auto g = from_rows({"#....", "#####", "#....", "....#"});
  const auto l = label(g, 4);
  EXPECT_EQ(l.component_count, 2);
  EXPECT_TRUE(l.spans[0]);
  EXPECT_FALSE(l.spans[1]);
  const auto mask = spanning_mask(l, Axis::horizontal);
  EXPECT_EQ(mask.popcount(), 7);
  EXPECT_FALSE(mask.get(4, 3));
  EXPECT_EQ(spanning_mask(l, Axis::vertical).popcount(), 0);
  EXPECT_EQ(l.label_at(1, 0), -1);
}
