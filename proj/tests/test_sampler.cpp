#include "fracperc/geometry.hpp"
#include "fracperc/sampler.hpp"
#include "fracperc/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace fracperc;

TEST(Sampler, ExtremeDensities) {
  const auto full = sample(make_params(3, 1.0), 3, 42, 0);
  EXPECT_EQ(full.grid.popcount(), full.grid.cell_count());
  EXPECT_EQ(full.side(), 27);
  const auto empty = sample(make_params(3, 0.0), 2, 42, 0);
  EXPECT_EQ(empty.grid.popcount(), 0);
  const auto zero_level = sample(make_params(5, 0.0), 0, 42, 0);
  EXPECT_EQ(zero_level.grid.popcount(), 1);
}

TEST(Sampler, Deterministic) {
  const auto P = make_params(3, 0.7);
  EXPECT_EQ(sample(P, 5, 1, 0).grid, sample(P, 5, 1, 0).grid);
  EXPECT_FALSE(sample(P, 5, 1, 0).grid == sample(P, 5, 2, 0).grid);
  EXPECT_FALSE(sample(P, 5, 1, 0).grid == sample(P, 5, 1, 1).grid);
}

TEST(Sampler, HierarchicalConsistency) {
  for (int d : {1, 2}) {
    const auto P = make_params(3, 0.75, d);
    for (std::uint64_t idx = 0; idx < 50; ++idx) {
      const auto coarse = sample(P, 3, 11, idx);
      const auto fine = sample(P, 4, 11, idx);
      for (std::int64_t y = 0; y < fine.grid.height(); ++y) {
        for (std::int64_t x = 0; x < fine.grid.width(); ++x) {
          if (fine.grid.get(x, y)) {
            ASSERT_TRUE(coarse.grid.get(x / 3, d == 2 ? y / 3 : 0)) << x << ',' << y;
          }
        }
      }
    }
  }
}

TEST(Sampler, LevelOneCountIsBinomial) {
  // Survivors among the 9 first-level squares follow Binomial(9, p).
  const int M = 3, cells = 9, samples = 20000;
  const double p = 0.4;
  std::vector<int> histogram(cells + 1, 0);
  for (int i = 0; i < samples; ++i) {
    ++histogram[static_cast<std::size_t>(sample(make_params(M, p), 1, 99, i).grid.popcount())];
  }
  double chi2 = 0;
  int dof = -1;
  for (int k = 0; k <= cells; ++k) {
    const double prob = std::tgamma(cells + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(cells - k + 1.0)) *
                        std::pow(p, k) * std::pow(1 - p, cells - k);
    const double expected = prob * samples;
    if (expected < 5) continue;
    chi2 += (histogram[k] - expected) * (histogram[k] - expected) / expected;
    ++dof;
  }
  // 99.9% quantiles of chi-square with 7, 8, 9 degrees of freedom.
  const std::map<int, double> quantile{{7, 24.32}, {8, 26.12}, {9, 27.88}};
  ASSERT_TRUE(quantile.count(dof)) << dof;
  EXPECT_LT(chi2, quantile.at(dof)) << "dof " << dof;
}

TEST(Sampler, CoupledAcrossP) {
  for (std::uint64_t idx = 0; idx < 30; ++idx) {
    const auto low = sample(make_params(2, 0.55), 6, 5, idx);
    const auto high = sample(make_params(2, 0.8), 6, 5, idx);
    EXPECT_TRUE(low.grid.is_subset_of(high.grid));
  }
}

TEST(Sampler, IndependentModeBreaksCoupling) {
  SampleOptions independent;
  independent.coupled = false;
  int violations = 0;
  for (std::uint64_t idx = 0; idx < 30; ++idx) {
    const auto low = sample(make_params(2, 0.55), 6, 5, idx, independent);
    const auto high = sample(make_params(2, 0.8), 6, 5, idx, independent);
    violations += !low.grid.is_subset_of(high.grid);
  }
  EXPECT_GT(violations, 0);
}

TEST(Sampler, MeanCellCount) {
  const auto P = make_params(2, 0.7);
  const int n = 8;
  McEstimate est;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    est.add(static_cast<double>(sample(P, n, 2024, i).grid.popcount()));
  }
  const double expected = std::pow(4 * 0.7, n);
  EXPECT_LT(std::abs(est.mean() - expected), 4 * est.standard_error())
      << est.mean() << " vs " << expected;
}

TEST(Sampler, ComplementProperties) {
  const auto P = make_params(2, 0.6);
  const auto F = sample(P, 5, 3, 0);
  const auto C = complement(F);
  EXPECT_EQ(C.target, Target::C);
  EXPECT_EQ(complement(C).grid, F.grid);
  EXPECT_EQ(complement(sample(make_params(2, 1.0), 3, 1, 0)).grid.popcount(), 0);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto f = sample(P, 6, 8, i);
    EXPECT_DOUBLE_EQ(geometry::minkowski(f).V2 + geometry::minkowski(complement(f)).V2, 1.0);
  }
}

TEST(Sampler, ResourceGuard) {
  EXPECT_THROW(lattice_side(2, 40, 2), ResourceError);
  SampleOptions small;
  small.memory_budget_bytes = 1024;
  EXPECT_THROW(sample(make_params(2, 0.5), 8, 1, 0, small), ResourceError);
  EXPECT_EQ(lattice_side(4, 3, 2), 64);
  EXPECT_THROW(sample(make_params(2, 1.5), 2, 1, 0), std::invalid_argument);
}
