#include "fracperc/analytic.hpp"
#include "fracperc/montecarlo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace fracperc;
using namespace fracperc::montecarlo;

namespace {

ExperimentSpec spec_for(int M, double p, int n, std::uint64_t samples, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.params = make_params(M, p);
  spec.n = n;
  spec.samples = samples;
  spec.seed = seed;
  spec.workers = 1;
  return spec;
}

}  // namespace

TEST(Stats, MergeMatchesSequential) {
  McEstimate all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::sin(i * 0.37) * 10 + i * 0.01;
    all.add(x);
    (i < 313 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  EXPECT_NEAR(left.mean(), all.mean(), 1e-13);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
  McEstimate empty;
  empty.merge(all);
  EXPECT_EQ(empty.mean(), all.mean());
}

TEST(MonteCarlo, FullDensityHasNoVariance) {
  const auto result = run_experiment(spec_for(3, 1.0, 3, 50, 1));
  const auto& v0 = result.row(Functional::V0, Target::F);
  EXPECT_DOUBLE_EQ(v0.estimate.mean(), 1.0);
  EXPECT_DOUBLE_EQ(v0.estimate.variance(), 0.0);
  EXPECT_DOUBLE_EQ(result.row(Functional::V2, Target::C).estimate.mean(), 0.0);
}

TEST(MonteCarlo, AgreesWithFiniteLevelFormula) {
  auto spec = spec_for(2, 0.6, 8, 3000, 77);
  const auto result = run_experiment(spec);
  for (auto t : {Target::F, Target::C}) {
    for (auto f : {Functional::V0, Functional::V1, Functional::V2}) {
      const auto& row = result.row(f, t);
      const double expected = analytic_expectation(spec.params, 8, intrinsic_index(f), t);
      EXPECT_LT(std::abs(row.estimate.mean() - expected), 4 * row.estimate.standard_error())
          << to_string(f) << ' ' << analytic::to_string(t);
    }
  }
  const auto& v0 = result.row(Functional::V0, Target::F);
  ASSERT_TRUE(v0.rescaled_mean.has_value());
  EXPECT_DOUBLE_EQ(*v0.rescaled_mean, v0.estimate.mean() * std::pow(4 * 0.6, -8));
}

TEST(MonteCarlo, RescaledMeanOnlyAboveCriticalDensity) {
  const auto result = run_experiment(spec_for(2, 0.2, 4, 20, 1));
  EXPECT_FALSE(result.rows.front().rescaled_mean.has_value());
}

TEST(MonteCarlo, ShardingDoesNotChangeEstimates) {
  auto spec = spec_for(3, 0.7, 3, 640, 5);
  spec.shards = 1;
  const auto one = run_experiment(spec);
  for (std::uint64_t shards : {8, 64}) {
    spec.shards = shards;
    const auto many = run_experiment(spec);
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
      const double a = one.rows[i].estimate.mean(), b = many.rows[i].estimate.mean();
      EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a)));
      EXPECT_EQ(one.rows[i].estimate.count(), many.rows[i].estimate.count());
    }
  }
  spec.shards = 16;
  spec.workers = 3;
  const auto threaded = run_experiment(spec);
  spec.workers = 1;
  const auto serial = run_experiment(spec);
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(threaded.rows[i].estimate.mean(), serial.rows[i].estimate.mean());
  }
}

TEST(MonteCarlo, WorkerOverride) {
  ::setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(resolve_workers(0), 3u);
  EXPECT_EQ(resolve_workers(2), 2u);
  ::setenv(kWorkersEnv, "zero", 1);
  EXPECT_THROW(resolve_workers(0), std::invalid_argument);
  ::unsetenv(kWorkersEnv);
  EXPECT_GE(resolve_workers(0), 1u);
}

TEST(MonteCarlo, InvalidSpecs) {
  auto spec = spec_for(2, 0.5, 3, 1, 1);
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  spec = spec_for(2, 0.5, 40, 10, 1);
  EXPECT_THROW(run_experiment(spec), ResourceError);
  EXPECT_THROW(functional_from_string("V3"), std::invalid_argument);
}

TEST(Spanning, ExtremeDensities) {
  EXPECT_DOUBLE_EQ(spanning_probability(make_params(2, 1.0), 5, 20, 1, 8, geometry::Axis::horizontal, 1).mean(), 1.0);
  EXPECT_DOUBLE_EQ(spanning_probability(make_params(2, 0.0), 5, 20, 1, 8, geometry::Axis::vertical, 1).mean(), 0.0);
}

TEST(Spanning, NonDecreasingInDensity) {
  double previous = 0.0, previous_se = 0.0;
  for (double p : {0.75, 0.85, 0.9, 0.95, 0.99}) {
    const auto est = spanning_probability(make_params(2, p), 10, 60, 31, 8,
                                          geometry::Axis::horizontal, 1);
    EXPECT_GE(est.mean() + 4 * est.standard_error() + 4 * previous_se, previous) << p;
    // The coupled construction makes the estimate monotone sample by sample.
    EXPECT_GE(est.mean(), previous) << p;
    previous = est.mean();
    previous_se = est.standard_error();
  }
}
