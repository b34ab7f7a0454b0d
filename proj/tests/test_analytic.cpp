#include "fracperc/analytic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracperc;
using namespace fracperc::analytic;

namespace {

ModelParams line(int M, double p) { return make_params(M, p, 1); }
ModelParams square(int M, double p) { return make_params(M, p, 2); }

}  // namespace

TEST(Dims, FullSquare) {
  const auto r = dims(square(2, 1.0));
  EXPECT_DOUBLE_EQ(r.D, 2.0);
  EXPECT_DOUBLE_EQ(*r.D2, 1.0);
  EXPECT_DOUBLE_EQ(*r.D3, 1.0);
  EXPECT_DOUBLE_EQ(*r.c2, 0.0);
  EXPECT_DOUBLE_EQ(*r.c3, 0.0);
  EXPECT_TRUE(r.non_empty_regime);
}

TEST(Dims, CriticalCaseFlagged) {
  const auto r = dims(square(2, 0.25));
  EXPECT_NEAR(r.D, 0.0, 1e-15);
  EXPECT_FALSE(r.non_empty_regime);
}

TEST(Dims, LineIntersectionDimension) {
  const auto r = dims(line(3, 1.0 / 3.0));
  EXPECT_NEAR(r.D, 0.0, 1e-15);
  EXPECT_NEAR(r.Dprime, -1.0, 1e-15);
  EXPECT_FALSE(r.D2.has_value());
}

TEST(Line, SingleCopyExamples) {
  EXPECT_DOUBLE_EQ(ev_Vk_1d(line(2, 0.5), 1, 0), 0.75);
  EXPECT_DOUBLE_EQ(ev_Vk_1d(line(7, 0.3), 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ev_Vk_1d(line(3, 0.5), 2, 1), 0.25);
}

TEST(Line, TwoCopyExamples) {
  EXPECT_DOUBLE_EQ(ev_Vk_intersect_1d(line(2, 1.0), 5, 0), 1.0);
  EXPECT_DOUBLE_EQ(ev_Vk_intersect_1d(line(2, 0.5), 1, 1), 0.25);
  // Joint level-1 outcomes: some half kept by both copies w.p. 1 - (3/4)^2,
  // plus the lone midpoint when the copies keep opposite halves, 2/16.
  EXPECT_NEAR(ev_Vk_intersect_1d(line(2, 0.5), 1, 0), 9.0 / 16.0, 1e-15);
}

TEST(Line, IsolatedPoints) {
  EXPECT_DOUBLE_EQ(ev_N_isolated_1d(line(5, 0.4), 0), 0.0);
  EXPECT_NEAR(ev_N_isolated_1d(line(2, 1.0), 3), 0.0, 1e-15);
  // Level 1: the midpoint is isolated iff one copy has only the left half
  // and the other only the right half: 2 * (p(1-p))^2 = 1/8.
  EXPECT_NEAR(ev_N_isolated_1d(line(2, 0.5), 1), 0.125, 1e-15);
}

TEST(Line, ComplementExamples) {
  EXPECT_NEAR(ev_Vk_complement_1d(line(2, 1.0), 4, 0, false), 0.0, 1e-15);
  // Outcomes: empty w.p. p^2, one closed half w.p. 2p(1-p), [0,1] w.p. (1-p)^2,
  // so E V0 = 1 - p^2.
  EXPECT_NEAR(ev_Vk_complement_1d(line(2, 0.5), 1, 0, false), 0.75, 1e-15);
  EXPECT_NEAR(ev_Vk_complement_1d(line(2, 0.5), 1, 1, true), 0.25, 1e-15);
  EXPECT_NEAR(ev_Vk_complement_1d(line(3, 0.6), 3, 1, false), 1 - std::pow(0.6, 3), 1e-15);
}

TEST(Line, Limits) {
  EXPECT_DOUBLE_EQ(limit_Vk_1d(line(2, 1.0), 0), 0.0);
  EXPECT_DOUBLE_EQ(limit_Vk_1d(line(2, 0.75), 1), 1.0);
  EXPECT_DOUBLE_EQ(limit_Vk_intersect_1d(line(2, 1.0), 0), 0.0);
  EXPECT_DOUBLE_EQ(limit_Vk_intersect_1d(line(2, 0.5), 1), 1.0);
  EXPECT_DOUBLE_EQ(limit_Vck_1d(line(2, 1.0), 0), 0.0);
  EXPECT_DOUBLE_EQ(limit_Vck_1d(line(5, 0.5), 1), 0.0);
  EXPECT_DOUBLE_EQ(limit_Vck_1d(line(2, 0.75), 0), limit_Vk_1d(line(2, 0.75), 0));
  for (double p : {0.1, 0.4, 0.9}) {
    const double M = 1e7;
    EXPECT_NEAR(limit_Vk_1d(line(int(M), p), 0), 1 - p, 1e-6);
    EXPECT_NEAR(limit_Vk_intersect_1d(line(int(M), p), 0), 3 - 4 * p + p * p, 1e-6);
  }
}

TEST(Line, LimitDomainGuard) {
  EXPECT_THROW(limit_Vk_1d(line(2, 0.5), 0), DomainError);
  EXPECT_THROW(limit_Vck_1d(line(4, 0.2), 0), DomainError);
  EXPECT_NO_THROW(limit_Vk_1d(line(2, 0.51), 0));
}

TEST(Line, SingleCopyRecursion) {
  for (int M : {2, 3, 5, 16}) {
    for (double p : {0.1, 0.35, 0.5, 0.8, 1.0}) {
      const auto P = line(M, p);
      for (int n = 1; n <= 20; ++n) {
        const double lhs = ev_Vk_1d(P, n, 0);
        const double rhs = M * p * ev_Vk_1d(P, n - 1, 0) - (M - 1) * std::pow(p, 2 * n);
        EXPECT_NEAR(lhs, rhs, 1e-11 * std::max(1.0, std::abs(lhs))) << M << ' ' << p << ' ' << n;
      }
    }
  }
}

TEST(Line, IsolatedPointRecursion) {
  for (int M : {2, 3, 5, 16}) {
    for (double p : {0.1, 0.35, 0.5, 0.8, 1.0}) {
      const auto P = line(M, p);
      for (int n = 1; n <= 20; ++n) {
        const double pn = std::pow(p, n);
        const double lhs = ev_N_isolated_1d(P, n);
        const double rhs = M * p * p * ev_N_isolated_1d(P, n - 1) +
                           2.0 * (M - 1) * std::pow(p, 2 * n) * (1 - pn) * (1 - pn);
        EXPECT_NEAR(lhs, rhs, 1e-11 * std::max(1.0, std::abs(lhs))) << M << ' ' << p << ' ' << n;
      }
    }
  }
}

TEST(Square, FullSquare) {
  for (int n : {1, 3, 7}) {
    EXPECT_NEAR(vbar0_2d_finite(square(2, 1.0), n), std::pow(4.0, -n), 1e-15);
    EXPECT_NEAR(ev_Vk_F_2d(square(2, 1.0), n, 0), 1.0, 1e-12);
  }
  EXPECT_NEAR(limit_Vk_2d(square(2, 1.0), 0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(limit_Vk_2d(square(2, 1.0), 1), 0.0);
  EXPECT_DOUBLE_EQ(limit_Vck_2d(square(3, 1.0), 0), 0.0);
}

TEST(Square, LevelOneByHand) {
  // Sum over the 16 level-1 configurations of the 2x2 block.
  const double p = 0.5;
  double ev = 0;
  for (int mask = 0; mask < 16; ++mask) {
    const int cells = __builtin_popcount(mask);
    const double weight = std::pow(p, cells) * std::pow(1 - p, 4 - cells);
    // Any nonempty union of closed cells in a 2x2 block is connected and simply connected.
    ev += weight * (cells > 0 ? 1 : 0);
  }
  EXPECT_NEAR(ev_Vk_F_2d(square(2, p), 1, 0), ev, 1e-15);
  EXPECT_NEAR(vbar0_2d_finite(square(2, p), 1), ev / 2.0, 1e-15);
}

TEST(Square, AreaAndPerimeterLimits) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> m_dist(2, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const int M = m_dist(rng);
    const double p = 1.0 / (M * M) + (1 - 1.0 / (M * M)) * (0.001 + 0.998 * u(rng));
    EXPECT_EQ(limit_Vk_2d(square(M, p), 2), 1.0);
    const double q = 1.0 / M + (1 - 1.0 / M) * (0.001 + 0.998 * u(rng));
    EXPECT_NEAR(limit_Vck_2d(square(M, q), 1), limit_Vk_2d(square(M, q), 1), 1e-13);
  }
}

TEST(Square, ComplementLimitAgainstSeries) {
  const auto P = square(2, 0.5);
  const double rescaled = series_ev_2d(P, 200, 0, Target::C) * rescale_factor(P, 200, 0);
  EXPECT_NEAR(rescaled, limit_Vck_2d(P, 0), 1e-10);
  const double closed = 4 * (1 - 0.5) * (0.125 + 0.25 + 0.5 - 2) / ((4 - 0.125) * 1.5);
  EXPECT_NEAR(limit_Vck_2d(P, 0), closed, 1e-14);
}

TEST(Square, ComplementExpansionMatchesSeries) {
  for (int M : {2, 3, 5}) {
    for (double p : {0.3, 0.6, 0.95}) {
      const auto P = square(M, p);
      if (!P.non_empty_regime()) continue;
      for (int m = 1; m <= 12; ++m) {
        const double series = series_ev_2d(P, m, 0, Target::C);
        const auto ex = vbarc0_2d_finite(P, m);
        EXPECT_NEAR(ex.expectation, series, 1e-10 * std::max(1.0, std::abs(series)));
      }
    }
  }
  EXPECT_NEAR(vbarc0_2d_finite(square(2, 1.0), 3).expectation, 0.0, 1e-12);
}

TEST(Square, FiniteCurvesConverge) {
  for (int M : {2, 3, 8}) {
    for (double p : {0.4, 0.7, 0.95}) {
      const auto P = square(M, p);
      EXPECT_NEAR(vbar0_2d_finite(P, 80), limit_Vk_2d(P, 0), 1e-12);
      EXPECT_NEAR(vbarc0_2d_finite(P, 80).rescaled, limit_Vck_2d(P, 0), 1e-12);
    }
  }
}

TEST(Square, DeviationRate) {
  const auto P = square(2, 0.6);
  const double c = vbar0_2d_rate_constant(P);
  const double ratio = vbar0_2d_deviation(P, 40) / (c * std::pow(0.3, 40));
  EXPECT_NEAR(ratio, 1.0, 0.05);
}

TEST(Square, PerimeterLimitDecreasing) {
  for (int M = 2; M <= 64; ++M) {
    double prev = INFINITY;
    for (double p = 1.0 / (M * M) + 1e-3; p < 1.0; p += 1e-3) {
      const double v = limit_Vk_2d(square(M, p), 1);
      ASSERT_LT(v, prev) << "M=" << M << " p=" << p;
      prev = v;
    }
  }
}

TEST(Square, DomainGuards) {
  EXPECT_THROW(limit_Vk_2d(square(2, 0.25), 0), DomainError);
  EXPECT_THROW(vbar0_2d_finite(square(3, 0.1), 4), DomainError);
  EXPECT_THROW(limit_Vck_2d(square(2, 0.4), 1), DomainError);
  EXPECT_NO_THROW(limit_Vck_2d(square(2, 0.4), 0));
  EXPECT_THROW(ev_Vk_F_2d(square(2, 0.5), 1, 3), std::invalid_argument);
}

TEST(Square, IntersectionTerms) {
  const double p = 0.3;
  const auto P = square(3, p);
  EXPECT_NEAR(intersection_series_terms_2d(P, Configuration::corner4, 2, 0, Target::F),
              std::pow(p, 8), 1e-18);
  EXPECT_NEAR(intersection_series_terms_2d(P, Configuration::corner2, 1, 0, Target::C),
              (1 - p) * (1 - p), 1e-15);
  EXPECT_NEAR(intersection_series_terms_2d(P, Configuration::side, 1, 1, Target::F), p * p / 3,
              1e-15);
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(intersection_series_terms_2d(P, Configuration::side, n, 0, Target::F),
                side_term_F_closed(P, n), 1e-14);
  }
  EXPECT_THROW(configuration_from_string("edge"), std::invalid_argument);
}

TEST(Square, SeriesMatchesClosedForms) {
  for (int M : {2, 4}) {
    for (double p : {0.2, 0.55, 1.0}) {
      const auto P = square(M, p);
      for (int n = 0; n <= 10; ++n) {
        for (int k = 0; k <= 2; ++k) {
          const double closed = ev_Vk_F_2d(P, n, k);
          EXPECT_NEAR(series_ev_2d(P, n, k, Target::F), closed,
                      1e-10 * std::max(1.0, std::abs(closed)));
          const double closed_c = ev_Vk_C_2d(P, n, k);
          EXPECT_NEAR(series_ev_2d(P, n, k, Target::C), closed_c,
                      1e-10 * std::max(1.0, std::abs(closed_c)));
        }
      }
    }
  }
}

TEST(LargeM, Cubics) {
  EXPECT_DOUBLE_EQ(largeM_v(1.0), 0.0);
  EXPECT_DOUBLE_EQ(largeM_vc(1.0), 0.0);
  EXPECT_NEAR(largeM_v((3 - std::sqrt(5.0)) / 2), 0.0, 1e-15);
  for (double p = 0.05; p < 1.0; p += 0.01) {
    EXPECT_NEAR(limit_Vk_2d(square(1000000, p), 0), largeM_v(p), 1e-4);
    EXPECT_NEAR(-limit_Vck_2d(square(1000000, p), 0), largeM_vc(p), 1e-4);
  }
}

TEST(Exact, RationalPathAgreesWithDouble) {
  const auto E = make_exact_params(3, Rational(2, 5), 2);
  const auto P = square(3, 0.4);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_NEAR(to_double(ev_Vk_F_2d(E, n, 0)), ev_Vk_F_2d(P, n, 0), 1e-12);
    EXPECT_EQ(ev_Vk_F_2d(E, n, 0), series_ev_2d(E, n, 0, Target::F));
    EXPECT_EQ(vbarc0_2d_finite(E, n).expectation, series_ev_2d(E, n, 0, Target::C));
  }
}
