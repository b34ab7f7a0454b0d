#include "fracperc/analytic.hpp"
#include "fracperc/oracle.hpp"

#include <gtest/gtest.h>

using namespace fracperc;
using namespace fracperc::oracle;

namespace {

const Rational half(1, 2);

Rational line_query(int M, const Rational& p, int n, Functional1D f, Target t, bool two) {
  Query1D q;
  q.functional = f;
  q.target = t;
  q.two_copies = two;
  return enumerate_1d(M, p, n, q);
}

}  // namespace

TEST(Oracle, LineExamples) {
  EXPECT_EQ(line_query(2, half, 1, Functional1D::V0, Target::F, false), Rational(3, 4));
  EXPECT_EQ(line_query(2, Rational(1), 2, Functional1D::V1, Target::F, false), Rational(1));
  EXPECT_EQ(line_query(2, half, 1, Functional1D::V1, Target::C, false), Rational(1, 2));
  EXPECT_EQ(line_query(2, half, 1, Functional1D::isolated_points, Target::F, true),
            Rational(1, 8));
}

TEST(Oracle, LineMatchesClosedForms) {
  for (int M : {2, 3}) {
    for (const Rational& p : {Rational(1, 5), half, Rational(4, 5)}) {
      const auto P = make_exact_params(M, p, 1);
      for (int n = 0; n <= (M == 2 ? 3 : 2); ++n) {
        EXPECT_EQ(line_query(M, p, n, Functional1D::V0, Target::F, false),
                  analytic::ev_Vk_1d(P, n, 0));
        EXPECT_EQ(line_query(M, p, n, Functional1D::V0, Target::F, true),
                  analytic::ev_Vk_intersect_1d(P, n, 0));
        EXPECT_EQ(line_query(M, p, n, Functional1D::isolated_points, Target::F, true),
                  analytic::ev_N_isolated_1d(P, n));
        EXPECT_EQ(line_query(M, p, n, Functional1D::V0, Target::C, true),
                  analytic::ev_Vk_complement_1d(P, n, 0, true));
      }
    }
  }
}

TEST(Oracle, SquareExamples) {
  EXPECT_EQ(enumerate_2d(2, Rational(1), 1, 0, Target::F), Rational(1));
  EXPECT_EQ(enumerate_2d(2, half, 1, 2, Target::F), half);
  const auto P = make_exact_params(2, half, 2);
  EXPECT_EQ(enumerate_2d(2, half, 1, 0, Target::C), analytic::vbarc0_2d_finite(P, 1).expectation);
  EXPECT_EQ(enumerate_2d(2, half, 2, 0, Target::F), analytic::ev_Vk_F_2d(P, 2, 0));
}

TEST(Oracle, IntersectionTerms) {
  const auto dist = enumerate_outcomes(3, 1, 2);
  const Rational p(2, 5);
  const auto P = make_exact_params(3, p, 2);
  for (auto c : {Configuration::side, Configuration::corner2, Configuration::corner3,
                 Configuration::corner4}) {
    for (int k : {0, 1}) {
      for (auto t : {Target::F, Target::C}) {
        EXPECT_EQ(intersection_term_2d(dist, p, c, k, t),
                  analytic::intersection_series_terms_2d(P, c, 1, k, t))
            << analytic::to_string(c) << ' ' << k << ' ' << analytic::to_string(t);
      }
    }
  }
}

TEST(Oracle, Envelope) {
  EXPECT_EQ(tree_node_count(2, 2, 2), 20);
  EXPECT_EQ(tree_node_count(3, 1, 2), 9);
  EXPECT_EQ(tree_node_count(2, 3, 1), 14);
  EXPECT_THROW(enumerate_outcomes(2, 3, 2), InstanceTooLarge);
  EXPECT_THROW(enumerate_outcomes(5, 1, 2), InstanceTooLarge);
  EXPECT_NO_THROW(enumerate_outcomes(4, 2, 1));
}

TEST(Oracle, OutcomeWeightsSumToOne) {
  const auto dist = enumerate_outcomes(2, 2, 2);
  for (const Rational& p : {Rational(1, 5), Rational(4, 5)}) {
    EXPECT_EQ(expectation(dist, p, [](std::uint64_t) { return std::int64_t{1}; }), Rational(1));
  }
  EXPECT_EQ(dist.grid(0).popcount(), 0);
  EXPECT_EQ(dist.grid(0xffff).popcount(), 16);
}

TEST(Oracle, ExponentTable) {
  ExponentTable t(3);
  t.add(1, 0, 2);
  t.add(0, 2, 1);
  EXPECT_EQ(t.at(1, 0), 2);
  EXPECT_EQ(t.evaluate(Rational(1, 3)), Rational(2, 3) + Rational(4, 9));
  EXPECT_THROW(t.add(4, 0, 1), std::out_of_range);
}

TEST(Oracle, IntervalSets) {
  const auto a = IntervalSet1D::from_cells(0b0111, 4);  // [0,3]
  const auto b = IntervalSet1D::from_cells(0b1001, 4);  // [0,1] and [3,4]
  const auto m = a.intersect(b);
  EXPECT_EQ(m.V0(), 2);
  EXPECT_EQ(m.isolated_points(), 1);
  EXPECT_EQ(m.V1(), Rational(1, 4));
  EXPECT_TRUE(m.contains(3));
  EXPECT_FALSE(m.contains(2));
  EXPECT_THROW(IntervalSet1D(4, {{2, 3}, {3, 4}}), std::invalid_argument);
}
