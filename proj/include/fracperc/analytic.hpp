#pragma once

// Closed-form expectations, finite-level expansions and rescaled limits of
// the intrinsic volumes of fractal percolation in d = 1 and d = 2.
//
// Every formula is a template over the scalar type so the same code runs in
// double precision and in exact rational arithmetic (Rational). Rescaled
// limits throw DomainError outside the parameter range on which they exist.

#include "fracperc/core.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace fracperc::analytic {

enum class Target { F, C };

/// Intersection patterns of neighbouring first-level blocks in the square:
/// two blocks sharing a side, and two, three or four blocks meeting at a corner.
enum class Configuration { side, corner2, corner3, corner4 };

inline const char* to_string(Target t) { return t == Target::F ? "F" : "C"; }

inline const char* to_string(Configuration c) {
  switch (c) {
    case Configuration::side: return "side";
    case Configuration::corner2: return "corner2";
    case Configuration::corner3: return "corner3";
    case Configuration::corner4: return "corner4";
  }
  return "?";
}

inline Configuration configuration_from_string(const std::string& name) {
  if (name == "side") return Configuration::side;
  if (name == "corner2") return Configuration::corner2;
  if (name == "corner3") return Configuration::corner3;
  if (name == "corner4") return Configuration::corner4;
  throw std::invalid_argument("unknown intersection configuration: " + name);
}

namespace detail {

template <class Real>
void require_dimension(const BasicModelParams<Real>& params, int d, const char* op) {
  if (params.M < 2) throw std::invalid_argument(std::string(op) + ": M must be >= 2");
  if (params.d != d) {
    throw std::invalid_argument(std::string(op) + ": requires d = " + std::to_string(d));
  }
  if (params.p < Real(0) || params.p > Real(1)) {
    throw std::invalid_argument(std::string(op) + ": p must lie in [0,1]");
  }
}

inline void require_level(int n, int min_level, const char* op) {
  if (n < min_level) {
    throw std::invalid_argument(std::string(op) + ": level must be >= " +
                                std::to_string(min_level));
  }
}

inline void require_k(int k, int max_k, const char* op) {
  if (k < 0 || k > max_k) throw std::invalid_argument(std::string(op) + ": invalid k");
}

template <class Real>
void require_p_above(const BasicModelParams<Real>& params, int power, const char* op) {
  // p > M^{-power}
  if (!(params.p * ipow(Real(params.M), power) > Real(1))) {
    throw DomainError(std::string(op) + ": requires p > 1/M^" + std::to_string(power) +
                      " (M=" + std::to_string(params.M) +
                      ", p=" + std::to_string(to_double(params.p)) + ")");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dimensions

struct DimensionReport {
  int M = 2;
  int d = 2;
  double p = 1.0;
  /// Dimension of F; only meaningful when non_empty_regime holds.
  double D = 0.0;
  bool non_empty_regime = false;
  /// Dimension of the intersection of two independent copies on an interval.
  double Dprime = 0.0;
  // Subdimensions and amplitudes of the complement expansion (d = 2 only).
  std::optional<double> D2, D3, c2, c3;
};

inline DimensionReport dims(const ModelParams& params) {
  if (params.M < 2) throw std::invalid_argument("dims: M must be >= 2");
  if (params.d != 1 && params.d != 2) throw std::invalid_argument("dims: d must be 1 or 2");
  if (!(params.p > 0.0 && params.p <= 1.0)) {
    throw std::invalid_argument("dims: p must lie in (0,1]");
  }
  const double M = params.M;
  const double p = params.p;
  const double logM = std::log(M);
  DimensionReport report;
  report.M = params.M;
  report.d = params.d;
  report.p = p;
  report.D = params.d + std::log(p) / logM;
  report.non_empty_regime = params.non_empty_regime();
  report.Dprime = std::log(M * p * p) / logM;
  if (params.d == 2) {
    report.D2 = report.D - 1.0;
    report.D3 = 2.0 * report.D - 3.0;
    report.c2 = 4.0 * M * (1.0 - p) / (M - p);
    report.c3 = -2.0 * M * (M - 1.0) * p * (1.0 - p * p) / ((M - p) * (M - p * p));
  }
  return report;
}

// ---------------------------------------------------------------------------
// d = 1: a single fractal percolation K on [0,1]

/// E V_k(K_n).
template <class Real>
Real ev_Vk_1d(const BasicModelParams<Real>& params, int n, int k) {
  detail::require_dimension(params, 1, "ev_Vk_1d");
  detail::require_level(n, 0, "ev_Vk_1d");
  detail::require_k(k, 1, "ev_Vk_1d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 1) return ipow(p, n);
  // (Mp)^n - (M-1)p/(M-p) [(Mp)^n - p^{2n}], grouped by power so the large
  // growth term is never cancelled against itself.
  const Real c = (M - 1) * p / (M - p);
  return ipow(Real(M * p), n) * M * (1 - p) / (M - p) + c * ipow(p, 2 * n);
}

/// E V_k(K_n^(1) ∩ K_n^(2)) for two independent copies.
template <class Real>
Real ev_Vk_intersect_1d(const BasicModelParams<Real>& params, int n, int k) {
  detail::require_dimension(params, 1, "ev_Vk_intersect_1d");
  detail::require_level(n, 0, "ev_Vk_intersect_1d");
  detail::require_k(k, 1, "ev_Vk_intersect_1d");
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  if (k == 1) return ipow(p2, n);
  const Real c1 = 4 * p * (M - 1) / (M - p);
  const Real c2 = (M - 1) * p2 / (M - p2);
  CompensatedSum<Real> lead;
  lead += Real(3);
  lead -= c1;
  lead += c2;
  CompensatedSum<Real> sum;
  sum += lead.value() * ipow(Real(M * p2), n);
  sum -= 2 * ipow(p2, n);
  sum += c1 * ipow(p, 3 * n);
  sum -= c2 * ipow(p, 4 * n);
  return sum.value();
}

/// E N(K_n^(1) ∩ K_n^(2)): expected number of isolated points.
template <class Real>
Real ev_N_isolated_1d(const BasicModelParams<Real>& params, int n) {
  detail::require_dimension(params, 1, "ev_N_isolated_1d");
  detail::require_level(n, 0, "ev_N_isolated_1d");
  if (n == 0) return Real(0);
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real c1 = 4 * p * (M - 1) / (M - p);
  const Real c2 = 2 * (M - 1) * p2 / (M - p2);
  CompensatedSum<Real> lead;
  lead += Real(2);
  lead -= c1;
  lead += c2;
  CompensatedSum<Real> sum;
  sum += lead.value() * ipow(Real(M * p2), n);
  sum -= 2 * ipow(p2, n);
  sum += c1 * ipow(p, 3 * n);
  sum -= c2 * ipow(p, 4 * n);
  return sum.value();
}

/// E V_k(D_n) for the closed complement D_n of K_n in [0,1], or of
/// D_n^(1) ∩ D_n^(2) when `intersect` is set.
template <class Real>
Real ev_Vk_complement_1d(const BasicModelParams<Real>& params, int n, int k, bool intersect) {
  detail::require_dimension(params, 1, "ev_Vk_complement_1d");
  detail::require_level(n, 0, "ev_Vk_complement_1d");
  detail::require_k(k, 1, "ev_Vk_complement_1d");
  const Real M(params.M);
  const Real& p = params.p;
  const Real pn = ipow(p, n);
  if (!intersect) {
    if (k == 1) return Real(1) - pn;
    CompensatedSum<Real> sum;
    sum += ev_Vk_1d(params, n, 0);
    sum += Real(1);
    sum -= 2 * pn;
    return sum.value();
  }
  if (k == 1) return Real(1) - 2 * pn + pn * pn;
  const Real p2 = p * p;
  CompensatedSum<Real> sum;
  sum += 2 * ev_Vk_1d(params, n, 0);
  sum += Real(1);
  sum -= 4 * pn;
  sum += 2 * pn * pn;
  sum -= M * (1 - p2) / (M - p2) * ipow(Real(M * p2), n);
  sum -= (M - 1) * p2 / (M - p2) * ipow(p, 4 * n);
  return sum.value();
}

/// Rescaled limit lim r^{n(D-k)} E V_k(K_n); requires p > 1/M.
template <class Real>
Real limit_Vk_1d(const BasicModelParams<Real>& params, int k) {
  detail::require_dimension(params, 1, "limit_Vk_1d");
  detail::require_k(k, 1, "limit_Vk_1d");
  detail::require_p_above(params, 1, "limit_Vk_1d");
  const Real M(params.M);
  if (k == 1) return Real(1);
  return M * (1 - params.p) / (M - params.p);
}

/// Rescaled limit of the intersection of two copies, rescaled with D'.
template <class Real>
Real limit_Vk_intersect_1d(const BasicModelParams<Real>& params, int k) {
  detail::require_dimension(params, 1, "limit_Vk_intersect_1d");
  detail::require_k(k, 1, "limit_Vk_intersect_1d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 1) return Real(1);
  return Real(3) - 4 * p * (M - 1) / (M - p) + p * p * (M - 1) / (M - p * p);
}

/// Rescaled limit lim r^{n(D-k)} E V_k(D_n) of the complement; requires p > 1/M.
template <class Real>
Real limit_Vck_1d(const BasicModelParams<Real>& params, int k) {
  detail::require_dimension(params, 1, "limit_Vck_1d");
  detail::require_k(k, 1, "limit_Vck_1d");
  detail::require_p_above(params, 1, "limit_Vck_1d");
  const Real M(params.M);
  const Real& p = params.p;
  // k = 1: E V_1(D_n) -> 1 unrescaled, so the rescaled limit vanishes.
  if (k == 1) return Real(0);
  // limit of 1 - p(M-1)/(M-p)[1-(p/M)^n] + (Mp)^{-n}(1-2p^n)
  return Real(1) - p * (M - 1) / (M - p);
}

// ---------------------------------------------------------------------------
// d = 2: per-level intersection terms of neighbouring blocks

/// Expected V_k of the intersection of the level-n parts of F (or C) inside
/// first-level blocks forming `configuration`.
template <class Real>
Real intersection_series_terms_2d(const BasicModelParams<Real>& params,
                                  Configuration configuration, int n, int k, Target target) {
  detail::require_dimension(params, 2, "intersection_series_terms_2d");
  detail::require_level(n, 1, "intersection_series_terms_2d");
  detail::require_k(k, 2, "intersection_series_terms_2d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 2) return Real(0);

  if (configuration != Configuration::side) {
    // Corner configurations intersect in at most the common corner point.
    if (k != 0) return Real(0);
    const int blocks = configuration == Configuration::corner2   ? 2
                       : configuration == Configuration::corner3 ? 3
                                                                 : 4;
    if (target == Target::F) return ipow(p, blocks * n);
    return ipow(Real(1) - ipow(p, n), blocks);
  }

  if (target == Target::F) {
    // The shared side carries two independent interval percolations, each
    // present with probability p: r^k p^2 E V_k(K ∩ K at level n-1).
    const BasicModelParams<Real> line{params.M, p, 1};
    return ipow(Real(1) / M, k) * p * p * ev_Vk_intersect_1d(line, n - 1, k);
  }

  const Real pn = ipow(p, n);
  if (k == 1) return (Real(1) - 2 * pn + pn * pn) / M;
  const Real p2 = p * p;
  CompensatedSum<Real> sum;
  sum += 2 * ipow(Real(M * p), n) * (1 - p) / (M - p);
  sum += 2 * (M - 1) / (M - p) * ipow(p2, n);
  sum += Real(1);
  sum -= 4 * pn;
  sum += 2 * pn * pn;
  sum -= ipow(Real(M * p2), n) * (1 - p2) / (M - p2);
  sum -= (M - 1) / (M - p2) * ipow(p, 4 * n);
  return sum.value();
}

/// Same side term for F written out as the closed expression obtained by
/// expanding the interval-intersection formula; kept as a second route.
template <class Real>
Real side_term_F_closed(const BasicModelParams<Real>& params, int n) {
  detail::require_dimension(params, 2, "side_term_F_closed");
  detail::require_level(n, 1, "side_term_F_closed");
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real growth = ipow(Real(M * p2), n);
  const Real q1 = p / M;
  const Real q2 = p2 / M;
  return growth * (Real(3) / M - 2 * ipow(Real(1) / M, n) -
                   4 * (M - 1) / (M - p) * (q1 - ipow(q1, n)) +
                   (M - 1) / (M - p2) * (q2 - ipow(q2, n)));
}

/// Unrescaled E V_k of F_n (or C_n) computed by running the level recursion
/// E V_k(X_n) = M^2 p r^k E V_k(X_{n-1}) [+ M^2 (1-p) r^k q_k for C] - I_k(n),
/// where I_k(n) is the inclusion-exclusion sum of the intersection terms.
/// Valid for every p in [0,1].
template <class Real>
Real series_ev_2d(const BasicModelParams<Real>& params, int n, int k, Target target) {
  detail::require_dimension(params, 2, "series_ev_2d");
  detail::require_level(n, 0, "series_ev_2d");
  detail::require_k(k, 2, "series_ev_2d");
  const Real M(params.M);
  const Real& p = params.p;
  const Real rk = ipow(Real(1) / M, k);
  const Real q(unit_cube_volume(2, k));
  const Real side_count = 2 * M * (M - 1);
  const Real corner_count = (M - 1) * (M - 1);
  Real value = target == Target::F ? q : Real(0);
  for (int level = 1; level <= n; ++level) {
    CompensatedSum<Real> sum;
    sum += M * M * p * rk * value;
    if (target == Target::C) sum += M * M * (1 - p) * rk * q;
    sum -= side_count *
           intersection_series_terms_2d(params, Configuration::side, level, k, target);
    sum -= 2 * corner_count *
           intersection_series_terms_2d(params, Configuration::corner2, level, k, target);
    sum += 4 * corner_count *
           intersection_series_terms_2d(params, Configuration::corner3, level, k, target);
    sum -= corner_count *
           intersection_series_terms_2d(params, Configuration::corner4, level, k, target);
    value = sum.value();
  }
  return value;
}

// ---------------------------------------------------------------------------
// d = 2: closed forms for F_n

namespace detail {

/// Coefficients of the four geometric brackets in the level-n expansion of
/// the rescaled Euler characteristic of F_n:
/// vbar0(n) = 1 - a[1-(p/M)^n] + b[1-(p/M^2)^n] - c[1-(p^2/M^2)^n] + e[1-(p^3/M^2)^n].
template <class Real>
struct EulerBrackets {
  Real a, b, c, e;
};

template <class Real>
EulerBrackets<Real> euler_brackets(const BasicModelParams<Real>& params) {
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real p3 = p2 * p;
  const Real m1 = M - 1;
  EulerBrackets<Real> br;
  // 2p(M-1)^2/(M-p) [3/(M-1) - 4p/(M-p) + p^2/(M-p^2)], with the (1-p) pulled out
  br.a = 2 * p * M * m1 * (1 - p) * (3 * M - M * p - 3 * p2 + p) /
         ((M - p) * (M - p) * (M - p2));
  br.b = 2 * p * (M * M - 1) / (M * M - p);
  br.c = 4 * p2 * m1 * m1 / ((M - p) * (M - p));
  br.e = p3 * m1 * m1 * (M + p2) / ((M - p2) * (M * M - p3));
  return br;
}

}  // namespace detail

/// Euler-characteristic limit 1 - a + b - c + e without the domain check; it
/// is also the leading coefficient of E V_0(F_n). Written over a common
/// denominator so the (1-p) factor is explicit and p = 1 gives exactly 0.
template <class Real>
Real limit_Vk_2d_unchecked(const BasicModelParams<Real>& params) {
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real p3 = p2 * p;
  const Real M2 = M * M;
  const Real quad = p2 - 3 * p + 1;
  CompensatedSum<Real> numerator;
  numerator += M2 * M2 * quad;
  numerator -= 2 * M2 * M * p * (p - 2);
  numerator += M2 * p * (3 * p3 - 2 * p2 + 2 * p - 3);
  numerator -= 2 * M * p3 * (2 * p - 1);
  numerator -= p3 * quad;
  return M2 * (1 - p) * numerator.value() / ((M - p) * (M - p) * (M2 - p) * (M2 - p3));
}

/// Rescaled limit of r^{n(D-k)} E V_k(F_n) in the square; requires p > 1/M^2.
template <class Real>
Real limit_Vk_2d(const BasicModelParams<Real>& params, int k) {
  detail::require_dimension(params, 2, "limit_Vk_2d");
  detail::require_k(k, 2, "limit_Vk_2d");
  detail::require_p_above(params, 2, "limit_Vk_2d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 2) return Real(1);
  if (k == 1) return 2 * M * (1 - p) / (M - p);
  return limit_Vk_2d_unchecked(params);
}

/// Rescaled Euler characteristic vbar0(n) = r^{nD} E V_0(F_n); requires p > 1/M^2.
template <class Real>
Real vbar0_2d_finite(const BasicModelParams<Real>& params, int n) {
  detail::require_dimension(params, 2, "vbar0_2d_finite");
  detail::require_level(n, 1, "vbar0_2d_finite");
  detail::require_p_above(params, 2, "vbar0_2d_finite");
  const Real M(params.M);
  const Real& p = params.p;
  const auto br = detail::euler_brackets(params);
  CompensatedSum<Real> sum;
  sum += Real(1);
  sum -= br.a * (1 - ipow(Real(p / M), n));
  sum += br.b * (1 - ipow(Real(p / (M * M)), n));
  sum -= br.c * (1 - ipow(Real(p * p / (M * M)), n));
  sum += br.e * (1 - ipow(Real(p * p * p / (M * M)), n));
  return sum.value();
}

/// vbar0(n) - limit, evaluated from the geometric tails so that no
/// cancellation occurs even when the difference is far below machine epsilon.
template <class Real>
Real vbar0_2d_deviation(const BasicModelParams<Real>& params, int n) {
  detail::require_dimension(params, 2, "vbar0_2d_deviation");
  detail::require_level(n, 0, "vbar0_2d_deviation");
  detail::require_p_above(params, 2, "vbar0_2d_deviation");
  const Real M(params.M);
  const Real& p = params.p;
  const auto br = detail::euler_brackets(params);
  CompensatedSum<Real> sum;
  sum += br.a * ipow(Real(p / M), n);
  sum -= br.b * ipow(Real(p / (M * M)), n);
  sum += br.c * ipow(Real(p * p / (M * M)), n);
  sum -= br.e * ipow(Real(p * p * p / (M * M)), n);
  return sum.value();
}

/// Amplitude c of the leading deviation vbar0(n) - limit ~ c (p/M)^n.
template <class Real>
Real vbar0_2d_rate_constant(const BasicModelParams<Real>& params) {
  detail::require_dimension(params, 2, "vbar0_2d_rate_constant");
  return detail::euler_brackets(params).a;
}

/// Unrescaled E V_k(F_n), k in {0,1,2}, from the closed expansions. Valid for
/// every p in [0,1].
template <class Real>
Real ev_Vk_F_2d(const BasicModelParams<Real>& params, int n, int k) {
  detail::require_dimension(params, 2, "ev_Vk_F_2d");
  detail::require_level(n, 0, "ev_Vk_F_2d");
  detail::require_k(k, 2, "ev_Vk_F_2d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 2) return ipow(p, n);
  if (k == 1) {
    return 2 * M * (1 - p) / (M - p) * ipow(Real(M * p), n) +
           2 * (M - 1) * p / (M - p) * ipow(p, 2 * n);
  }
  // (M^2 p)^n vbar0(n), multiplied through each bracket and regrouped so the
  // (M^2 p)^n term carries only the limit coefficient.
  const auto br = detail::euler_brackets(params);
  CompensatedSum<Real> sum;
  sum += limit_Vk_2d_unchecked(params) * ipow(Real(M * M * p), n);
  sum += br.a * ipow(Real(M * p * p), n);
  sum -= br.b * ipow(p, 2 * n);
  sum += br.c * ipow(p, 3 * n);
  sum -= br.e * ipow(p, 4 * n);
  return sum.value();
}

// ---------------------------------------------------------------------------
// d = 2: closed complements C_n

namespace detail {

template <class Real>
Real complement_euler_limit_unchecked(const BasicModelParams<Real>& params) {
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real p3 = p2 * p;
  return M * M * (1 - p) * (p3 + (M - 1) * p2 + (M - 1) * p - M) /
         ((M * M - p3) * (M - p));
}

}  // namespace detail

/// Rescaled limit of r^{n(D-k)} E V_k(C_n). k = 0 requires p > 1/M^2,
/// k = 1 requires p > 1/M; k = 2 never satisfies k < D.
template <class Real>
Real limit_Vck_2d(const BasicModelParams<Real>& params, int k) {
  detail::require_dimension(params, 2, "limit_Vck_2d");
  detail::require_k(k, 2, "limit_Vck_2d");
  if (k == 2) {
    throw DomainError("limit_Vck_2d: the area of C_n has no rescaled limit (requires k < D)");
  }
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 0) {
    detail::require_p_above(params, 2, "limit_Vck_2d");
    return detail::complement_euler_limit_unchecked(params);
  }
  detail::require_p_above(params, 1, "limit_Vck_2d");
  // Boundary series 2M(1-p) sum (Mp)^{-j} minus the side intersections
  // 2(M-1) sum (Mp)^{-n} (1 - 2p^n + p^{2n}). The two (Mp)^{-n} series share
  // their ratio; their coefficients add up to 2 - 2Mp = -2(Mp - 1), which is
  // combined before dividing so nothing cancels near p = 1/M.
  const Real mp1 = M * p - 1;
  const Real divergent = -2 * mp1 / mp1;
  return divergent + 2 * (M - 1) * (2 / (M - 1) - p / (M - p));
}

/// Exact expansion of E V_0(C_m) in powers M^{Dm}, M^{D2 m}, M^{D3 m}, ...
template <class Real>
struct ComplementEulerExpansion {
  int m = 0;
  /// Rescaled value r^{Dm} E V_0(C_m).
  Real rescaled{0};
  /// Unrescaled E V_0(C_m).
  Real expectation{0};
  Real limit{0};  ///< coefficient of M^{Dm}
  Real c2{0};     ///< coefficient of M^{(D-1)m}
  Real c3{0};     ///< coefficient of M^{(2D-3)m}
  Real c4{0};     ///< coefficient of M^{(2D-4)m}
  Real ctilde{0}; ///< coefficient of M^{(4D-8)m}
  /// Terms of E V_0(C_m) in the order limit, c2, c3, constant 1, -4 M^{(D-2)m},
  /// c4, ctilde.
  std::array<Real, 7> terms{};
};

namespace detail {

template <class Real>
ComplementEulerExpansion<Real> complement_euler_expansion(const BasicModelParams<Real>& params,
                                                          int m) {
  const Real M(params.M);
  const Real& p = params.p;
  const Real p2 = p * p;
  const Real p3 = p2 * p;
  ComplementEulerExpansion<Real> ex;
  ex.m = m;
  ex.limit = complement_euler_limit_unchecked(params);
  ex.c2 = 4 * M * (1 - p) / (M - p);
  ex.c3 = -2 * M * (M - 1) * p * (1 - p2) / ((M - p) * (M - p2));
  ex.c4 = 4 * p * (M - 1) / (M - p);
  ex.ctilde = -(M - 1) * (M - 1) * p3 * (M + p2) / ((M - p2) * (M * M - p3));
  if (m == 0) return ex;  // C_0 is empty
  ex.terms = {ex.limit * ipow(Real(M * M * p), m),
              ex.c2 * ipow(Real(M * p), m),
              ex.c3 * ipow(Real(M * p2), m),
              Real(1),
              -4 * ipow(p, m),
              ex.c4 * ipow(p2, m),
              ex.ctilde * ipow(p, 4 * m)};
  CompensatedSum<Real> sum;
  for (const auto& t : ex.terms) sum += t;
  ex.expectation = sum.value();
  return ex;
}

}  // namespace detail

/// Rescaled vbar^c_0(m) together with the term-by-term expansion of
/// E V_0(C_m); requires p > 1/M^2 and m >= 1.
template <class Real>
ComplementEulerExpansion<Real> vbarc0_2d_finite(const BasicModelParams<Real>& params, int m) {
  detail::require_dimension(params, 2, "vbarc0_2d_finite");
  detail::require_level(m, 1, "vbarc0_2d_finite");
  detail::require_p_above(params, 2, "vbarc0_2d_finite");
  auto ex = detail::complement_euler_expansion(params, m);
  const Real M(params.M);
  const Real& p = params.p;
  // Divide each term by M^{Dm} = (M^2 p)^m separately.
  CompensatedSum<Real> sum;
  sum += ex.limit;
  sum += ex.c2 * ipow(Real(1) / M, m);
  sum += ex.c3 * ipow(Real(p / M), m);
  sum += ipow(Real(1) / (M * M * p), m);
  sum -= 4 * ipow(Real(1) / (M * M), m);
  sum += ex.c4 * ipow(Real(p / (M * M)), m);
  sum += ex.ctilde * ipow(Real(p * p * p / (M * M)), m);
  ex.rescaled = sum.value();
  return ex;
}

/// Unrescaled E V_k(C_m), k in {0,1,2}, from the closed expansions. Valid for
/// every p in [0,1].
template <class Real>
Real ev_Vk_C_2d(const BasicModelParams<Real>& params, int m, int k) {
  detail::require_dimension(params, 2, "ev_Vk_C_2d");
  detail::require_level(m, 0, "ev_Vk_C_2d");
  detail::require_k(k, 2, "ev_Vk_C_2d");
  const Real M(params.M);
  const Real& p = params.p;
  if (k == 2) return Real(1) - ipow(p, m);
  if (k == 1) {
    // 2M(1-p) sum_{j<m} (Mp)^j - 2(M-1) sum_{n=1}^m (Mp)^{m-n} (1-p^n)^2
    CompensatedSum<Real> sum;
    const Real mp = M * p;
    for (int j = 0; j < m; ++j) sum += 2 * M * (1 - p) * ipow(mp, j);
    for (int n = 1; n <= m; ++n) {
      const Real miss = 1 - ipow(p, n);
      sum -= 2 * (M - 1) * ipow(mp, m - n) * miss * miss;
    }
    return sum.value();
  }
  return detail::complement_euler_expansion(params, m).expectation;
}

// ---------------------------------------------------------------------------
// Large-M limits

/// Pointwise M -> infinity limit of the rescaled Euler characteristic of F.
template <class Real>
Real largeM_v(const Real& p) {
  return 1 - 4 * p + 4 * p * p - p * p * p;
}

/// Pointwise M -> infinity limit of minus the rescaled Euler characteristic of C.
template <class Real>
Real largeM_vc(const Real& p) {
  return p * p * p - 2 * p + 1;
}

/// Rescaling factor r^{n(D-k)} = (M^d p)^{-n} M^{nk}.
template <class Real>
Real rescale_factor(const BasicModelParams<Real>& params, int n, int k) {
  const Real md = ipow(Real(params.M), params.d);
  return ipow(Real(md * params.p), -n) * ipow(Real(params.M), n * k);
}

}  // namespace fracperc::analytic
