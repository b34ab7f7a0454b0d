#pragma once

// Self-verification groups: formulas against exhaustive enumeration, closed
// form identities, Monte Carlo agreement, threshold proxies, convergence
// rate, geometry duality, large-M limits, determinism and merge invariance.
// Each group returns named checks with their worst residual.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"
#include "fracperc/geometry.hpp"
#include "fracperc/montecarlo.hpp"
#include "fracperc/oracle.hpp"
#include "fracperc/rng.hpp"
#include "fracperc/sampler.hpp"
#include "fracperc/thresholds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace fracperc::verify {

using analytic::Configuration;
using analytic::Target;

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

struct GroupReport {
  int id = 0;
  std::string name;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  [[nodiscard]] std::size_t failures() const {
    return std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; });
  }
};

/// Expectation formulas under test in group 1. Replacing an entry (for
/// instance with a perturbed copy) must make the group fail.
struct FormulaTable {
  std::function<Rational(const ExactParams&, int, int, Target)> ev_2d_exact;
  std::function<double(const ModelParams&, int, int, Target)> ev_2d_float;

  static FormulaTable reference() {
    FormulaTable t;
    t.ev_2d_exact = [](const ExactParams& P, int n, int k, Target target) {
      return target == Target::F ? analytic::ev_Vk_F_2d(P, n, k) : analytic::ev_Vk_C_2d(P, n, k);
    };
    t.ev_2d_float = [](const ModelParams& P, int n, int k, Target target) {
      return target == Target::F ? analytic::ev_Vk_F_2d(P, n, k) : analytic::ev_Vk_C_2d(P, n, k);
    };
    return t;
  }

  /// Negative control: E V_0(F_n) off by one part in 10^9.
  static FormulaTable tampered() {
    FormulaTable t = reference();
    auto exact = t.ev_2d_exact;
    auto approx = t.ev_2d_float;
    t.ev_2d_exact = [exact](const ExactParams& P, int n, int k, Target target) {
      Rational v = exact(P, n, k, target);
      if (k == 0 && target == Target::F) v *= Rational(1000000001, 1000000000);
      return v;
    };
    t.ev_2d_float = [approx](const ModelParams& P, int n, int k, Target target) {
      double v = approx(P, n, k, target);
      if (k == 0 && target == Target::F) v *= 1.000000001;
      return v;
    };
    return t;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 20240917;
  /// Replicates per Monte Carlo configuration (group 3).
  std::uint64_t mc_samples = 10000;
  /// Random lattices for the geometry duality (group 6).
  std::uint64_t geometry_grids = 10000;
  /// Replicates for the sharding check (group 8).
  std::uint64_t merge_samples = 10000;
  unsigned workers = 0;
  FormulaTable formulas = FormulaTable::reference();
};

namespace detail {

inline std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

/// Relative error, or absolute error when the reference is zero.
inline double relative_error(double value, double reference) {
  const double diff = std::abs(value - reference);
  return reference == 0.0 ? diff : diff / std::abs(reference);
}

class Timer {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Collects exact and float comparisons for one named family.
class Family {
 public:
  Family(std::string name, double float_tolerance)
      : name_(std::move(name)), tolerance_(float_tolerance) {}

  void compare(const std::string& instance, const Rational& formula, const Rational& oracle,
               double formula_float) {
    ++count_;
    const double reference = to_double(oracle);
    const double err = relative_error(formula_float, reference);
    worst_ = std::max(worst_, err);
    if (formula != oracle) {
      ok_ = false;
      if (first_failure_.empty()) {
        first_failure_ = instance + ": formula " + to_string(formula) + " vs enumeration " +
                         to_string(oracle);
      }
    }
    if (!(err <= tolerance_)) {
      ok_ = false;
      if (first_failure_.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << instance << ": float " << formula_float << " vs " << reference;
        first_failure_ = os.str();
      }
    }
  }

  [[nodiscard]] CheckResult result() const {
    std::ostringstream os;
    os << count_ << " instances, max float rel err " << worst_;
    if (!first_failure_.empty()) os << "; first failure " << first_failure_;
    return {name_, ok_ && count_ > 0, worst_, os.str()};
  }

 private:
  std::string name_;
  double tolerance_;
  bool ok_ = true;
  int count_ = 0;
  double worst_ = 0.0;
  std::string first_failure_;
};

inline std::string instance_name(int M, int n, const Rational& p) {
  return "M=" + std::to_string(M) + " n=" + std::to_string(n) + " p=" + to_string(p);
}

}  // namespace detail

/// Exact p values used by group 1.
inline std::vector<Rational> oracle_p_values() {
  return {Rational(1, 5), Rational(1, 2), Rational(4, 5)};
}

// ---------------------------------------------------------------------------
// 1. Formulas against exhaustive enumeration

inline GroupReport check_oracle_equivalence(const VerifyOptions& options = {}) {
  detail::Timer timer;
  GroupReport report{1, "formula-oracle equivalence", {}, 0.0};
  constexpr double tol = 1e-12;
  using oracle::Functional1D;
  using oracle::Query1D;

  detail::Family k_v0("1D E V0(K_n)", tol), k_v1("1D E V1(K_n)", tol);
  detail::Family kk_v0("1D E V0(K∩K)", tol), kk_v1("1D E V1(K∩K)", tol);
  detail::Family kk_n("1D E N(K∩K)", tol);
  detail::Family d_v0("1D E V0(D_n)", tol), d_v1("1D E V1(D_n)", tol);
  detail::Family dd_v0("1D E V0(D∩D)", tol), dd_v1("1D E V1(D∩D)", tol);
  for (auto [M, n] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
    const auto dist = oracle::enumerate_outcomes(M, n, 1);
    for (const auto& p : oracle_p_values()) {
      const ExactParams P{M, p, 1};
      const ModelParams Pf{M, to_double(p), 1};
      const auto name = detail::instance_name(M, n, p);
      auto run = [&](detail::Family& fam, const Rational& exact, double approx, Query1D q) {
        fam.compare(name, exact, oracle::enumerate_1d(dist, p, q), approx);
      };
      run(k_v0, analytic::ev_Vk_1d(P, n, 0), analytic::ev_Vk_1d(Pf, n, 0),
          {Functional1D::V0, Target::F, false});
      run(k_v1, analytic::ev_Vk_1d(P, n, 1), analytic::ev_Vk_1d(Pf, n, 1),
          {Functional1D::V1, Target::F, false});
      run(kk_v0, analytic::ev_Vk_intersect_1d(P, n, 0), analytic::ev_Vk_intersect_1d(Pf, n, 0),
          {Functional1D::V0, Target::F, true});
      run(kk_v1, analytic::ev_Vk_intersect_1d(P, n, 1), analytic::ev_Vk_intersect_1d(Pf, n, 1),
          {Functional1D::V1, Target::F, true});
      run(kk_n, analytic::ev_N_isolated_1d(P, n), analytic::ev_N_isolated_1d(Pf, n),
          {Functional1D::isolated_points, Target::F, true});
      run(d_v0, analytic::ev_Vk_complement_1d(P, n, 0, false),
          analytic::ev_Vk_complement_1d(Pf, n, 0, false), {Functional1D::V0, Target::C, false});
      run(d_v1, analytic::ev_Vk_complement_1d(P, n, 1, false),
          analytic::ev_Vk_complement_1d(Pf, n, 1, false), {Functional1D::V1, Target::C, false});
      run(dd_v0, analytic::ev_Vk_complement_1d(P, n, 0, true),
          analytic::ev_Vk_complement_1d(Pf, n, 0, true), {Functional1D::V0, Target::C, true});
      run(dd_v1, analytic::ev_Vk_complement_1d(P, n, 1, true),
          analytic::ev_Vk_complement_1d(Pf, n, 1, true), {Functional1D::V1, Target::C, true});
    }
  }

  std::vector<detail::Family> f_fam, c_fam;
  for (int k = 0; k <= 2; ++k) {
    f_fam.emplace_back("2D E V" + std::to_string(k) + "(F_n)", tol);
    c_fam.emplace_back("2D E V" + std::to_string(k) + "(C_n)", tol);
  }
  detail::Family f_rescaled("2D E V0(F_n) from the rescaled expansion", tol);
  detail::Family c_rescaled("2D E V0(C_m) from the rescaled expansion", tol);
  detail::Family terms_f("2D per-level intersection terms of F", tol);
  detail::Family terms_c("2D per-level intersection terms of C", tol);
  for (auto [M, n] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {3, 1}}) {
    const auto dist = oracle::enumerate_outcomes(M, n, 2);
    for (const auto& p : oracle_p_values()) {
      const ExactParams P{M, p, 2};
      const ModelParams Pf{M, to_double(p), 2};
      const auto name = detail::instance_name(M, n, p);
      for (int k = 0; k <= 2; ++k) {
        for (Target target : {Target::F, Target::C}) {
          auto& fam = target == Target::F ? f_fam[k] : c_fam[k];
          fam.compare(name, options.formulas.ev_2d_exact(P, n, k, target),
                      oracle::enumerate_2d(dist, p, k, target),
                      options.formulas.ev_2d_float(Pf, n, k, target));
        }
      }
      if (P.non_empty_regime()) {
        // Unrescale the rescaled finite-n values: multiply by (M^2 p)^n.
        const Rational growth = ipow(Rational(M * M) * p, n);
        const double growth_f = std::pow(M * M * Pf.p, n);
        f_rescaled.compare(name, analytic::vbar0_2d_finite(P, n) * growth,
                           oracle::enumerate_2d(dist, p, 0, Target::F),
                           analytic::vbar0_2d_finite(Pf, n) * growth_f);
        c_rescaled.compare(name, analytic::vbarc0_2d_finite(P, n).rescaled * growth,
                           oracle::enumerate_2d(dist, p, 0, Target::C),
                           analytic::vbarc0_2d_finite(Pf, n).rescaled * growth_f);
      }
      for (auto config : {Configuration::side, Configuration::corner2, Configuration::corner3,
                          Configuration::corner4}) {
        for (int k = 0; k <= 1; ++k) {
          for (Target target : {Target::F, Target::C}) {
            auto& fam = target == Target::F ? terms_f : terms_c;
            fam.compare(name + " " + analytic::to_string(config) + " k=" + std::to_string(k),
                        analytic::intersection_series_terms_2d(P, config, n, k, target),
                        oracle::intersection_term_2d(dist, p, config, k, target),
                        analytic::intersection_series_terms_2d(Pf, config, n, k, target));
          }
        }
      }
    }
  }
  for (auto* fam : {&k_v0, &k_v1, &kk_v0, &kk_v1, &kk_n, &d_v0, &d_v1, &dd_v0, &dd_v1}) {
    report.checks.push_back(fam->result());
  }
  for (auto& fam : f_fam) report.checks.push_back(fam.result());
  for (auto& fam : c_fam) report.checks.push_back(fam.result());
  for (auto* fam : {&f_rescaled, &c_rescaled, &terms_f, &terms_c}) {
    report.checks.push_back(fam->result());
  }
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 2. Closed-form identities of the limits

inline GroupReport check_limit_identities(const VerifyOptions& options = {}) {
  detail::Timer timer;
  GroupReport report{2, "closed-form limit spot values", {}, 0.0};
  constexpr double tol = 1e-14;
  std::uint64_t counter = 0;
  NodeUniforms draw(options.seed, 2);
  auto uniform = [&] { return draw.uniform(0, counter++); };
  // Random exact p in (lower, 1]: p = lower + (1 - lower) * a / 2^20, a >= 1.
  auto random_p = [&](const Rational& lower) {
    const auto a = 1 + static_cast<std::int64_t>(uniform() * ((1 << 20) - 1));
    return lower + (1 - lower) * Rational(a, 1 << 20);
  };

  {
    CheckResult c{"V2 limit equals 1 for 100 random (M,p)", true, 0.0, ""};
    for (int i = 0; i < 100; ++i) {
      const int M = 2 + static_cast<int>(uniform() * 63);
      const Rational p = random_p(Rational(1, M * M));
      const Rational exact = analytic::limit_Vk_2d(ExactParams{M, p, 2}, 2);
      const double approx = analytic::limit_Vk_2d(ModelParams{M, to_double(p), 2}, 2);
      if (exact != 1 || approx != 1.0) c.passed = false;
      c.residual = std::max(c.residual, std::abs(approx - 1.0));
    }
    c.detail = "exact in both modes";
    report.checks.push_back(c);
  }
  {
    CheckResult c{"complement V1 limit equals V1 limit = 2M(1-p)/(M-p)", true, 0.0, ""};
    for (int i = 0; i < 100; ++i) {
      const int M = 2 + static_cast<int>(uniform() * 63);
      const Rational p = random_p(Rational(1, M));
      const ExactParams P{M, p, 2};
      const ModelParams Pf{M, to_double(p), 2};
      const Rational closed = 2 * M * (1 - p) / (M - p);
      if (analytic::limit_Vck_2d(P, 1) != closed || analytic::limit_Vk_2d(P, 1) != closed) {
        c.passed = false;
      }
      const double a = analytic::limit_Vck_2d(Pf, 1), b = analytic::limit_Vk_2d(Pf, 1);
      const double ref = to_double(closed);
      c.residual = std::max({c.residual, std::abs(a - b), std::abs(a - ref), std::abs(b - ref)});
    }
    c.passed = c.passed && c.residual <= tol;
    c.detail = "exact identity in rational mode; max float diff " + detail::sci(c.residual);
    report.checks.push_back(c);
  }
  {
    CheckResult c{"1D complement V0 limit equals V0 limit = M(1-p)/(M-p)", true, 0.0, ""};
    for (int i = 0; i < 100; ++i) {
      const int M = 2 + static_cast<int>(uniform() * 63);
      const Rational p = random_p(Rational(1, M));
      const ExactParams P{M, p, 1};
      const ModelParams Pf{M, to_double(p), 1};
      const Rational closed = M * (1 - p) / (M - p);
      if (analytic::limit_Vck_1d(P, 0) != closed || analytic::limit_Vk_1d(P, 0) != closed) {
        c.passed = false;
      }
      const double a = analytic::limit_Vck_1d(Pf, 0), b = analytic::limit_Vk_1d(Pf, 0);
      const double ref = to_double(closed);
      c.residual = std::max({c.residual, std::abs(a - b), std::abs(a - ref), std::abs(b - ref)});
    }
    c.passed = c.passed && c.residual <= tol;
    c.detail = "exact identity in rational mode; max float diff " + detail::sci(c.residual);
    report.checks.push_back(c);
  }
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 3. Monte Carlo against the finite-n formulas

struct McCase {
  int M;
  int n;
  double p;
};

inline std::vector<McCase> monte_carlo_grid() {
  return {{2, 4, 0.3}, {2, 4, 0.6}, {2, 4, 0.9}, {2, 8, 0.3},
          {2, 8, 0.6}, {2, 8, 0.9}, {3, 4, 0.5}, {3, 4, 0.9}};
}

inline GroupReport check_monte_carlo(const VerifyOptions& options = {},
                                     const std::vector<McCase>& cases = monte_carlo_grid()) {
  detail::Timer timer;
  GroupReport report{3, "Monte Carlo agreement", {}, 0.0};
  for (const auto& mc : cases) {
    montecarlo::ExperimentSpec spec;
    spec.params = make_params(mc.M, mc.p, 2);
    spec.n = mc.n;
    spec.samples = options.mc_samples;
    spec.seed = options.seed;
    spec.workers = options.workers;
    const auto result = montecarlo::run_experiment(spec);
    for (const auto& row : result.rows) {
      const int k = montecarlo::intrinsic_index(row.functional);
      const double reference = montecarlo::analytic_expectation(spec.params, mc.n, k, row.target);
      const double se = row.estimate.standard_error();
      const double z = std::abs(row.estimate.mean() - reference) / se;
      std::ostringstream name, detail;
      name << "M=" << mc.M << " n=" << mc.n << " p=" << mc.p << " "
           << montecarlo::to_string(row.functional) << "(" << analytic::to_string(row.target)
           << ")";
      detail.precision(10);
      detail << "mean " << row.estimate.mean() << " analytic " << reference << " stderr " << se
             << " |z| " << z << " samples " << row.estimate.count();
      report.checks.push_back({name.str(), z < 4.0, z, detail.str()});
    }
  }
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 4. Threshold proxies

inline GroupReport check_thresholds(const VerifyOptions& = {}) {
  detail::Timer timer;
  GroupReport report{4, "threshold proxies", {}, 0.0};
  using namespace thresholds;
  auto add = [&](std::string name, bool ok, double residual, std::string detail) {
    report.checks.push_back({std::move(name), ok, residual, std::move(detail)});
  };

  std::vector<int> Ms;
  for (int M = 2; M <= 64; ++M) Ms.push_back(M);
  Ms.push_back(1024);
  double worst_residual = 0.0;
  bool p0_bound = true, ordered = true;
  std::string p0_detail, order_detail;
  std::vector<ThresholdReport> reports;
  for (int M : Ms) {
    const auto r = threshold_report(M);
    reports.push_back(r);
    worst_residual = std::max({worst_residual, r.p0.residual, r.p1.residual});
    if (M >= 4 && M <= 64 && !(r.p0.root <= 0.556)) {
      p0_bound = false;
      p0_detail += " M=" + std::to_string(M) + ":" + std::to_string(r.p0.root);
    }
    if (!(r.p0.root < r.pmin.argmin)) {
      ordered = false;
      order_detail += " M=" + std::to_string(M);
    }
  }
  auto at = [&](int M) -> const ThresholdReport& {
    return *std::find_if(reports.begin(), reports.end(), [M](const auto& r) { return r.M == M; });
  };
  add("p0(M) <= 0.556 for M in 4..64", p0_bound, 0.0,
      p0_bound ? "max p0 = " + std::to_string(at(4).p0.root) : "violations" + p0_detail);
  add("p0(2) < 0.881", at(2).p0.root < 0.881, 0.0, "p0(2) = " + std::to_string(at(2).p0.root));
  add("p1(2) < 0.881", at(2).p1.root < 0.881, 0.0, "p1(2) = " + std::to_string(at(2).p1.root));
  add("p1(3) < 0.784", at(3).p1.root < 0.784, 0.0, "p1(3) = " + std::to_string(at(3).p1.root));
  add("p0(M) below the known lower bound for M in {2,3}",
      at(2).p0.root < at(2).known->lower && at(3).p0.root < at(3).known->lower, 0.0,
      "p0(2) = " + std::to_string(at(2).p0.root) + ", p0(3) = " + std::to_string(at(3).p0.root));
  add("p0 < pmin for M in 2..64 and 1024", ordered, 0.0,
      ordered ? "all ordered" : "violations" + order_detail);

  struct Limit {
    const char* name;
    double limit;
    std::function<double(const ThresholdReport&)> value;
  };
  const std::vector<Limit> limits{
      {"p0", p0_large_M_limit(), [](const auto& r) { return r.p0.root; }},
      {"p1", p1_large_M_limit(), [](const auto& r) { return r.p1.root; }},
      {"pmin", pmin_large_M_limit(), [](const auto& r) { return r.pmin.argmin; }}};
  for (const auto& l : limits) {
    const double gap_large = std::abs(l.value(at(1024)) - l.limit);
    const double gap_small = std::abs(l.value(at(2)) - l.limit);
    add(std::string("|") + l.name + "(1024) - limit| < 0.05 and below the M=2 gap",
        gap_large < 0.05 && gap_large < gap_small, gap_large,
        "gap(1024) = " + detail::sci(gap_large) + ", gap(2) = " + detail::sci(gap_small));
  }
  {
    std::ostringstream os;
    os << "max residual " << worst_residual;
    add("root residuals < 1e-10", worst_residual < 1e-10, worst_residual, os.str());
  }
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 5. Convergence rate of the rescaled Euler characteristic

/// Smallest n0 <= n_max such that vbar0(n) is strictly decreasing on
/// [n0, n_max], computed exactly.
inline int observed_decrease_start(const ExactParams& P, int n_max) {
  std::vector<Rational> v;
  for (int n = 1; n <= n_max; ++n) v.push_back(analytic::vbar0_2d_finite(P, n));
  int n0 = n_max;
  for (int n = n_max - 1; n >= 1; --n) {
    if (v[n] < v[n - 1]) {
      n0 = n;
    } else {
      break;
    }
  }
  return n0;
}

inline GroupReport check_convergence_rate(const VerifyOptions& = {}) {
  detail::Timer timer;
  GroupReport report{5, "convergence rate", {}, 0.0};
  const std::vector<std::pair<int, Rational>> cases{{2, Rational(3, 5)}, {3, Rational(4, 5)}};
  for (const auto& [M, p] : cases) {
    const ExactParams P{M, p, 2};
    const ModelParams Pf{M, to_double(p), 2};
    const int n = 40;
    const double c = analytic::vbar0_2d_rate_constant(Pf);
    const double ratio_float =
        analytic::vbar0_2d_deviation(Pf, n) / (c * std::pow(Pf.p / M, n));
    const Rational ratio_exact =
        (analytic::vbar0_2d_finite(P, n) - analytic::limit_Vk_2d(P, 0)) /
        (analytic::vbar0_2d_rate_constant(P) * ipow(Rational(p / M), n));
    const double r_exact = to_double(ratio_exact);
    std::ostringstream name, detail;
    name << "ratio at n=40 for M=" << M << " p=" << Pf.p;
    detail.precision(15);
    detail << "float " << ratio_float << ", exact " << r_exact << ", c = " << c;
    const bool ok = ratio_float >= 0.95 && ratio_float <= 1.05 && r_exact >= 0.95 &&
                    r_exact <= 1.05;
    report.checks.push_back({name.str(), ok, std::abs(ratio_float - 1.0), detail.str()});

    const int n0 = observed_decrease_start(P, 60);
    report.checks.push_back({"strict decrease from n0 <= 20 for M=" + std::to_string(M) +
                                 " p=" + to_string(p),
                             n0 <= 20, static_cast<double>(n0),
                             "observed n0 = " + std::to_string(n0) + " (checked up to n = 60)"});
  }
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 6. Geometry engine duality

inline BitGrid random_grid(std::int64_t side, double density, const NodeUniforms& u) {
  BitGrid grid(side, side);
  for (std::int64_t y = 0; y < side; ++y) {
    for (std::int64_t x = 0; x < side; ++x) {
      if (u.uniform(1, static_cast<std::uint64_t>(y * side + x)) < density) grid.set(x, y);
    }
  }
  return grid;
}

inline GroupReport check_geometry_duality(const VerifyOptions& options = {}) {
  detail::Timer timer;
  GroupReport report{6, "geometry engine duality", {}, 0.0};
  const double densities[] = {0.2, 0.5, 0.8};
  std::uint64_t euler_bad = 0, counts_bad = 0, scaled_bad = 0;
  for (std::uint64_t i = 0; i < options.geometry_grids; ++i) {
    const NodeUniforms u(options.seed, 6'000'000 + i);
    const std::int64_t side = 8 + static_cast<std::int64_t>(u.uniform(0, 0) * 57);  // 8..64
    const double density = densities[i % 3];
    const BitGrid grid = random_grid(side, density, u);
    const double s = 1.0 / static_cast<double>(side);
    const auto fast = geometry::minkowski_2d(grid, s);
    const auto audit = geometry::minkowski_counts_direct(grid, s);
    if (fast.V0 != geometry::euler_crosscheck(grid)) ++euler_bad;
    if (!(fast == audit)) ++counts_bad;
    if (fast.V1 != s * static_cast<double>(2 * audit.faces - audit.edges_shared) ||
        fast.V2 != s * s * static_cast<double>(audit.faces)) {
      ++scaled_bad;
    }
  }
  const std::string total = " of " + std::to_string(options.geometry_grids) + " grids";
  report.checks.push_back({"lookup V0 equals components minus holes", euler_bad == 0,
                           static_cast<double>(euler_bad), std::to_string(euler_bad) +
                           " mismatches" + total});
  report.checks.push_back({"lookup counts equal direct counts", counts_bad == 0,
                           static_cast<double>(counts_bad), std::to_string(counts_bad) +
                           " mismatches" + total});
  report.checks.push_back({"V1 and V2 equal the counting formulas", scaled_bad == 0,
                           static_cast<double>(scaled_bad), std::to_string(scaled_bad) +
                           " mismatches" + total});
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 7. Large-M pointwise limits

inline GroupReport check_large_M(const VerifyOptions& = {}) {
  detail::Timer timer;
  GroupReport report{7, "large-M pointwise limits", {}, 0.0};
  const int M = 1000000;
  double worst_v = 0.0, worst_vc = 0.0;
  for (int i = 5; i <= 99; ++i) {
    const double p = i / 100.0;
    const ModelParams P{M, p, 2};
    worst_v = std::max(worst_v, std::abs(analytic::limit_Vk_2d(P, 0) - analytic::largeM_v(p)));
    worst_vc =
        std::max(worst_vc, std::abs(-analytic::limit_Vck_2d(P, 0) - analytic::largeM_vc(p)));
  }
  report.checks.push_back({"|V0 limit(M=1e6) - v(p)| < 1e-4", worst_v < 1e-4, worst_v,
                           "max over p = 0.05..0.99: " + detail::sci(worst_v)});
  report.checks.push_back({"|-V0c limit(M=1e6) - vc(p)| < 1e-4", worst_vc < 1e-4, worst_vc,
                           "max over p = 0.05..0.99: " + detail::sci(worst_vc)});
  report.seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 8. Determinism and merge invariance

inline GroupReport check_determinism(const VerifyOptions& options = {}) {
  detail::Timer timer;
  GroupReport report{8, "determinism and merge invariance", {}, 0.0};
  {
    bool same = true;
    int grids = 0;
    for (auto [M, n, p, d] : std::vector<std::tuple<int, int, double, int>>{
             {2, 8, 0.7, 2}, {3, 5, 0.7, 2}, {4, 4, 0.5, 2}, {2, 12, 0.8, 1}}) {
      for (std::uint64_t idx = 0; idx < 8; ++idx) {
        const auto a = sample(make_params(M, p, d), n, options.seed, idx);
        const auto b = sample(make_params(M, p, d), n, options.seed, idx);
        same = same && a.grid == b.grid;
        ++grids;
      }
    }
    report.checks.push_back({"equal seeds give bit-identical grids", same, same ? 0.0 : 1.0,
                             std::to_string(grids) + " pairs compared"});
  }
  {
    montecarlo::ExperimentSpec spec;
    spec.params = make_params(2, 0.7, 2);
    spec.n = 5;
    spec.samples = options.merge_samples;
    spec.seed = options.seed;
    spec.workers = options.workers;
    spec.functionals = {montecarlo::Functional::V0, montecarlo::Functional::V1,
                        montecarlo::Functional::V2, montecarlo::Functional::span_horizontal};
    std::vector<montecarlo::ExperimentResult> results;
    for (std::uint64_t shards : {1, 8, 64}) {
      spec.shards = shards;
      results.push_back(montecarlo::run_experiment(spec));
    }
    double worst = 0.0;
    for (std::size_t r = 1; r < results.size(); ++r) {
      for (std::size_t i = 0; i < results[0].rows.size(); ++i) {
        const double a = results[0].rows[i].estimate.mean();
        const double b = results[r].rows[i].estimate.mean();
        worst = std::max(worst, detail::relative_error(b, a));
        if (results[r].rows[i].estimate.count() != results[0].rows[i].estimate.count()) {
          worst = std::max(worst, 1.0);
        }
      }
    }
    std::ostringstream os;
    os << "max relative difference of means across 1/8/64 shards: " << worst;
    report.checks.push_back({"means invariant under sharding", worst <= 1e-12, worst, os.str()});

    // Same shard plan, different worker counts: bit-identical.
    spec.shards = 16;
    spec.workers = 1;
    const auto one = montecarlo::run_experiment(spec);
    spec.workers = 4;
    const auto four = montecarlo::run_experiment(spec);
    bool identical = true;
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
      identical = identical && one.rows[i].estimate.mean() == four.rows[i].estimate.mean() &&
                  one.rows[i].estimate.m2() == four.rows[i].estimate.m2();
    }
    report.checks.push_back({"results independent of the worker count", identical,
                             identical ? 0.0 : 1.0, "16 shards on 1 and 4 workers"});
  }
  report.seconds = timer.seconds();
  return report;
}

inline std::vector<GroupReport> run_all(const VerifyOptions& options = {}) {
  return {check_oracle_equivalence(options), check_limit_identities(options),
          check_monte_carlo(options),        check_thresholds(options),
          check_convergence_rate(options),   check_geometry_duality(options),
          check_large_M(options),            check_determinism(options)};
}

}  // namespace fracperc::verify
