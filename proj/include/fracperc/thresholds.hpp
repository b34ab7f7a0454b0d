#pragma once

// Characteristic parameters of the limit curves: the zero p0 of the rescaled
// Euler characteristic of F, its minimiser pmin, and the zero p1 of the
// complement curve. All searches run on the closed-form limits.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracperc::thresholds {

/// Margin kept from the open domain endpoints 1/M^2 and 1.
inline constexpr double kDomainMargin = 1e-9;

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double width() const { return hi - lo; }
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;  ///< |f(root)|
  Bracket bracket;
  int iterations = 0;
};

struct MinimumResult {
  double argmin = 0.0;
  double value = 0.0;
  Bracket bracket;
  int iterations = 0;
};

struct KnownBounds {
  double lower = 0.0;
  double upper = 1.0;
};

struct ThresholdReport {
  int M = 2;
  RootResult p0;
  MinimumResult pmin;
  RootResult p1;
  std::optional<KnownBounds> known;
};

inline double vbar0_limit(int M, double p) {
  return analytic::limit_Vk_2d(make_params(M, p, 2), 0);
}

/// -V̄ᶜ₀, positive below p1.
inline double minus_vbarc0_limit(int M, double p) {
  return -analytic::limit_Vck_2d(make_params(M, p, 2), 0);
}

inline Bracket search_domain(int M) {
  if (M < 2) throw std::invalid_argument("thresholds: M must be >= 2");
  const double m = static_cast<double>(M);
  return {1.0 / (m * m) + kDomainMargin, 1.0 - kDomainMargin};
}

/// Bisection for a root of f on `domain`, where f must be positive at the
/// left end and negative at the right end. Runs until the midpoint no longer
/// moves, so the final bracket is a few ulps wide.
inline RootResult bisect_decreasing(const std::function<double(double)>& f, Bracket domain,
                                    const std::string& what) {
  double lo = domain.lo, hi = domain.hi;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0 && fhi < 0.0)) {
    throw SearchError(what + ": no sign change on [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] (f = " + std::to_string(flo) + ", " +
                      std::to_string(fhi) + ")");
  }
  RootResult out;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    ++out.iterations;
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    (fm > 0.0 ? lo : hi) = mid;
  }
  const double flo_end = std::abs(f(lo)), fhi_end = std::abs(f(hi));
  out.root = flo_end <= fhi_end ? lo : hi;
  out.residual = std::min(flo_end, fhi_end);
  out.bracket = {lo, hi};
  return out;
}

/// Checks that the forward differences of f on an n-point grid change sign
/// at most once, from negative to positive.
inline void require_unimodal(const std::function<double(double)>& f, Bracket domain, int points,
                             const std::string& what) {
  const double step = domain.width() / (points - 1);
  double previous = f(domain.lo);
  int sign_changes = 0;
  int last_sign = 0;
  for (int i = 1; i < points; ++i) {
    const double value = f(domain.lo + step * i);
    const double diff = value - previous;
    previous = value;
    const int sign = diff > 0 ? 1 : diff < 0 ? -1 : 0;
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) {
      ++sign_changes;
      if (sign < 0) {
        throw SearchError(what + ": finite differences turn negative again near p = " +
                          std::to_string(domain.lo + step * i));
      }
    }
    last_sign = sign;
  }
  if (sign_changes > 1) {
    throw SearchError(what + ": " + std::to_string(sign_changes) +
                      " sign changes of the finite differences");
  }
}

/// Golden-section search for the minimum of a unimodal f down to `tolerance`.
inline MinimumResult golden_section(const std::function<double(double)>& f, Bracket domain,
                                    double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = domain.lo, b = domain.hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  MinimumResult out;
  while (b - a > tolerance) {
    ++out.iterations;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (out.iterations > 400) break;
  }
  out.argmin = 0.5 * (a + b);
  out.value = f(out.argmin);
  out.bracket = {a, b};
  return out;
}

inline RootResult find_p0(int M) {
  return bisect_decreasing([M](double p) { return vbar0_limit(M, p); }, search_domain(M),
                           "find_p0(M=" + std::to_string(M) + ")");
}

inline RootResult find_p1(int M) {
  return bisect_decreasing([M](double p) { return minus_vbarc0_limit(M, p); }, search_domain(M),
                           "find_p1(M=" + std::to_string(M) + ")");
}

inline MinimumResult find_pmin(int M, double tolerance = 1e-10) {
  const auto f = [M](double p) { return vbar0_limit(M, p); };
  const Bracket domain = search_domain(M);
  require_unimodal(f, domain, 1000, "find_pmin(M=" + std::to_string(M) + ")");
  return golden_section(f, domain, tolerance);
}

/// Published bounds on the percolation threshold p_c(M).
inline KnownBounds known_bounds(int M) {
  if (M < 2) throw std::invalid_argument("known_bounds: M must be >= 2");
  switch (M) {
    case 2: return {0.881, 0.993};
    case 3: return {0.784, 0.940};
    case 4: return {std::max(0.556, std::sqrt(0.25)), 0.972};
    default: return {std::max(std::sqrt(1.0 / M), 0.556), 0.9999};
  }
}

inline ThresholdReport threshold_report(int M) {
  ThresholdReport report;
  report.M = M;
  report.p0 = find_p0(M);
  report.pmin = find_pmin(M);
  report.p1 = find_p1(M);
  report.known = known_bounds(M);
  return report;
}

/// NNN and NN limits of p0 and p1, and the limit 2/3 of pmin.
inline double p0_large_M_limit() { return (3.0 - std::sqrt(5.0)) / 2.0; }
inline double p1_large_M_limit() { return (std::sqrt(5.0) - 1.0) / 2.0; }
inline double pmin_large_M_limit() { return 2.0 / 3.0; }

}  // namespace fracperc::thresholds
