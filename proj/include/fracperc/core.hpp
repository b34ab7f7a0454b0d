#pragma once

// Shared vocabulary for the fractal percolation toolkit: model parameters,
// error types and a few numeric helpers that work for both double and the
// exact rational type.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace fracperc {

using Rational = boost::multiprecision::cpp_rational;

/// Raised when a formula is queried outside the parameter range on which it holds.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a realization would not fit the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exhaustive enumeration is requested beyond its envelope.
class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class Real>
struct BasicModelParams {
  int M = 2;
  Real p = Real(1);
  int d = 2;

  /// M^d p > 1: F is nonempty with positive probability and the rescaled
  /// limits exist.
  [[nodiscard]] bool non_empty_regime() const {
    Real md = 1;
    for (int i = 0; i < d; ++i) md *= M;
    return md * p > Real(1);
  }

  void validate() const {
    if (M < 2) throw std::invalid_argument("M must be >= 2");
    if (d != 1 && d != 2) throw std::invalid_argument("d must be 1 or 2");
    if (p < Real(0) || p > Real(1)) throw std::invalid_argument("p must lie in [0,1]");
  }
};

using ModelParams = BasicModelParams<double>;
using ExactParams = BasicModelParams<Rational>;

inline ModelParams make_params(int M, double p, int d = 2) {
  ModelParams params{M, p, d};
  params.validate();
  return params;
}

inline ExactParams make_exact_params(int M, const Rational& p, int d = 2) {
  ExactParams params{M, p, d};
  params.validate();
  return params;
}

/// Integer power; negative exponents invert.
template <class Real>
Real ipow(Real base, int exponent) {
  if (exponent < 0) return Real(1) / ipow(base, -exponent);
  Real result(1);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

/// Neumaier-compensated accumulator. For exact types the compensation term
/// stays zero and this reduces to plain addition.
template <class Real>
class CompensatedSum {
 public:
  CompensatedSum& operator+=(const Real& x) {
    if constexpr (std::is_floating_point_v<Real>) {
      const Real t = sum_ + x;
      if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
      sum_ = t;
    } else {
      sum_ += x;
    }
    return *this;
  }
  CompensatedSum& operator-=(const Real& x) { return *this += Real(-x); }
  [[nodiscard]] Real value() const { return sum_ + comp_; }

 private:
  Real sum_{0};
  Real comp_{0};
};

template <class Real>
double to_double(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<double>(x);
  } else {
    return x.template convert_to<double>();
  }
}

inline std::string to_string(const Rational& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

/// Intrinsic volumes of the unit cube, q_{d,k} = binom(d,k) from the Steiner
/// formula of [0,1]^d.
inline int unit_cube_volume(int d, int k) {
  if (d == 1 && (k == 0 || k == 1)) return 1;
  if (d == 2) {
    if (k == 0 || k == 2) return 1;
    if (k == 1) return 2;
  }
  throw std::invalid_argument("unit_cube_volume: unsupported (d, k)");
}

}  // namespace fracperc
