#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace fracperc {

/// Running mean and sum of squared deviations (Welford), mergeable with
/// Chan's pairwise update.
class McEstimate {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const McEstimate& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double n1 = static_cast<double>(count_);
    const double n2 = static_cast<double>(other.count_);
    const double total = n1 + n2;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n2 / total;
    m2_ += other.m2_ + delta * delta * n1 * n2 / total;
    count_ += other.count_;
  }

  [[nodiscard]] std::uint64_t count() const { return count_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double m2() const { return m2_; }

  /// Unbiased sample variance; NaN below two samples.
  [[nodiscard]] double variance() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(count_ - 1);
  }

  /// Standard error of the mean, sqrt(M2 / (n (n - 1))).
  [[nodiscard]] double standard_error() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(variance() / static_cast<double>(count_));
  }

  static McEstimate from_moments(std::uint64_t count, double mean, double m2) {
    McEstimate out;
    out.count_ = count;
    out.mean_ = mean;
    out.m2_ = m2;
    return out;
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace fracperc
