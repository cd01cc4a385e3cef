#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace kss {

/// Welford mean/variance accumulator. `merge` uses the Chan et al. pairwise
/// update so chunked accumulation agrees with a single pass up to rounding.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double n = na + nb;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// A Monte Carlo estimate with its standard error.
struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

inline McEstimate to_estimate(const RunningStats& s) {
  return {s.mean(), s.std_error(), s.count()};
}

}  // namespace kss
