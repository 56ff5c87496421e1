#pragma once

#include <cmath>
#include <limits>

namespace efcp {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

/// x log p with the convention 0 log 0 = 0.
inline double xlogy(double x, double p) noexcept {
  if (x == 0.0) return 0.0;
  return p > 0.0 ? x * std::log(p) : kNegInfinity;
}

inline double log_binomial_coefficient(int n, int r) noexcept {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

/// log P(Bin(n, p) = x).
inline double log_binomial_pmf(int n, int x, double p) noexcept {
  if (x < 0 || x > n) return kNegInfinity;
  return log_binomial_coefficient(n, x) + xlogy(x, p) + xlogy(n - x, 1.0 - p);
}

/// Positive part of exp(a) - exp(b), computed without forming huge values.
inline double positive_part_exp_diff(double a, double b) noexcept {
  if (!(a > b)) return 0.0;
  if (b == kNegInfinity) return std::exp(a);
  return std::exp(a) * -std::expm1(b - a);
}

}  // namespace efcp
