#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "jpool/error.hpp"

namespace jpool {

// Kahan-compensated accumulator for fixed-width vectors. Pooling sums many
// near-cancelling terms; plain += loses a few digits we care about in tests.
class KahanSum {
public:
  explicit KahanSum(std::size_t width) : sum_(width, 0.0), carry_(width, 0.0) {}

  void add(std::span<const double> v) {
    require(v.size() == sum_.size(), Errc::size_mismatch,
            "KahanSum: width mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      double y = v[i] - carry_[i];
      double t = sum_[i] + y;
      carry_[i] = (t - sum_[i]) - y;
      sum_[i] = t;
    }
  }

  void add_scaled(std::span<const double> v, double a) {
    require(v.size() == sum_.size(), Errc::size_mismatch,
            "KahanSum: width mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      double y = v[i] * a - carry_[i];
      double t = sum_[i] + y;
      carry_[i] = (t - sum_[i]) - y;
      sum_[i] = t;
    }
  }

  const std::vector<double>& value() const { return sum_; }

private:
  std::vector<double> sum_;
  std::vector<double> carry_;
};

inline double linf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline double linf_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::size_mismatch, "linf_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

}  // namespace jpool
