#pragma once

#include <boost/math/distributions/binomial.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace qsa {

/// Streaming central moments up to order four (Welford / Terriberry update).
class MomentAccumulator {
 public:
  void add(double x) {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  // Unbiased sample variance.
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  // Standard error of the sample variance: sqrt((m4 - (n-3)/(n-1) s^4) / n).
  double variance_standard_error() const {
    if (n_ < 4) return 0.0;
    const double n = static_cast<double>(n_);
    const double mu4 = m4_ / n;
    const double s2 = variance();
    const double v = (mu4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n;
    return v > 0.0 ? std::sqrt(v) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

inline MomentAccumulator moments(const std::vector<double>& xs) {
  MomentAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc;
}

struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double value() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
  // Binomial standard error at the observed frequency.
  double standard_error() const {
    if (!trials) return 0.0;
    const double f = value();
    return std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
  }
  // Standard error at a reference probability p.
  double standard_error_at(double p) const {
    return trials ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0;
  }
};

/// One-sided lower-tail binomial p-value P[Bin(n, p0) <= k].
inline double binomial_lower_p_value(std::size_t k, std::size_t n, double p0) {
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), p0);
  return boost::math::cdf(dist, static_cast<double>(k));
}

/// Tests H0: success probability >= p0 against p < p0. Passes unless H0 is
/// rejected at the given significance.
inline bool binomial_test_not_below(std::size_t k, std::size_t n, double p0, double alpha = 0.01) {
  return binomial_lower_p_value(k, n, p0) >= alpha;
}

/// Least-squares slope of y on x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = n * sxx - sx * sx;
  return d != 0.0 ? (n * sxy - sx * sy) / d : 0.0;
}

}  // namespace qsa
