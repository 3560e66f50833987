#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library code paths they check.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

// erfc(z) for z >= 0: positive-term series for erf below 2.5, Lentz continued fraction above.
inline double erfc_nonneg(double z) {
  if (z < 2.5) {
    double term = z, sum = z;
    for (int n = 1; n < 200; ++n) {
      term *= 2.0 * z * z / (2.0 * n + 1.0);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return 1.0 - 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z) * sum;
  }
  // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  const double tiny = 1e-300;
  double f = z, c = z, d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = n * 0.5;
    d = z + a * d;
    d = std::fabs(d) < tiny ? tiny : d;
    c = z + a / c;
    c = std::fabs(c) < tiny ? tiny : c;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-z * z) / std::sqrt(std::numbers::pi) / f;
}

// Lower-tail standard normal probability for x <= 0.
inline double lower_tail(double x) { return 0.5 * erfc_nonneg(-x / std::numbers::sqrt2); }

// Standard normal quantile by bisection on the series CDF. For p > 0.5 the
// exact complement 1 - p is inverted in the lower tail.
inline double normal_quantile(double p) {
  if (p > 0.5) return -normal_quantile(1.0 - p);
  double lo = -40.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lower_tail(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Brute-force Mann-Whitney over all positive/negative pairs.
inline double pair_auroc(std::span<const double> s, std::span<const int> y) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        credit += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return credit / pairs;
}

}  // namespace oracle
