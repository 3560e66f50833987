#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vitalsforge::stats {

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

// Sample mean and n-1 standard deviation; sd is 0 for a single value.
inline MeanSd sample_mean_sd(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sample_mean_sd: empty input");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

inline void require_positive_sigma(const NormalParams& p, const char* who) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu))
    throw std::invalid_argument(std::string(who) + ": sigma must be positive and finite");
}

inline double normal_pdf(double x, NormalParams p = {}) {
  require_positive_sigma(p, "normal_pdf");
  const double z = (x - p.mu) / p.sigma;
  return std::exp(-0.5 * z * z) / (p.sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, NormalParams p = {}) {
  require_positive_sigma(p, "normal_cdf");
  const double z = (x - p.mu) / p.sigma;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace detail {

// Wichura's AS241 (PPND16) rational approximations, ~1e-16 relative accuracy.
inline double standard_normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

}  // namespace detail

// Percent point function (inverse CDF) of N(mu, sigma^2).
inline double normal_ppf(double p, NormalParams params = {}) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_ppf: p must lie in (0, 1)");
  require_positive_sigma(params, "normal_ppf");
  return params.mu + params.sigma * detail::standard_normal_quantile(p);
}

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  double at(std::size_t i, std::size_t j) const { return values[i][j]; }
};

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

inline CorrelationMatrix pearson_matrix(std::span<const NamedColumn> columns) {
  const std::size_t k = columns.size();
  CorrelationMatrix out;
  if (k == 0) return out;
  const std::size_t n = columns.front().values.size();
  if (n < 2) throw std::invalid_argument("pearson_matrix: need at least two observations");

  std::vector<std::vector<double>> centered(k);
  std::vector<double> norms(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& col = columns[c];
    if (col.values.size() != n)
      throw std::invalid_argument("pearson_matrix: column '" + col.name + "' has mismatched length");
    const double mean = sample_mean_sd(col.values).mean;
    centered[c].resize(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      centered[c][i] = col.values[i] - mean;
      ss += centered[c][i] * centered[c][i];
    }
    if (!(ss > 0.0)) throw std::invalid_argument("pearson_matrix: column '" + col.name + "' has zero variance");
    norms[c] = std::sqrt(ss);
    out.names.push_back(col.name);
  }

  out.values.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += centered[a][i] * centered[b][i];
      double r = std::clamp(dot / (norms[a] * norms[b]), -1.0, 1.0);
      out.values[a][b] = out.values[b][a] = r;
    }
  }
  return out;
}

}  // namespace vitalsforge::stats
