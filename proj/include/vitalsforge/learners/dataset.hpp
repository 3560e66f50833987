#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace vitalsforge::learners {

// Dense row-major design matrix owned by the learners.
struct Dataset {
  std::vector<double> x;
  std::size_t rows = 0;
  std::size_t cols = 0;

  Dataset() = default;
  Dataset(std::size_t r, std::size_t c) : x(r * c, 0.0), rows(r), cols(c) {}

  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {x.data() + i * cols, cols}; }
  double operator()(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return x[r * cols + c]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Per-column z-scoring fitted on training rows. Constant columns keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& d) {
    Standardizer s;
    s.mean.assign(d.cols, 0.0);
    s.scale.assign(d.cols, 1.0);
    if (d.rows == 0) return s;
    for (std::size_t c = 0; c < d.cols; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < d.rows; ++r) sum += d(r, c);
      const double m = sum / static_cast<double>(d.rows);
      double ss = 0.0;
      for (std::size_t r = 0; r < d.rows; ++r) ss += (d(r, c) - m) * (d(r, c) - m);
      const double sd = std::sqrt(ss / static_cast<double>(d.rows));
      s.mean[c] = m;
      s.scale[c] = sd > 1e-12 * std::max(1.0, std::fabs(m)) ? sd : 1.0;
    }
    return s;
  }

  Dataset apply(const Dataset& d) const {
    if (d.cols != mean.size()) throw std::invalid_argument("standardizer: column count mismatch");
    Dataset out = d;
    for (std::size_t r = 0; r < d.rows; ++r)
      for (std::size_t c = 0; c < d.cols; ++c) out(r, c) = (d(r, c) - mean[c]) / scale[c];
    return out;
  }

  bool empty() const noexcept { return mean.empty(); }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace vitalsforge::learners
