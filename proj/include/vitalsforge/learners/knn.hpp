#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vitalsforge/learners/dataset.hpp"

namespace vitalsforge::learners {

// Stores the (standardized) training set; scoring is the positive fraction
// among the k nearest rows by Euclidean distance, ties going to the lower row.
struct KnnState {
  std::size_t k = 5;
  Dataset train;
  std::vector<int> labels;

  double positive_fraction(std::span<const double> x) const {
    const std::size_t n = train.rows;
    const std::size_t kk = std::min(k, n);
    if (kk == 0) return 0.0;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = train.row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < train.cols; ++c) {
        const double diff = r[c] - x[c];
        s += diff * diff;
      }
      dist[i] = {s, i};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk - 1), dist.end());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < kk; ++i) positives += labels[dist[i].second] ? 1 : 0;
    return static_cast<double>(positives) / static_cast<double>(kk);
  }
  friend bool operator==(const KnnState&, const KnnState&) = default;
};

inline KnnState fit_knn(Dataset train, std::span<const int> y, std::size_t k) {
  if (y.size() != train.rows) throw std::invalid_argument("fit_knn: label count mismatch");
  if (k == 0) throw std::invalid_argument("fit_knn: k must be positive");
  if (k > train.rows) throw std::invalid_argument("fit_knn: k exceeds the number of training rows");
  KnnState s;
  s.k = k;
  s.train = std::move(train);
  s.labels.assign(y.begin(), y.end());
  return s;
}

}  // namespace vitalsforge::learners
