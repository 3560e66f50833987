#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vitalsforge::evaluation {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] != 0, a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (p) ++c.fp;
    else if (a) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline constexpr double kWilsonZ = 1.959963984540054;

struct Proportion {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
};

// Wilson score interval; bounds are exact at 0 and n successes.
inline Proportion wilson(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ) {
  if (trials == 0) throw std::invalid_argument("wilson: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Proportion out{p, std::clamp(center - half, 0.0, 1.0), std::clamp(center + half, 0.0, 1.0), successes, trials};
  if (successes == 0) out.lower = 0.0;
  if (successes == trials) out.upper = 1.0;
  return out;
}

// A metric whose denominator is zero is absent rather than 0.
struct ClassificationMetrics {
  std::optional<Proportion> accuracy;
  std::optional<Proportion> sensitivity;
  std::optional<Proportion> specificity;
  std::optional<Proportion> ppv;
  std::optional<Proportion> npv;
};

inline ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  auto maybe = [](std::uint64_t x, std::uint64_t n) -> std::optional<Proportion> {
    if (n == 0) return std::nullopt;
    return wilson(x, n);
  };
  return {maybe(c.tp + c.tn, c.total()), maybe(c.tp, c.tp + c.fn), maybe(c.tn, c.tn + c.fp),
          maybe(c.tp, c.tp + c.fp), maybe(c.tn, c.tn + c.fn)};
}

namespace detail {

inline void check_binary_inputs(std::span<const double> scores, std::span<const int> labels, const char* who) {
  if (scores.size() != labels.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument(std::string(who) + ": labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  if (pos == 0 || pos == labels.size())
    throw std::invalid_argument(std::string(who) + ": both classes must be present");
}

// Row order by ascending score; ties keep row order.
inline std::vector<std::size_t> ascending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace detail

// Mann-Whitney statistic with half credit for tied positive/negative pairs.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  detail::check_binary_inputs(scores, labels, "auroc");
  const auto order = detail::ascending_order(scores);
  // Twice the pair credit, kept integral so the result is exact up to the final division.
  std::uint64_t twice_credit = 0, neg_below = 0, pos_total = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    std::uint64_t pos = 0, neg = 0;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (labels[order[e]] ? pos : neg) += 1;
      ++e;
    }
    twice_credit += pos * (2 * neg_below + neg);
    neg_below += neg;
    pos_total += pos;
    g = e;
  }
  return static_cast<double>(twice_credit) / (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_below));
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// One point per distinct score, descending thresholds, from (0,0) to (1,1).
inline std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  detail::check_binary_inputs(scores, labels, "roc_points");
  auto order = detail::ascending_order(scores);
  std::reverse(order.begin(), order.end());
  double pos_total = 0, neg_total = 0;
  for (int l : labels) (l ? pos_total : neg_total) += 1;
  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (labels[order[e]] ? tp : fp) += 1;
      ++e;
    }
    pts.push_back({static_cast<double>(fp) / neg_total, static_cast<double>(tp) / pos_total});
    g = e;
  }
  return pts;
}

inline double trapezoid_area(std::span<const RocPoint> pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
  return area;
}

struct CalibrationBin {
  double mean_predicted = 0.0;
  double fraction_positive = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over [0, 1]; p = 1 falls in the last bin; empty bins are omitted.
inline std::vector<CalibrationBin> calibration_curve(std::span<const double> probabilities, std::span<const int> labels,
                                                     std::size_t n_bins = 10) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("calibration_curve: length mismatch");
  if (n_bins == 0) throw std::invalid_argument("calibration_curve: n_bins must be positive");
  std::vector<double> sum_p(n_bins, 0.0);
  std::vector<std::size_t> pos(n_bins, 0), count(n_bins, 0);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("calibration_curve: probability outside [0, 1]");
    const auto b = std::min(static_cast<std::size_t>(p * static_cast<double>(n_bins)), n_bins - 1);
    sum_p[b] += p;
    pos[b] += labels[i] ? 1 : 0;
    ++count[b];
  }
  std::vector<CalibrationBin> out;
  for (std::size_t b = 0; b < n_bins; ++b)
    if (count[b] > 0) {
      const double n = static_cast<double>(count[b]);
      out.push_back({sum_p[b] / n, static_cast<double>(pos[b]) / n, count[b]});
    }
  return out;
}

struct CalibrationFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Logistic regression of the outcome on logit(p), p clipped to [1e-6, 1 - 1e-6].
// Absent when the fit is undefined (one class, constant scores, or divergence).
inline std::optional<CalibrationFit> calibration_fit(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("calibration_fit: length mismatch");
  const std::size_t n = probabilities.size();
  std::vector<double> z(n);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(probabilities[i], 1e-6, 1.0 - 1e-6);
    z[i] = std::log(p / (1.0 - p));
    pos += labels[i] ? 1 : 0;
  }
  if (pos == 0 || pos == n) return std::nullopt;
  if (std::all_of(z.begin(), z.end(), [&](double v) { return v == z[0]; })) return std::nullopt;

  auto loss = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = a + b * z[i];
      s += (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))) - (labels[i] ? t : 0.0);
    }
    return s;
  };
  double a = 0.0, b = 1.0, current = loss(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = a + b * z[i];
      const double p = t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
      const double r = p - (labels[i] ? 1.0 : 0.0), w = p * (1.0 - p);
      ga += r;
      gb += r * z[i];
      haa += w;
      hab += w * z[i];
      hbb += w * z[i] * z[i];
    }
    if (std::hypot(ga, gb) < 1e-9 * static_cast<double>(n)) break;
    const double det = haa * hbb - hab * hab;
    if (!(det > 0.0)) return std::nullopt;
    double da = -(hbb * ga - hab * gb) / det, db = -(haa * gb - hab * ga) / det;
    double step = 1.0, next = loss(a + da, b + db);
    while (next > current && step > 1e-10) {
      step *= 0.5;
      next = loss(a + step * da, b + step * db);
    }
    if (next > current) break;
    a += step * da;
    b += step * db;
    current = next;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) return std::nullopt;
  return CalibrationFit{b, a};
}

struct RegressionErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

inline RegressionErrors regression_errors(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("regression_errors: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("regression_errors: empty input");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    abs_sum += std::fabs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(predictions.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

}  // namespace vitalsforge::evaluation
