#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vitalsforge/cohort.hpp"

namespace vitalsforge::evaluation {

struct SplitPlan {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  std::uint64_t seed = 0;
  double train_fraction = 0.75;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

namespace detail {

inline void shuffle(std::vector<std::size_t>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

// Test share rounds half up; the training set takes the rest.
inline std::size_t test_count(std::size_t n, double train_fraction) {
  const double t = std::floor((1.0 - train_fraction) * static_cast<double>(n) + 0.5);
  return std::min(static_cast<std::size_t>(t), n);
}

}  // namespace detail

// With `strata` given, each label group is split separately at the same fraction.
inline SplitPlan random_split(std::size_t n, double train_fraction, std::uint64_t seed,
                              std::optional<std::span<const int>> strata = std::nullopt) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("random_split: train_fraction must be in (0, 1)");
  if (n < 2) throw std::invalid_argument("random_split: need at least two rows");
  if (strata && strata->size() != n) throw std::invalid_argument("random_split: strata length mismatch");

  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = train_fraction;
  auto split_group = [&](std::vector<std::size_t> rows, std::uint64_t group_seed) {
    detail::shuffle(rows, group_seed);
    const std::size_t n_test = detail::test_count(rows.size(), train_fraction);
    plan.test.insert(plan.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    plan.train.insert(plan.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  };
  if (strata) {
    std::vector<std::size_t> zeros, ones;
    for (std::size_t i = 0; i < n; ++i) ((*strata)[i] ? ones : zeros).push_back(i);
    split_group(std::move(zeros), vitalsforge::detail::child_seed(seed, 0));
    split_group(std::move(ones), vitalsforge::detail::child_seed(seed, 1));
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    split_group(std::move(all), seed);
  }
  if (plan.train.empty() || plan.test.empty())
    throw std::invalid_argument("random_split: fraction leaves an empty train or test set");
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

// Folds are contiguous chunks of a seeded shuffle; the first n % k folds get one extra index.
inline std::vector<std::vector<std::size_t>> kfold(std::span<const std::size_t> indices, std::size_t k,
                                                   std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (k > indices.size()) throw std::invalid_argument("kfold: k exceeds the number of indices");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  detail::shuffle(order, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = order.size() / k, extra = order.size() % k;
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(at), order.begin() + static_cast<std::ptrdiff_t>(at + len));
    std::sort(folds[f].begin(), folds[f].end());
    at += len;
  }
  return folds;
}

// Drops test stays whose patient also has a training stay. Training rows are untouched.
inline SplitPlan remove_patient_overlap(const SplitPlan& plan, const Cohort& cohort) {
  std::unordered_set<std::string_view> train_patients;
  for (std::size_t i : plan.train) train_patients.insert(cohort.stays.at(i).patient_id);
  SplitPlan out = plan;
  out.test.clear();
  for (std::size_t i : plan.test)
    if (!train_patients.contains(cohort.stays.at(i).patient_id)) out.test.push_back(i);
  return out;
}

}  // namespace vitalsforge::evaluation
