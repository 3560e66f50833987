#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/learners/dataset.hpp"
#include "vitalsforge/learners/tree.hpp"

namespace vitalsforge::learners {

// Bagged Gini trees. Leaf values hold the in-leaf positive fraction; a tree
// votes 1 when that fraction exceeds 0.5.
struct ForestState {
  std::vector<Tree> trees;

  double vote_fraction(std::span<const double> x) const {
    if (trees.empty()) return 0.0;
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.predict(x) > 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }
  friend bool operator==(const ForestState&, const ForestState&) = default;
};

struct ForestOptions {
  std::size_t n_trees = 500;
  std::size_t max_features = 4;
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;
  bool bootstrap = true;
};

// Tree t draws its bootstrap sample and feature subsets from child_seed(seed, t),
// so the fitted forest does not depend on thread count.
inline ForestState fit_forest(const Dataset& data, std::span<const int> y, const ForestOptions& opt,
                              std::uint64_t seed) {
  if (y.size() != data.rows) throw std::invalid_argument("fit_forest: label count mismatch");
  if (data.rows == 0) throw std::invalid_argument("fit_forest: empty training set");
  const ColumnOrder presorted = ColumnOrder::build(data);
  ForestState forest;
  forest.trees.resize(opt.n_trees);
  const TreeOptions tree_opt{SplitRule::gini, opt.max_depth, opt.min_leaf, opt.max_features};

  vitalsforge::detail::parallel_for(opt.n_trees, [&](std::size_t t) {
    std::mt19937_64 rng(vitalsforge::detail::child_seed(seed, t));
    const std::size_t n = data.rows;
    std::vector<std::uint32_t> counts(n, 0);
    if (opt.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) ++counts[pick(rng)];
    } else {
      std::fill(counts.begin(), counts.end(), 1u);
    }
    TreeSample sample;
    sample.rows.reserve(n);
    for (std::uint32_t r = 0; r < n; ++r)
      for (std::uint32_t k = 0; k < counts[r]; ++k) {
        sample.rows.push_back(r);
        sample.a.push_back(y[r] ? 1.0 : 0.0);
        sample.b.push_back(1.0);
      }
    forest.trees[t] = grow_tree(data, presorted, sample, tree_opt, rng);
  });
  return forest;
}

// Gradient-boosted regression trees on the logistic loss. Scores are
// base_score + sum of tree outputs (already shrunk).
struct BoostedState {
  double base_score = 0.0;
  std::vector<Tree> trees;

  double raw_score(std::span<const double> x) const {
    double s = base_score;
    for (const auto& t : trees) s += t.predict(x);
    return s;
  }
  friend bool operator==(const BoostedState&, const BoostedState&) = default;
};

struct BoostingOptions {
  std::size_t n_rounds = 200;
  std::size_t depth = 3;
  double learning_rate = 0.1;
  std::size_t min_leaf = 1;
};

struct BoostingFitInfo {
  std::vector<double> train_loss;  // mean log-loss, entry 0 before the first round
};

namespace detail {

inline double log_loss_term(double score, int y) {
  // log(1 + exp(s)) - y s
  const double soft = score > 0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
  return soft - (y ? score : 0.0);
}

}  // namespace detail

// Each round fits a depth-limited tree to the loss gradient with second-order
// split gain and Newton leaf values, then shrinks by the learning rate. A leaf
// step that would raise the loss of its own samples is halved until it does not,
// so the training loss never increases.
inline BoostedState fit_boosted_trees(const Dataset& data, std::span<const int> y, const BoostingOptions& opt,
                                      BoostingFitInfo* info = nullptr) {
  const std::size_t n = data.rows;
  if (y.size() != n) throw std::invalid_argument("fit_boosted_trees: label count mismatch");
  if (n == 0) throw std::invalid_argument("fit_boosted_trees: empty training set");

  std::size_t positives = 0;
  for (int v : y) positives += v ? 1 : 0;
  const double prior = std::clamp(static_cast<double>(positives) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);

  BoostedState model;
  model.base_score = std::log(prior / (1.0 - prior));
  std::vector<double> score(n, model.base_score);

  auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += detail::log_loss_term(score[i], y[i]);
    return s / static_cast<double>(n);
  };
  if (info) info->train_loss = {mean_loss()};

  const ColumnOrder presorted = ColumnOrder::build(data);
  const TreeOptions tree_opt{SplitRule::newton, opt.depth, opt.min_leaf, 0};
  std::mt19937_64 unused_rng(0);
  TreeSample sample;
  sample.rows.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) sample.rows[r] = r;
  sample.a.resize(n);
  sample.b.resize(n);
  std::vector<std::int32_t> leaf_of;

  model.trees.reserve(opt.n_rounds);
  for (std::size_t round = 0; round < opt.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      sample.a[i] = p - (y[i] ? 1.0 : 0.0);
      sample.b[i] = std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = grow_tree(data, presorted, sample, tree_opt, unused_rng, &leaf_of);

    std::vector<std::vector<std::uint32_t>> members(tree.size());
    for (std::uint32_t i = 0; i < n; ++i) members[static_cast<std::size_t>(leaf_of[i])].push_back(i);
    for (std::size_t leaf = 0; leaf < tree.size(); ++leaf) {
      if (tree.feature[leaf] >= 0) {
        tree.value[leaf] = 0.0;
        continue;
      }
      double step = opt.learning_rate * tree.value[leaf];
      const auto& rows = members[leaf];
      double before = 0.0;
      for (auto r : rows) before += detail::log_loss_term(score[r], y[r]);
      bool accepted = false;
      for (int halvings = 0; halvings < 60 && step != 0.0; ++halvings) {
        double after = 0.0;
        for (auto r : rows) after += detail::log_loss_term(score[r] + step, y[r]);
        if (after <= before) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) step = 0.0;
      tree.value[leaf] = step;
      for (auto r : rows) score[r] += step;
    }
    model.trees.push_back(std::move(tree));
    if (info) info->train_loss.push_back(mean_loss());
  }
  return model;
}

}  // namespace vitalsforge::learners
