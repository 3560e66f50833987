#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "vitalsforge/learners/dataset.hpp"

namespace vitalsforge::learners {

// Binary decision tree in flat arrays. A node with feature < 0 is a leaf.
// Routing: x[feature] <= threshold goes left.
struct Tree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> value;

  std::size_t size() const noexcept { return feature.size(); }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t node = 0;
    while (feature[node] >= 0)
      node = static_cast<std::size_t>(x[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node]
                                                                                                      : right[node]);
    return node;
  }
  double predict(std::span<const double> x) const { return value[leaf_index(x)]; }

  std::size_t add_node() {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    value.push_back(0.0);
    return feature.size() - 1;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

// Row indices sorted by each column (ties keep row order).
struct ColumnOrder {
  std::vector<std::vector<std::uint32_t>> by_column;

  static ColumnOrder build(const Dataset& d) {
    ColumnOrder o;
    o.by_column.resize(d.cols);
    for (std::size_t c = 0; c < d.cols; ++c) {
      auto& idx = o.by_column[c];
      idx.resize(d.rows);
      std::iota(idx.begin(), idx.end(), 0u);
      std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return d(a, c) < d(b, c); });
    }
    return o;
  }
};

enum class SplitRule {
  gini,    // a = label (0/1), b = 1; leaf value = positive fraction
  newton,  // a = gradient, b = hessian; leaf value = -sum(a)/sum(b)
};

struct TreeOptions {
  SplitRule rule = SplitRule::gini;
  std::size_t max_depth = 0;     // 0 = unlimited
  std::size_t min_leaf = 1;      // minimum samples per child
  std::size_t max_features = 0;  // 0 or >= cols: consider every column
};

// Training sample: `rows[p]` is the dataset row of position p. Positions with
// the same row (bootstrap copies) must be contiguous and positions must be
// grouped in ascending row order.
struct TreeSample {
  std::vector<std::uint32_t> rows;
  std::vector<double> a;
  std::vector<double> b;
};

// Grows one CART tree by exact greedy search over presorted columns. Each node
// owns the same [lo, hi) range in every per-column order array; splitting
// stable-partitions all arrays, so no re-sorting is needed below the root.
// When `leaf_of_position` is non-null it receives the leaf node of every position.
inline Tree grow_tree(const Dataset& data, const ColumnOrder& presorted, const TreeSample& sample,
                      const TreeOptions& opt, std::mt19937_64& rng,
                      std::vector<std::int32_t>* leaf_of_position = nullptr) {
  const std::size_t d = data.cols;
  const std::size_t m = sample.rows.size();
  Tree tree;
  tree.add_node();
  if (m == 0) return tree;

  // Position ranges per dataset row.
  std::vector<std::uint32_t> first(data.rows, 0), count(data.rows, 0);
  for (std::size_t p = 0; p < m; ++p) {
    const std::uint32_t r = sample.rows[p];
    if (count[r]++ == 0) first[r] = static_cast<std::uint32_t>(p);
  }
  std::vector<std::vector<std::uint32_t>> order(d);
  for (std::size_t c = 0; c < d; ++c) {
    order[c].reserve(m);
    for (std::uint32_t r : presorted.by_column[c])
      for (std::uint32_t k = 0; k < count[r]; ++k) order[c].push_back(first[r] + k);
  }
  if (leaf_of_position) leaf_of_position->assign(m, 0);

  auto score = [&](double a, double b) {
    if (opt.rule == SplitRule::gini) return (a * a + (b - a) * (b - a)) / b;
    return a * a / b;
  };
  auto x_at = [&](std::uint32_t pos, std::size_t c) { return data(sample.rows[pos], c); };

  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), std::size_t{0});
  const std::size_t wanted = (opt.max_features == 0 || opt.max_features >= d) ? d : opt.max_features;
  std::vector<std::uint8_t> goes_left(m, 0);
  std::vector<std::uint32_t> scratch(m);

  struct Pending {
    std::size_t node, lo, hi, depth;
  };
  std::vector<Pending> stack{{0, 0, m, 0}};
  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    const std::size_t n = cur.hi - cur.lo;

    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = cur.lo; i < cur.hi; ++i) {
      const std::uint32_t pos = order[0][i];
      sum_a += sample.a[pos];
      sum_b += sample.b[pos];
    }
    if (opt.rule == SplitRule::gini)
      tree.value[cur.node] = sum_a / sum_b;
    else
      tree.value[cur.node] = sum_b > 0.0 ? -sum_a / sum_b : 0.0;

    const bool pure = opt.rule == SplitRule::gini && (sum_a == 0.0 || sum_a == sum_b);
    const bool depth_done = opt.max_depth != 0 && cur.depth >= opt.max_depth;
    bool split_found = false;
    std::size_t best_feature = 0, best_count = 0;
    double best_score = 0.0;
    const double parent_score = (sum_b > 0.0) ? score(sum_a, sum_b) : 0.0;

    if (!pure && !depth_done && n >= 2 * opt.min_leaf) {
      if (wanted < d)
        for (std::size_t i = 0; i + 1 < d; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, d - 1);
          std::swap(features[i], features[pick(rng)]);
        }
      std::size_t examined = 0;
      for (std::size_t fi = 0; fi < d && examined < wanted; ++fi) {
        const std::size_t c = features[fi];
        const auto& ord = order[c];
        if (x_at(ord[cur.lo], c) == x_at(ord[cur.hi - 1], c)) continue;  // constant here
        ++examined;
        double left_a = 0.0, left_b = 0.0;
        for (std::size_t i = cur.lo; i + 1 < cur.hi; ++i) {
          const std::uint32_t pos = ord[i];
          left_a += sample.a[pos];
          left_b += sample.b[pos];
          const std::size_t left_n = i + 1 - cur.lo;
          if (left_n < opt.min_leaf) continue;
          if (n - left_n < opt.min_leaf) break;
          if (!(x_at(pos, c) < x_at(ord[i + 1], c))) continue;
          const double right_b = sum_b - left_b;
          if (opt.rule == SplitRule::newton && (left_b <= 1e-12 || right_b <= 1e-12)) continue;
          const double s = score(left_a, left_b) + score(sum_a - left_a, right_b);
          if (!split_found || s > best_score) {
            split_found = true;
            best_score = s;
            best_feature = c;
            best_count = left_n;
          }
        }
      }
      if (split_found && opt.rule == SplitRule::newton && !(best_score > parent_score * (1.0 + 1e-12)))
        split_found = false;
    }

    if (!split_found) {
      if (leaf_of_position)
        for (std::size_t i = cur.lo; i < cur.hi; ++i)
          (*leaf_of_position)[order[0][i]] = static_cast<std::int32_t>(cur.node);
      continue;
    }

    const auto& best_order = order[best_feature];
    const double lo_value = x_at(best_order[cur.lo + best_count - 1], best_feature);
    const double hi_value = x_at(best_order[cur.lo + best_count], best_feature);
    double threshold = 0.5 * (lo_value + hi_value);
    if (!(threshold >= lo_value && threshold < hi_value)) threshold = lo_value;

    for (std::size_t i = cur.lo; i < cur.hi; ++i) goes_left[best_order[i]] = i < cur.lo + best_count ? 1 : 0;
    for (std::size_t c = 0; c < d; ++c) {
      auto& ord = order[c];
      std::size_t l = cur.lo, r = 0;
      for (std::size_t i = cur.lo; i < cur.hi; ++i) {
        const std::uint32_t pos = ord[i];
        if (goes_left[pos])
          ord[l++] = pos;
        else
          scratch[r++] = pos;
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(r), ord.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t left_node = tree.add_node();
    const std::size_t right_node = tree.add_node();
    tree.feature[cur.node] = static_cast<std::int32_t>(best_feature);
    tree.threshold[cur.node] = threshold;
    tree.left[cur.node] = static_cast<std::int32_t>(left_node);
    tree.right[cur.node] = static_cast<std::int32_t>(right_node);
    stack.push_back({right_node, cur.lo + best_count, cur.hi, cur.depth + 1});
    stack.push_back({left_node, cur.lo, cur.lo + best_count, cur.depth + 1});
  }
  return tree;
}

}  // namespace vitalsforge::learners
