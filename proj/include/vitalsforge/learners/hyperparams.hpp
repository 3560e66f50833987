#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vitalsforge::learners {

enum class AlgorithmId : std::uint8_t { lr, lda, rf, knn, svm_rbf, gbt, mlr, svr_rbf };

inline constexpr std::array<AlgorithmId, 8> kAllAlgorithms = {
    AlgorithmId::lr,      AlgorithmId::lda, AlgorithmId::rf,  AlgorithmId::knn,
    AlgorithmId::svm_rbf, AlgorithmId::gbt, AlgorithmId::mlr, AlgorithmId::svr_rbf};

inline constexpr std::array<AlgorithmId, 6> kClassifiers = {AlgorithmId::lr,  AlgorithmId::lda,     AlgorithmId::rf,
                                                             AlgorithmId::knn, AlgorithmId::svm_rbf, AlgorithmId::gbt};
inline constexpr std::array<AlgorithmId, 2> kRegressors = {AlgorithmId::mlr, AlgorithmId::svr_rbf};

inline constexpr bool is_classifier(AlgorithmId a) noexcept {
  return a != AlgorithmId::mlr && a != AlgorithmId::svr_rbf;
}

inline constexpr std::string_view algorithm_name(AlgorithmId a) noexcept {
  switch (a) {
    case AlgorithmId::lr: return "lr";
    case AlgorithmId::lda: return "lda";
    case AlgorithmId::rf: return "rf";
    case AlgorithmId::knn: return "knn";
    case AlgorithmId::svm_rbf: return "svm_rbf";
    case AlgorithmId::gbt: return "gbt";
    case AlgorithmId::mlr: return "mlr";
    case AlgorithmId::svr_rbf: return "svr_rbf";
  }
  return "?";
}

// Accepts canonical names plus the short forms used on the command line.
inline std::optional<AlgorithmId> parse_algorithm(std::string_view s) {
  for (AlgorithmId a : kAllAlgorithms)
    if (algorithm_name(a) == s) return a;
  if (s == "svm") return AlgorithmId::svm_rbf;
  if (s == "xgb") return AlgorithmId::gbt;
  if (s == "svr") return AlgorithmId::svr_rbf;
  return std::nullopt;
}

// Per-algorithm key/value settings. Keys outside an algorithm's documented
// set are rejected by validate().
//
//   lr      l2=1e-4 max_iter=1000 tol=1e-6
//   lda     shrinkage=1e-6            (ridge added as shrinkage * trace / d)
//   rf      n_trees=500 max_features=4 min_leaf=1 max_depth=0 (0 = unlimited)
//   knn     k=5
//   svm_rbf c=1.6 gamma=0 tol=1e-3 max_iter=10000000 (gamma 0 = 1/(d * Var X))
//   gbt     n_rounds=200 depth=3 learning_rate=0.1 min_leaf=1
//   mlr     (none)
//   svr_rbf c=1.0 epsilon=0.1 gamma=0 tol=1e-3 max_iter=10000000
struct HyperParams {
  std::map<std::string, double> values;

  double get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("missing hyperparameter '" + key + "'");
    return it->second;
  }
  std::size_t get_count(const std::string& key) const { return static_cast<std::size_t>(std::llround(get(key))); }
  HyperParams& set(const std::string& key, double v) {
    values[key] = v;
    return *this;
  }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

inline HyperParams default_params(AlgorithmId a) {
  HyperParams p;
  switch (a) {
    case AlgorithmId::lr: p.set("l2", 1e-4).set("max_iter", 1000).set("tol", 1e-6); break;
    case AlgorithmId::lda: p.set("shrinkage", 1e-6); break;
    case AlgorithmId::rf: p.set("n_trees", 500).set("max_features", 4).set("min_leaf", 1).set("max_depth", 0); break;
    case AlgorithmId::knn: p.set("k", 5); break;
    case AlgorithmId::svm_rbf: p.set("c", 1.6).set("gamma", 0).set("tol", 1e-3).set("max_iter", 1e7); break;
    case AlgorithmId::gbt: p.set("n_rounds", 200).set("depth", 3).set("learning_rate", 0.1).set("min_leaf", 1); break;
    case AlgorithmId::mlr: break;
    case AlgorithmId::svr_rbf:
      p.set("c", 1.0).set("epsilon", 0.1).set("gamma", 0).set("tol", 1e-3).set("max_iter", 1e7);
      break;
  }
  return p;
}

inline void validate_params(AlgorithmId a, const HyperParams& p) {
  const HyperParams defaults = default_params(a);
  const std::string who(algorithm_name(a));
  for (const auto& [key, value] : p.values) {
    if (!defaults.values.contains(key)) throw std::invalid_argument(who + ": unknown hyperparameter '" + key + "'");
    if (!std::isfinite(value)) throw std::invalid_argument(who + ": hyperparameter '" + key + "' is not finite");
  }
  for (const auto& [key, value] : defaults.values)
    if (!p.values.contains(key)) throw std::invalid_argument(who + ": missing hyperparameter '" + key + "'");

  auto require = [&](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(who + ": " + what);
  };
  auto integral = [&](const char* key) { return p.get(key) == std::floor(p.get(key)); };
  switch (a) {
    case AlgorithmId::lr:
      require(p.get("l2") >= 0.0, "l2 must be >= 0");
      require(p.get("max_iter") >= 1.0 && integral("max_iter"), "max_iter must be a positive integer");
      require(p.get("tol") > 0.0, "tol must be > 0");
      break;
    case AlgorithmId::lda: require(p.get("shrinkage") >= 0.0, "shrinkage must be >= 0"); break;
    case AlgorithmId::rf:
      require(p.get("n_trees") >= 1.0 && integral("n_trees"), "n_trees must be a positive integer");
      require(p.get("max_features") >= 1.0 && integral("max_features"), "max_features must be a positive integer");
      require(p.get("min_leaf") >= 1.0 && integral("min_leaf"), "min_leaf must be a positive integer");
      require(p.get("max_depth") >= 0.0 && integral("max_depth"), "max_depth must be a non-negative integer");
      break;
    case AlgorithmId::knn: require(p.get("k") >= 1.0 && integral("k"), "k must be a positive integer"); break;
    case AlgorithmId::svm_rbf:
    case AlgorithmId::svr_rbf:
      require(p.get("c") > 0.0, "c must be > 0");
      require(p.get("gamma") >= 0.0, "gamma must be >= 0 (0 selects the scale heuristic)");
      require(p.get("tol") > 0.0, "tol must be > 0");
      require(p.get("max_iter") >= 1.0, "max_iter must be >= 1");
      if (a == AlgorithmId::svr_rbf) require(p.get("epsilon") >= 0.0, "epsilon must be >= 0");
      break;
    case AlgorithmId::gbt:
      require(p.get("n_rounds") >= 1.0 && integral("n_rounds"), "n_rounds must be a positive integer");
      require(p.get("depth") >= 1.0 && integral("depth"), "depth must be a positive integer");
      require(p.get("learning_rate") > 0.0 && p.get("learning_rate") <= 1.0, "learning_rate must be in (0, 1]");
      require(p.get("min_leaf") >= 1.0 && integral("min_leaf"), "min_leaf must be a positive integer");
      break;
    case AlgorithmId::mlr: break;
  }
}

}  // namespace vitalsforge::learners
