#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/features.hpp"
#include "vitalsforge/learners/dataset.hpp"
#include "vitalsforge/learners/ensembles.hpp"
#include "vitalsforge/learners/hyperparams.hpp"
#include "vitalsforge/learners/knn.hpp"
#include "vitalsforge/learners/linear.hpp"
#include "vitalsforge/learners/svm.hpp"

namespace vitalsforge::learners {

// Fitted output of a single-class training set.
struct ConstantState {
  double value = 0.0;
  friend bool operator==(const ConstantState&, const ConstantState&) = default;
};

using ModelState = std::variant<ConstantState, LinearState, ForestState, BoostedState, KnnState, KernelExpansion>;

// Immutable fitted predictor. Inputs must carry exactly feature_schema.
//
// Scores by algorithm:
//   lr, lda   sigmoid of the linear log-odds
//   rf        fraction of trees voting 1
//   gbt       sigmoid of the boosted score
//   knn       positive fraction among the k nearest neighbours
//   svm_rbf   sigmoid of the SVM decision value (uncalibrated)
//   mlr       linear prediction
//   svr_rbf   kernel expansion value
struct TrainedModel {
  AlgorithmId algorithm = AlgorithmId::lr;
  HyperParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_schema;
  Standardizer scaler;  // empty for rf, gbt and mlr
  ModelState state;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

inline constexpr bool standardizes_inputs(AlgorithmId a) noexcept {
  return a == AlgorithmId::lr || a == AlgorithmId::lda || a == AlgorithmId::knn || a == AlgorithmId::svm_rbf ||
         a == AlgorithmId::svr_rbf;
}

namespace detail {

inline Dataset to_dataset(const FeatureMatrix& m) {
  Dataset d(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin(), src.end(), d.row(r).begin());
  }
  return d;
}

inline void check_schema(const TrainedModel& model, const FeatureMatrix& x) {
  if (x.schema() != model.feature_schema)
    throw std::invalid_argument("feature schema does not match the one the " +
                                std::string(algorithm_name(model.algorithm)) + " model was trained on");
}

inline void check_training_shape(AlgorithmId a, const FeatureMatrix& x, std::size_t n_targets, const HyperParams& p) {
  if (x.rows() != n_targets)
    throw std::invalid_argument("training rows (" + std::to_string(x.rows()) + ") and targets (" +
                                std::to_string(n_targets) + ") differ");
  if (x.rows() < 2) throw std::invalid_argument("training needs at least two rows");
  validate_params(a, p);
  if (a == AlgorithmId::rf && p.get_count("max_features") > x.cols())
    throw std::invalid_argument("rf: max_features exceeds the number of feature columns");
}

}  // namespace detail

inline TrainedModel train_classifier(AlgorithmId algorithm, const FeatureMatrix& x, std::span<const int> y,
                                     const HyperParams& params, std::uint64_t seed) {
  if (!is_classifier(algorithm))
    throw std::invalid_argument(std::string(algorithm_name(algorithm)) + " is not a classifier");
  detail::check_training_shape(algorithm, x, y.size(), params);
  std::size_t positives = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("classification labels must be 0 or 1");
    positives += static_cast<std::size_t>(v);
  }

  TrainedModel model;
  model.algorithm = algorithm;
  model.params = params;
  model.seed = seed;
  model.feature_schema = x.schema();
  if (positives == 0 || positives == y.size()) {
    model.state = ConstantState{positives == 0 ? 0.0 : 1.0};
    return model;
  }

  Dataset data = detail::to_dataset(x);
  if (standardizes_inputs(algorithm)) {
    model.scaler = Standardizer::fit(data);
    data = model.scaler.apply(data);
  }
  const HyperParams& p = params;
  switch (algorithm) {
    case AlgorithmId::lr:
      model.state = fit_logistic(data, y, p.get("l2"), static_cast<int>(p.get_count("max_iter")), p.get("tol"));
      break;
    case AlgorithmId::lda: model.state = fit_lda(data, y, p.get("shrinkage")); break;
    case AlgorithmId::rf: {
      ForestOptions opt;
      opt.n_trees = p.get_count("n_trees");
      opt.max_features = p.get_count("max_features");
      opt.min_leaf = p.get_count("min_leaf");
      opt.max_depth = p.get_count("max_depth");
      model.state = fit_forest(data, y, opt, seed);
      break;
    }
    case AlgorithmId::knn: model.state = fit_knn(std::move(data), y, p.get_count("k")); break;
    case AlgorithmId::svm_rbf: {
      const double gamma = p.get("gamma") > 0.0 ? p.get("gamma") : scale_gamma(data);
      model.state = fit_svc(data, y, p.get("c"), gamma, p.get("tol"), static_cast<long>(p.get("max_iter")));
      break;
    }
    case AlgorithmId::gbt: {
      BoostingOptions opt;
      opt.n_rounds = p.get_count("n_rounds");
      opt.depth = p.get_count("depth");
      opt.learning_rate = p.get("learning_rate");
      opt.min_leaf = p.get_count("min_leaf");
      model.state = fit_boosted_trees(data, y, opt);
      break;
    }
    default: break;
  }
  return model;
}

inline TrainedModel train_regressor(AlgorithmId algorithm, const FeatureMatrix& x, std::span<const double> y,
                                    const HyperParams& params, std::uint64_t seed) {
  if (is_classifier(algorithm))
    throw std::invalid_argument(std::string(algorithm_name(algorithm)) + " is not a regressor");
  detail::check_training_shape(algorithm, x, y.size(), params);
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("regression targets must be finite");

  TrainedModel model;
  model.algorithm = algorithm;
  model.params = params;
  model.seed = seed;
  model.feature_schema = x.schema();
  Dataset data = detail::to_dataset(x);
  if (algorithm == AlgorithmId::mlr) {
    model.state = fit_least_squares(data, y);
  } else {
    model.scaler = Standardizer::fit(data);
    data = model.scaler.apply(data);
    const double gamma = params.get("gamma") > 0.0 ? params.get("gamma") : scale_gamma(data);
    model.state = fit_svr(data, y, params.get("c"), params.get("epsilon"), gamma, params.get("tol"),
                          static_cast<long>(params.get("max_iter")));
  }
  return model;
}

namespace detail {

template <class RowFn>
std::vector<double> score_rows(const TrainedModel& model, const FeatureMatrix& x, RowFn&& fn) {
  check_schema(model, x);
  Dataset data = to_dataset(x);
  if (!model.scaler.empty()) data = model.scaler.apply(data);
  std::vector<double> out(data.rows);
  vitalsforge::detail::parallel_for(data.rows, [&](std::size_t r) { out[r] = fn(data.row(r)); });
  return out;
}

}  // namespace detail

// Scores in [0, 1], one per row.
inline std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& x) {
  if (!is_classifier(model.algorithm))
    throw std::invalid_argument(std::string(algorithm_name(model.algorithm)) + " does not produce probabilities");
  return detail::score_rows(model, x, [&](std::span<const double> row) -> double {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ConstantState>) return s.value;
          else if constexpr (std::is_same_v<S, LinearState>) return sigmoid(s.score(row));
          else if constexpr (std::is_same_v<S, ForestState>) return s.vote_fraction(row);
          else if constexpr (std::is_same_v<S, BoostedState>) return sigmoid(s.raw_score(row));
          else if constexpr (std::is_same_v<S, KnnState>) return s.positive_fraction(row);
          else return sigmoid(s.decision(row));
        },
        model.state);
  });
}

inline std::vector<int> labels_from_scores(std::span<const double> scores, double threshold = 0.5) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

inline std::vector<int> predict_label(const TrainedModel& model, const FeatureMatrix& x, double threshold = 0.5) {
  return labels_from_scores(predict_proba(model, x), threshold);
}

inline std::vector<double> predict_value(const TrainedModel& model, const FeatureMatrix& x) {
  if (is_classifier(model.algorithm))
    throw std::invalid_argument(std::string(algorithm_name(model.algorithm)) + " is not a regressor");
  return detail::score_rows(model, x, [&](std::span<const double> row) -> double {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ConstantState>) return s.value;
          else if constexpr (std::is_same_v<S, LinearState>) return s.score(row);
          else if constexpr (std::is_same_v<S, KernelExpansion>) return s.decision(row);
          else throw std::logic_error("regressor holds a classifier state");
        },
        model.state);
  });
}

}  // namespace vitalsforge::learners
