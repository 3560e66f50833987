#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vitalsforge/cohort.hpp"
#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/evaluation/metrics.hpp"
#include "vitalsforge/evaluation/splits.hpp"
#include "vitalsforge/features.hpp"
#include "vitalsforge/learners/model.hpp"

namespace vitalsforge::evaluation {

using learners::AlgorithmId;
using learners::HyperParams;

enum class Task : std::uint8_t { mortality, los_binary, los_regression };
enum class Approach : std::uint8_t { baseline, quantiles };

inline constexpr std::string_view task_name(Task t) noexcept {
  switch (t) {
    case Task::mortality: return "mortality";
    case Task::los_binary: return "los_binary";
    case Task::los_regression: return "los_regression";
  }
  return "?";
}

// Also accepts the command-line spellings los-binary and los-days.
inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "mortality") return Task::mortality;
  if (s == "los_binary" || s == "los-binary") return Task::los_binary;
  if (s == "los_regression" || s == "los-regression" || s == "los-days" || s == "los_days")
    return Task::los_regression;
  return std::nullopt;
}

inline constexpr std::string_view approach_name(Approach a) noexcept {
  return a == Approach::baseline ? "baseline" : "quantiles";
}

inline std::optional<Approach> parse_approach(std::string_view s) {
  if (s == "baseline") return Approach::baseline;
  if (s == "quantiles") return Approach::quantiles;
  return std::nullopt;
}

inline constexpr bool is_classification(Task t) noexcept { return t != Task::los_regression; }

inline bool algorithm_fits_task(AlgorithmId a, Task t) noexcept {
  return learners::is_classifier(a) == is_classification(t);
}

// Library defaults with the per-task forest size and SVM penalty.
inline HyperParams task_params(AlgorithmId a, Task t) {
  HyperParams p = learners::default_params(a);
  const bool mortality = t == Task::mortality;
  if (a == AlgorithmId::rf) p.set("n_trees", mortality ? 500 : 400);
  if (a == AlgorithmId::svm_rbf) p.set("c", mortality ? 1.6 : 0.9);
  return p;
}

struct ExperimentOptions {
  bool drop_overlap = false;
  std::vector<std::string> exclude_features;
  std::size_t k_folds = 10;  // below 2 disables cross-validation
  double train_fraction = 0.75;
  bool stratify = false;
  bool impute_training_only = false;  // re-impute missing vitals from training stays only
  double low_q = kDefaultLowQuantile;
  double high_q = kDefaultHighQuantile;
  std::size_t calibration_bins = 10;
};

struct CvSummary {
  std::string metric;          // "accuracy" or "mae"
  std::vector<double> folds;   // one value per fold
  double mean = 0.0;
  double sd = 0.0;             // across folds, n - 1 denominator
};

struct ClassificationResult {
  ConfusionCounts confusion;
  ClassificationMetrics metrics;
  std::optional<double> auroc;  // absent when the test set holds one class
  std::vector<RocPoint> roc;
  std::vector<CalibrationBin> calibration;
  std::optional<CalibrationFit> calibration_fit;
};

struct AlgorithmResult {
  AlgorithmId algorithm = AlgorithmId::lr;
  HyperParams params;
  std::optional<CvSummary> cv;
  std::optional<ClassificationResult> classification;
  std::optional<RegressionErrors> regression;
};

struct ReportMetadata {
  std::uint64_t seed = 0;
  std::size_t cohort_size = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_test_before_overlap_removal = 0;
  bool overlap_removed = false;
  std::vector<std::string> excluded_features;
  std::vector<std::string> feature_columns;
  std::size_t k_folds = 0;
  double train_fraction = 0.75;
  bool stratified = false;
  bool imputed_from_training = false;
  double low_q = kDefaultLowQuantile;
  double high_q = kDefaultHighQuantile;
  double los_median = 0.0;
  double test_positive_rate = 0.0;  // classification tasks only
};

struct EvalReport {
  Task task = Task::mortality;
  Approach approach = Approach::quantiles;
  ReportMetadata metadata;
  std::vector<AlgorithmResult> results;  // algorithm enum order
};

inline FeatureMatrix build_features(const Cohort& cohort, Approach approach, double low_q = kDefaultLowQuantile,
                                    double high_q = kDefaultHighQuantile) {
  return approach == Approach::baseline ? build_baseline_matrix(cohort) : build_quantiles_matrix(cohort, low_q, high_q);
}

namespace detail {

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <class T>
std::vector<T> gather(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

inline std::vector<std::size_t> without(std::span<const std::size_t> all, std::span<const std::size_t> drop) {
  std::vector<std::size_t> out;
  std::set_difference(all.begin(), all.end(), drop.begin(), drop.end(), std::back_inserter(out));
  return out;
}

// Fits on `train` rows and scores `eval` rows: probabilities for classifiers, values for regressors.
inline std::vector<double> fit_and_score(AlgorithmId a, const HyperParams& p, std::uint64_t seed,
                                         const FeatureMatrix& x, std::span<const int> labels,
                                         std::span<const double> targets, std::span<const std::size_t> train,
                                         std::span<const std::size_t> eval) {
  const FeatureMatrix xt = x.select_rows(train), xe = x.select_rows(eval);
  if (learners::is_classifier(a)) {
    const auto y = gather(labels, train);
    return learners::predict_proba(learners::train_classifier(a, xt, y, p, seed), xe);
  }
  const auto y = gather(targets, train);
  return learners::predict_value(learners::train_regressor(a, xt, y, p, seed), xe);
}

}  // namespace detail

// Seeds: split child 0, folds child 1, model for algorithm a child (2, a),
// fold f of that algorithm child (model seed, f + 1).
inline EvalReport run_experiment(const Cohort& cohort, Task task, Approach approach,
                                 std::span<const AlgorithmId> algorithms, std::uint64_t seed,
                                 const ExperimentOptions& options = {}) {
  using vitalsforge::detail::child_seed;
  if (algorithms.empty()) throw std::invalid_argument("run_experiment: no algorithms requested");
  for (AlgorithmId a : algorithms)
    if (!algorithm_fits_task(a, task))
      throw std::invalid_argument(std::string(learners::algorithm_name(a)) + " cannot be used for the " +
                                  std::string(task_name(task)) + " task");
  std::set<AlgorithmId> ordered(algorithms.begin(), algorithms.end());
  if (cohort.size() < 2) throw std::invalid_argument("run_experiment: cohort needs at least two stays");

  const LabelSet labels = derive_labels(cohort);
  const std::vector<int>& y_class = task == Task::los_binary ? labels.los_binary : labels.mortality;
  std::optional<std::span<const int>> strata;
  if (options.stratify && is_classification(task)) strata = std::span<const int>(y_class);
  SplitPlan plan = random_split(cohort.size(), options.train_fraction, child_seed(seed, 0), strata);

  // Labels and the split do not depend on vital values, so imputation can follow the split.
  std::optional<Cohort> reimputed;
  if (options.impute_training_only) reimputed = impute_missing(cohort, std::span<const std::size_t>(plan.train)).first;
  const Cohort& source = reimputed ? *reimputed : cohort;
  const FeatureMatrix x =
      build_features(source, approach, options.low_q, options.high_q).without_columns(options.exclude_features);
  if (x.cols() == 0) throw std::invalid_argument("run_experiment: every feature column was excluded");

  EvalReport report;
  report.task = task;
  report.approach = approach;
  auto& meta = report.metadata;
  meta.seed = seed;
  meta.cohort_size = cohort.size();
  meta.n_test_before_overlap_removal = plan.test.size();
  if (options.drop_overlap) {
    plan = remove_patient_overlap(plan, cohort);
    meta.overlap_removed = true;
    if (plan.test.empty()) throw std::invalid_argument("run_experiment: overlap removal emptied the test set");
  }
  meta.n_train = plan.train.size();
  meta.n_test = plan.test.size();
  meta.excluded_features = options.exclude_features;
  meta.feature_columns = x.schema();
  meta.train_fraction = options.train_fraction;
  meta.stratified = strata.has_value();
  meta.imputed_from_training = options.impute_training_only;
  meta.low_q = options.low_q;
  meta.high_q = options.high_q;
  meta.los_median = labels.los_median;
  if (is_classification(task)) {
    std::size_t pos = 0;
    for (std::size_t i : plan.test) pos += static_cast<std::size_t>(y_class[i]);
    meta.test_positive_rate = static_cast<double>(pos) / static_cast<double>(plan.test.size());
  }

  std::vector<std::vector<std::size_t>> folds;
  if (options.k_folds >= 2) folds = kfold(plan.train, options.k_folds, child_seed(seed, 1));
  meta.k_folds = folds.size();

  // One job per (algorithm, fold) plus one final fit per algorithm; results land in fixed slots.
  const std::vector<AlgorithmId> algos(ordered.begin(), ordered.end());
  const std::size_t per_algo = folds.size() + 1;
  std::vector<std::vector<double>> outputs(algos.size() * per_algo);
  std::vector<HyperParams> params;
  for (AlgorithmId a : algos) params.push_back(task_params(a, task));

  vitalsforge::detail::parallel_for(outputs.size(), [&](std::size_t job) {
    const std::size_t ai = job / per_algo, f = job % per_algo;
    const AlgorithmId a = algos[ai];
    const std::uint64_t model_seed = child_seed(seed, 2, static_cast<std::uint64_t>(a));
    if (f == folds.size()) {
      outputs[job] = detail::fit_and_score(a, params[ai], model_seed, x, y_class, labels.los_days, plan.train, plan.test);
    } else {
      const auto fold_train = detail::without(plan.train, folds[f]);
      outputs[job] = detail::fit_and_score(a, params[ai], child_seed(model_seed, f + 1), x, y_class, labels.los_days,
                                           fold_train, folds[f]);
    }
  });

  const auto y_test = detail::gather<int>(y_class, plan.test);
  const auto t_test = detail::gather<double>(labels.los_days, plan.test);
  for (std::size_t ai = 0; ai < algos.size(); ++ai) {
    AlgorithmResult r;
    r.algorithm = algos[ai];
    r.params = params[ai];
    if (!folds.empty()) {
      CvSummary cv;
      cv.metric = is_classification(task) ? "accuracy" : "mae";
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& out = outputs[ai * per_algo + f];
        if (is_classification(task)) {
          const auto truth = detail::gather<int>(y_class, folds[f]);
          const auto c = confusion(learners::labels_from_scores(out), truth);
          cv.folds.push_back(static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()));
        } else {
          cv.folds.push_back(regression_errors(out, detail::gather<double>(labels.los_days, folds[f])).mae);
        }
      }
      cv.mean = detail::mean_of(cv.folds);
      cv.sd = detail::sd_of(cv.folds);
      r.cv = std::move(cv);
    }
    const auto& scores = outputs[ai * per_algo + folds.size()];
    if (is_classification(task)) {
      ClassificationResult c;
      c.confusion = confusion(learners::labels_from_scores(scores), y_test);
      c.metrics = classification_metrics(c.confusion);
      const bool both = c.confusion.tp + c.confusion.fn > 0 && c.confusion.tn + c.confusion.fp > 0;
      if (both) {
        c.auroc = auroc(scores, y_test);
        c.roc = roc_points(scores, y_test);
      }
      c.calibration = calibration_curve(scores, y_test, options.calibration_bins);
      c.calibration_fit = calibration_fit(scores, y_test);
      r.classification = std::move(c);
    } else {
      r.regression = regression_errors(scores, t_test);
    }
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace vitalsforge::evaluation
