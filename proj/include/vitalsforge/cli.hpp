#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vitalsforge/cohort.hpp"
#include "vitalsforge/cohort_io.hpp"
#include "vitalsforge/evaluation/experiment.hpp"
#include "vitalsforge/evaluation/report.hpp"
#include "vitalsforge/features.hpp"
#include "vitalsforge/synth.hpp"

namespace vitalsforge::cli {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kSeedEnv = "VITALSFORGE_SEED";

// Exit codes: 0 success, 1 data or IO failure, 2 invalid usage; CLI11 parse errors keep their own codes.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthArgs {
  std::size_t n_stays = 5000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

struct FeaturizeArgs {
  std::string cohort;
  std::string mode = "quantiles";
  double low_q = kDefaultLowQuantile;
  double high_q = kDefaultHighQuantile;
  std::string out;
};

struct EvaluateArgs {
  std::string cohort;
  std::string task = "mortality";
  std::string approach = "quantiles";
  std::vector<std::string> algos;  // empty = every algorithm valid for the task
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  bool drop_overlap = false;
  std::vector<std::string> exclude_features;
  std::size_t k_folds = 10;
  bool stratify = false;
  bool impute_train_only = false;
  double low_q = kDefaultLowQuantile;
  double high_q = kDefaultHighQuantile;
};

struct ReportArgs {
  std::string report;
  std::string out;  // defaults to the report's directory
};

namespace detail {

inline Cohort load_cohort_dir(const std::string& dir) {
  const std::filesystem::path d(dir);
  return parse_cohort(d / "stays.csv", d / "observations.csv");
}

inline std::string trim_copy(std::string s) { return std::string(vitalsforge::detail::trim(s)); }

// Flat "key = value" lines; '#' starts a comment. Keys are long flag names without dashes.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim_copy(line.substr(0, eq)), value = trim_copy(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Config values become leading arguments so that later command-line flags win.
inline std::vector<std::string> config_arguments(const CLI::App& sub, const std::string& path) {
  std::vector<std::string> args;
  for (const auto& [key, value] : read_config_file(path)) {
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config" || key == "help")
      throw UsageError("config file " + path + ": unknown key '" + key + "' for " + sub.get_name());
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") args.push_back("--" + key);
      else if (value != "false" && value != "0")
        throw UsageError("config file " + path + ": '" + key + "' expects true or false");
    } else {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

inline std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

inline void write_summary(const CohortSummary& s, std::ostream& out) {
  out << "stays " << s.n_stays << ", patients " << s.n_patients << ", mortality rate "
      << vitalsforge::detail::format_double(s.mortality_rate, 4) << ", median LOS "
      << vitalsforge::detail::format_double(s.median_los, 4) << " days\n";
}

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig config;
  config.n_stays = a.n_stays;
  const Cohort cohort = synthesize_cohort(config, a.seed);
  write_cohort(cohort, a.out);
  write_summary(summarize(cohort), out);
  return 0;
}

inline int cmd_featurize(const FeaturizeArgs& a, std::ostream& out) {
  validate_quantile_pair(a.low_q, a.high_q);
  const auto approach = evaluation::parse_approach(a.mode);
  if (!approach) throw UsageError("--mode must be baseline or quantiles");
  const Cohort cohort = preprocess(load_cohort_dir(a.cohort)).first;
  const FeatureMatrix m = evaluation::build_features(cohort, *approach, a.low_q, a.high_q);
  write_feature_csv(m, std::filesystem::path(a.out));
  out << "wrote " << m.rows() << " rows x " << m.cols() << " features to " << a.out << "\n";
  return 0;
}

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  validate_quantile_pair(a.low_q, a.high_q);
  const auto task = evaluation::parse_task(a.task);
  if (!task) throw UsageError("--task must be mortality, los-binary or los-days");
  const auto approach = evaluation::parse_approach(a.approach);
  if (!approach) throw UsageError("--approach must be baseline or quantiles");
  std::vector<learners::AlgorithmId> algos;
  for (const auto& name : a.algos) {
    const auto id = learners::parse_algorithm(name);
    if (!id) throw UsageError("unknown algorithm '" + name + "'");
    if (!evaluation::algorithm_fits_task(*id, *task))
      throw UsageError(name + " is not valid for task " + a.task +
                       (evaluation::is_classification(*task) ? " (needs a classifier)" : " (needs a regressor)"));
    algos.push_back(*id);
  }
  if (algos.empty())
    for (auto id : learners::kAllAlgorithms)
      if (evaluation::algorithm_fits_task(id, *task)) algos.push_back(id);
  if (a.k_folds == 1) throw UsageError("--k-folds must be 0 (no cross-validation) or at least 2");

  // Training-only imputation happens inside the experiment, after the split.
  const Cohort cohort = a.impute_train_only ? filter_outliers(filter_first_day(load_cohort_dir(a.cohort)))
                                            : preprocess(load_cohort_dir(a.cohort)).first;
  evaluation::ExperimentOptions opt;
  opt.drop_overlap = a.drop_overlap;
  opt.exclude_features = a.exclude_features;
  opt.k_folds = a.k_folds;
  opt.stratify = a.stratify;
  opt.impute_training_only = a.impute_train_only;
  opt.low_q = a.low_q;
  opt.high_q = a.high_q;
  const auto report = evaluation::run_experiment(cohort, *task, *approach, algos, a.seed, opt);
  evaluation::write_report_outputs(report, a.out);
  evaluation::print_metrics_table(evaluation::report_from_json(evaluation::report_to_json(report)), out);
  return 0;
}

inline int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto report = evaluation::load_report(a.report);
  const std::filesystem::path dir =
      a.out.empty() ? std::filesystem::path(a.report).parent_path() : std::filesystem::path(a.out);
  const auto written = evaluation::write_plot_outputs(report, dir.empty() ? "." : dir);
  evaluation::print_metrics_table(report, out);
  out << "rendered " << written.size() << " files\n";
  return 0;
}

}  // namespace detail

// Entry point shared by the executable and the tests. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"vitalsforge: ICU vital-sign outcome prediction pipeline", "vitalsforge"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic cohort (stays.csv, observations.csv)");
  s->add_option("--n-stays", synth.n_stays, "Number of ICU stays")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed (default 42, or $VITALSFORGE_SEED)")->envname(kSeedEnv);
  s->add_option("--out", synth.out, "Output directory")->required();

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "Preprocess a cohort and write its feature matrix");
  f->add_option("--cohort", feat.cohort, "Directory holding stays.csv and observations.csv")->required();
  f->add_option("--mode", feat.mode, "baseline or quantiles")->capture_default_str();
  f->add_option("--low-q", feat.low_q, "Lower tail cutoff probability")->capture_default_str();
  f->add_option("--high-q", feat.high_q, "Upper tail cutoff probability")->capture_default_str();
  f->add_option("--out", feat.out, "Output CSV path")->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Split, cross-validate, train and evaluate models");
  e->add_option("--cohort", ev.cohort, "Directory holding stays.csv and observations.csv")->required();
  e->add_option("--task", ev.task, "mortality, los-binary or los-days")->capture_default_str();
  e->add_option("--approach", ev.approach, "baseline or quantiles")->capture_default_str();
  e->add_option("--algos", ev.algos, "Comma-separated algorithms (lr,lda,rf,knn,svm,xgb | mlr,svr)")->delimiter(',');
  e->add_option("--seed", ev.seed, "Random seed (default 42, or $VITALSFORGE_SEED)")->envname(kSeedEnv);
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_flag("--drop-overlap", ev.drop_overlap, "Drop test stays whose patient appears in training");
  e->add_option("--exclude-features", ev.exclude_features, "Comma-separated feature columns to drop")->delimiter(',');
  e->add_option("--k-folds", ev.k_folds, "Cross-validation folds on the training set (0 disables)")
      ->capture_default_str();
  e->add_flag("--stratify", ev.stratify, "Stratify the train/test split by label");
  e->add_flag("--impute-train-only", ev.impute_train_only, "Impute missing vitals from training stays only");
  e->add_option("--low-q", ev.low_q, "Lower tail cutoff probability")->capture_default_str();
  e->add_option("--high-q", ev.high_q, "Upper tail cutoff probability")->capture_default_str();

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Re-render CSV and SVG plots from an existing report.json");
  r->add_option("--report", rep.report, "Path to report.json")->required();
  r->add_option("--out", rep.out, "Output directory (default: the report's directory)");

  for (auto* sub : {s, f, e, r}) sub->add_option("--config", config_path, "Flat key = value file of flag defaults");

  try {
    std::vector<std::string> full = args;
    if (auto cfg = detail::find_config_path(args); cfg && !args.empty()) {
      if (const CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
        auto extra = detail::config_arguments(*sub, *cfg);
        full.insert(full.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::reverse(full.begin(), full.end());
    app.parse(full);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return detail::cmd_synth(synth, out);
    if (f->parsed()) return detail::cmd_featurize(feat, out);
    if (e->parsed()) return detail::cmd_evaluate(ev, out);
    return detail::cmd_report(rep, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace vitalsforge::cli
