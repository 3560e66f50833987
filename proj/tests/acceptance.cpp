// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vitalsforge/vitalsforge.hpp"

namespace fs = std::filesystem;
using namespace vitalsforge;
using namespace vitalsforge::evaluation;
using learners::AlgorithmId;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " [" << detail << "]\n" << std::flush;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double auroc_of(const EvalReport& r, AlgorithmId a) {
  for (const auto& res : r.results)
    if (res.algorithm == a && res.classification && res.classification->auroc) return *res.classification->auroc;
  return NAN;
}

void criterion1() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  std::vector<double> v(100000);
  for (auto& x : v) x = z(rng);
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = tail_stats(v, 0.25, 0.75);
  const double secs = seconds_since(t0);
  const bool ok = t.quantile_percentage >= 0.49 && t.quantile_percentage <= 0.51 && t.modified_mean >= -0.02 &&
                  t.modified_mean <= 0.02 && t.modified_sd >= 1.34 && t.modified_sd <= 1.39 && secs < 1.0;
  report(1, ok, "tail_stats on 100000 standard normals",
         "qp=" + num(t.quantile_percentage) + " mean=" + num(t.modified_mean) + " sd=" + num(t.modified_sd) +
             " time=" + num(secs) + "s");
}

void criterion2() {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto t = tail_stats(v, 0.25, 0.75);
  const bool ok = std::fabs(t.quantile_percentage - 0.6) <= 1e-9 && std::fabs(t.modified_mean - 5.5) <= 1e-9 &&
                  std::fabs(t.modified_sd - std::sqrt(15.5)) <= 1e-9;
  report(2, ok, "tail_stats worked example {1..10}",
         "qp=" + num(t.quantile_percentage) + " mean=" + num(t.modified_mean) + " sd=" + num(t.modified_sd));
}

void criterion3() {
  // 500 log-spaced probabilities in [1e-10, 0.5] and their complements.
  double worst = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < 500; ++i) {
    const double p = std::pow(10.0, -10.0 + (10.0 + std::log10(0.5)) * i / 499.0);
    for (double q : {p, 1.0 - p}) {
      worst = std::max(worst, std::fabs(stats::normal_ppf(q) - oracle::normal_quantile(q)));
      ++count;
    }
  }
  report(3, worst <= 1e-8 && count == 1000, "normal_ppf against bisection oracle",
         std::to_string(count) + " probabilities, max error " + num(worst));
}

void criterion4() {
  std::mt19937_64 rng(4);
  double worst_pairs = 0.0, worst_area = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 49;
    const int levels = 2 + static_cast<int>(rng() % 10);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / levels;
      y[i] = static_cast<int>(rng() % 2);
    }
    // Both classes must be present.
    const std::size_t j = rng() % n;
    y[j] = 1;
    y[(j + 1) % n] = 0;
    const double a = auroc(s, y);
    const auto pts = roc_points(s, y);
    worst_pairs = std::max(worst_pairs, std::fabs(a - oracle::pair_auroc(s, y)));
    worst_area = std::max(worst_area, std::fabs(trapezoid_area(pts) - a));
  }
  report(4, worst_pairs <= 1e-12 && worst_area <= 1e-12, "auroc against pair counting, 200 tied instances",
         "max |auroc - pairs|=" + num(worst_pairs) + " max |area - auroc|=" + num(worst_area));
}

void criterion5() {
  const ConfusionCounts c{8, 5, 15, 2};
  const auto m = classification_metrics(c);
  auto near5 = [](double a, double b) { return std::fabs(a - b) <= 5e-6; };
  bool ok = m.sensitivity->value == 0.8 && m.specificity->value == 0.75 && near5(m.ppv->value, 0.61538) &&
            near5(m.npv->value, 0.88235) && near5(m.accuracy->value, 0.76667);
  bool ci_ok = true;
  for (const auto& p : {m.accuracy, m.sensitivity, m.specificity, m.ppv, m.npv})
    ci_ok = ci_ok && p && p->lower >= 0.0 && p->upper <= 1.0 && p->lower <= p->value && p->value <= p->upper;
  for (std::uint64_t n = 1; n <= 60; ++n)
    for (std::uint64_t x = 0; x <= n; ++x) {
      const auto p = wilson(x, n);
      ci_ok = ci_ok && p.lower >= 0.0 && p.upper <= 1.0;
    }
  report(5, ok && ci_ok, "hand confusion example and Wilson bounds",
         "sens=" + num(m.sensitivity->value) + " spec=" + num(m.specificity->value) + " ppv=" + num(m.ppv->value) +
             " npv=" + num(m.npv->value) + " acc=" + num(m.accuracy->value));
}

struct Runs {
  EvalReport mortality, los;
};

Runs run_synthetic_experiments(const Cohort& cohort) {
  const std::vector<AlgorithmId> classifiers(learners::kClassifiers.begin(), learners::kClassifiers.end());
  ExperimentOptions cv;
  cv.k_folds = 10;
  return {run_experiment(cohort, Task::mortality, Approach::quantiles, classifiers, 42, cv),
          run_experiment(cohort, Task::los_binary, Approach::quantiles, classifiers, 42, cv)};
}

void criterion6(const Cohort& cohort) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<AlgorithmId> rf{AlgorithmId::rf};
  ExperimentOptions no_cv;
  no_cv.k_folds = 0;
  double gain[2];
  std::string detail;
  int i = 0;
  for (Task t : {Task::mortality, Task::los_binary}) {
    const double b = auroc_of(run_experiment(cohort, t, Approach::baseline, rf, 42, no_cv), AlgorithmId::rf);
    const double q = auroc_of(run_experiment(cohort, t, Approach::quantiles, rf, 42, no_cv), AlgorithmId::rf);
    gain[i++] = q - b;
    detail += std::string(task_name(t)) + " " + num(b) + "->" + num(q) + "; ";
  }
  const double secs = seconds_since(t0);
  report(6, gain[0] >= 0.02 && gain[1] >= 0.02 && secs < 300.0, "RF quantiles AUROC beats baseline by >= 0.02",
         detail + "time=" + num(secs) + "s");
}

void criterion7(const Runs& r) {
  bool ok = true;
  std::string detail;
  for (const EvalReport* rep : {&r.mortality, &r.los}) {
    for (const auto& res : rep->results) {
      const double cv = res.cv->mean, test = res.classification->metrics.accuracy->value;
      ok = ok && std::fabs(cv - test) < 0.05;
      detail += std::string(task_name(rep->task)) + "/" + std::string(learners::algorithm_name(res.algorithm)) + " " +
                num(std::fabs(cv - test)) + "; ";
    }
  }
  report(7, ok, "|CV accuracy - test accuracy| < 0.05 for every classifier", detail);
}

void criterion8(const Runs& r) {
  bool ok = true;
  std::string detail = "positive rate " + num(r.mortality.metadata.test_positive_rate) + "; ";
  for (const auto& res : r.mortality.results) {
    const auto& m = res.classification->metrics;
    ok = ok && m.specificity && m.sensitivity && m.specificity->value > m.sensitivity->value;
    detail += std::string(learners::algorithm_name(res.algorithm)) + " spec " + num(m.specificity->value) + " sens " +
              num(m.sensitivity->value) + "; ";
  }
  report(8, ok, "mortality specificity > sensitivity for every classifier", detail);
}

void criterion9(const Cohort& cohort) {
  // Fixture: ten test stays, four of them from patients with training stays.
  Cohort fixture;
  for (int i = 0; i < 20; ++i) {
    IcuStay s;
    s.stay_id = "S" + std::to_string(i);
    s.patient_id = "P" + std::to_string(i < 14 && i >= 10 ? i - 10 : i);
    fixture.stays.push_back(s);
  }
  SplitPlan plan;
  for (std::size_t i = 0; i < 10; ++i) plan.train.push_back(i);
  for (std::size_t i = 10; i < 20; ++i) plan.test.push_back(i);
  const auto dropped = remove_patient_overlap(plan, fixture);
  bool ok = dropped.test == std::vector<std::size_t>{14, 15, 16, 17, 18, 19} && dropped.train == plan.train;

  // Synthetic cohort: survivors are exactly the test stays whose patient has no training stay.
  const auto split = random_split(cohort.size(), 0.75, vitalsforge::detail::child_seed(42, 0));
  const auto kept = remove_patient_overlap(split, cohort);
  std::vector<std::size_t> expected;
  for (std::size_t t : split.test) {
    bool shared = false;
    for (std::size_t r : split.train) shared = shared || cohort.stays[r].patient_id == cohort.stays[t].patient_id;
    if (!shared) expected.push_back(t);
  }
  ok = ok && kept.test == expected;

  const std::vector<AlgorithmId> algos{AlgorithmId::lr, AlgorithmId::rf};
  ExperimentOptions base;
  base.k_folds = 0;
  ExperimentOptions drop = base;
  drop.drop_overlap = true;
  const auto a = run_experiment(cohort, Task::mortality, Approach::quantiles, algos, 42, base);
  const auto b = run_experiment(cohort, Task::mortality, Approach::quantiles, algos, 42, drop);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    const auto &ma = a.results[i].classification->metrics, &mb = b.results[i].classification->metrics;
    worst = std::max(worst, std::fabs(ma.accuracy->value - mb.accuracy->value));
    worst = std::max(worst, std::fabs(ma.sensitivity->value - mb.sensitivity->value));
    worst = std::max(worst, std::fabs(ma.specificity->value - mb.specificity->value));
    worst = std::max(worst, std::fabs(*a.results[i].classification->auroc - *b.results[i].classification->auroc));
  }
  ok = ok && worst < 0.05 && b.metadata.n_test == expected.size();
  report(9, ok, "patient-overlap removal drops exactly shared stays; metrics stable",
         "test " + std::to_string(split.test.size()) + "->" + std::to_string(kept.test.size()) +
             ", max metric change " + num(worst));
}

void criterion10(const fs::path& work) {
  const std::string bin = VITALSFORGE_CLI_PATH;
  const fs::path cohort = work / "det_cohort";
  auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
  bool ok = sh(bin + " synth --n-stays 800 --seed 42 --out " + cohort.string()) == 0;
  for (const char* run : {"run_a", "run_b"})
    ok = ok && sh(bin + " evaluate --cohort " + cohort.string() + " --task mortality --approach quantiles --k-folds 3 --out " +
                  (work / run).string()) == 0;
  std::size_t compared = 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(work / "run_a")) {
      const fs::path other = work / "run_b" / entry.path().filename();
      ok = ok && fs::exists(other) && slurp(entry.path()) == slurp(other);
      ++compared;
    }
    std::size_t in_b = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(work / "run_b")) ++in_b;
    ok = ok && in_b == compared && compared == 15;
  }
  report(10, ok, "two identical evaluate runs give byte-identical outputs", std::to_string(compared) + " files compared");
}

void criterion11() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  auto blobs = [&](std::size_t n, double shift, std::vector<int>& y) {
    FeatureMatrix m({"a", "b", "c"});
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % 2);
      m.add_row("s" + std::to_string(i), std::vector<double>{z(rng) + shift * label, z(rng), z(rng)});
      y.push_back(label);
    }
    return m;
  };
  std::string detail;

  std::vector<int> y;
  auto x = blobs(200, 0.5, y);
  auto knn_p = learners::default_params(AlgorithmId::knn);
  knn_p.set("k", 1);
  const bool knn_ok = learners::predict_label(learners::train_classifier(AlgorithmId::knn, x, y, knn_p, 0), x) == y;
  detail += std::string("knn ") + (knn_ok ? "exact" : "mismatch") + "; ";

  x = blobs(200, 8.0, y);
  const auto lr_pred =
      learners::predict_label(learners::train_classifier(AlgorithmId::lr, x, y, learners::default_params(AlgorithmId::lr), 0), x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += lr_pred[i] == y[i] ? 1 : 0;
  const double lr_acc = static_cast<double>(hit) / static_cast<double>(y.size());
  detail += "lr acc " + num(lr_acc) + "; ";

  FeatureMatrix lin({"a", "b", "c"});
  std::vector<double> target;
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> row{u(rng), u(rng), u(rng)};
    lin.add_row("r" + std::to_string(i), row);
    target.push_back(-1.25 + 0.5 * row[0] + 3.0 * row[1] - 2.0 * row[2]);
  }
  const auto mlr_pred = learners::predict_value(
      learners::train_regressor(AlgorithmId::mlr, lin, target, learners::default_params(AlgorithmId::mlr), 0), lin);
  double mlr_err = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) mlr_err = std::max(mlr_err, std::fabs(mlr_pred[i] - target[i]));
  detail += "mlr max err " + num(mlr_err) + "; ";

  x = blobs(300, 1.0, y);
  learners::Dataset d(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) d(r, c) = x.at(r, c);
  learners::BoostingFitInfo boost;
  learners::BoostingOptions bopt;
  bopt.n_rounds = 100;
  learners::fit_boosted_trees(d, y, bopt, &boost);
  bool monotone = boost.train_loss.size() == 101;
  for (std::size_t r = 1; r < boost.train_loss.size(); ++r) monotone = monotone && boost.train_loss[r] <= boost.train_loss[r - 1];
  detail += std::string("gbt loss ") + (monotone ? "monotone" : "rose") + "; ";

  learners::SvmFitInfo svm;
  const double tol = 1e-3;
  learners::fit_svc(d, y, 1.0, learners::scale_gamma(d), tol, 10'000'000, &svm);
  detail += "smo gap " + num(svm.kkt_gap) + " (tol " + num(tol) + ")";

  report(11, knn_ok && lr_acc >= 0.99 && mlr_err <= 1e-8 && monotone && svm.converged && svm.kkt_gap <= tol,
         "learner oracles", detail);
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "vitalsforge_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  auto guarded = [](int id, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, "threw", e.what());
    }
  };

  guarded(1, criterion1);
  guarded(2, criterion2);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);

  SynthConfig cfg;
  cfg.n_stays = 5000;
  const Cohort cohort = preprocess(synthesize_cohort(cfg, 42)).first;

  guarded(6, [&] { criterion6(cohort); });
  Runs runs;
  bool have_runs = false;
  try {
    runs = run_synthetic_experiments(cohort);
    have_runs = true;
  } catch (const std::exception& e) {
    report(7, false, "threw", e.what());
    report(8, false, "threw", e.what());
  }
  if (have_runs) {
    guarded(7, [&] { criterion7(runs); });
    guarded(8, [&] { criterion8(runs); });
  }
  guarded(9, [&] { criterion9(cohort); });
  guarded(10, [&] { criterion10(work); });
  guarded(11, criterion11);

  fs::remove_all(work);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
