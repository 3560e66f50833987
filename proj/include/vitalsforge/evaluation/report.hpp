#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/evaluation/experiment.hpp"

namespace vitalsforge::evaluation {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kReportFormatName = "vitalsforge.report";
inline constexpr int kReportSignificantDigits = 6;

namespace detail {

using nlohmann::json;

inline double r6(double v) { return vitalsforge::detail::round_significant(v, kReportSignificantDigits); }

inline json proportion_json(const std::optional<Proportion>& p) {
  if (!p) return nullptr;
  return {{"value", r6(p->value)},
          {"ci_lower", r6(p->lower)},
          {"ci_upper", r6(p->upper)},
          {"successes", p->successes},
          {"trials", p->trials}};
}

inline std::optional<Proportion> proportion_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Proportion{j.at("value").get<double>(), j.at("ci_lower").get<double>(), j.at("ci_upper").get<double>(),
                    j.at("successes").get<std::uint64_t>(), j.at("trials").get<std::uint64_t>()};
}

inline json params_json(const HyperParams& p) {
  json out = json::object();
  for (const auto& [k, v] : p.values) out[k] = r6(v);
  return out;
}

}  // namespace detail

// Canonical document: object keys sorted, every real rounded to 6 significant digits.
inline nlohmann::json report_to_json(const EvalReport& report) {
  using detail::r6;
  using nlohmann::json;
  const auto& m = report.metadata;
  json meta = {{"seed", m.seed},
               {"cohort_size", m.cohort_size},
               {"n_train", m.n_train},
               {"n_test", m.n_test},
               {"n_test_before_overlap_removal", m.n_test_before_overlap_removal},
               {"overlap_removed", m.overlap_removed},
               {"excluded_features", m.excluded_features},
               {"ablation", !m.excluded_features.empty()},
               {"feature_columns", m.feature_columns},
               {"n_features", m.feature_columns.size()},
               {"k_folds", m.k_folds},
               {"train_fraction", r6(m.train_fraction)},
               {"stratified", m.stratified},
               {"imputation", m.imputed_from_training ? "training" : "cohort"},
               {"low_q", r6(m.low_q)},
               {"high_q", r6(m.high_q)},
               {"los_median", r6(m.los_median)}};
  if (is_classification(report.task)) meta["test_positive_rate"] = r6(m.test_positive_rate);

  json algos = json::array();
  for (const auto& r : report.results) {
    json a = {{"algorithm", std::string(learners::algorithm_name(r.algorithm))}, {"params", detail::params_json(r.params)}};
    if (r.cv) {
      json folds = json::array();
      for (double f : r.cv->folds) folds.push_back(r6(f));
      a["cv"] = {{"metric", r.cv->metric}, {"folds", folds}, {"mean", r6(r.cv->mean)}, {"sd", r6(r.cv->sd)}};
    } else {
      a["cv"] = nullptr;
    }
    if (r.classification) {
      const auto& c = *r.classification;
      json roc = json::array();
      for (const auto& p : c.roc) roc.push_back({r6(p.fpr), r6(p.tpr)});
      json cal = json::array();
      for (const auto& b : c.calibration)
        cal.push_back({{"mean_predicted", r6(b.mean_predicted)},
                       {"fraction_positive", r6(b.fraction_positive)},
                       {"count", b.count}});
      json fit = nullptr;
      if (c.calibration_fit) fit = {{"slope", r6(c.calibration_fit->slope)}, {"intercept", r6(c.calibration_fit->intercept)}};
      a["test"] = {{"confusion", {{"tp", c.confusion.tp}, {"fp", c.confusion.fp}, {"tn", c.confusion.tn}, {"fn", c.confusion.fn}}},
                   {"accuracy", detail::proportion_json(c.metrics.accuracy)},
                   {"sensitivity", detail::proportion_json(c.metrics.sensitivity)},
                   {"specificity", detail::proportion_json(c.metrics.specificity)},
                   {"ppv", detail::proportion_json(c.metrics.ppv)},
                   {"npv", detail::proportion_json(c.metrics.npv)},
                   {"auroc", c.auroc ? json(r6(*c.auroc)) : json(nullptr)},
                   {"roc", roc},
                   {"calibration", cal},
                   {"calibration_fit", fit}};
    } else if (r.regression) {
      a["test"] = {{"mae", r6(r.regression->mae)}, {"rmse", r6(r.regression->rmse)}};
    }
    algos.push_back(std::move(a));
  }
  return {{"format", kReportFormatName},
          {"version", kReportFormatVersion},
          {"task", std::string(task_name(report.task))},
          {"approach", std::string(approach_name(report.approach))},
          {"metadata", meta},
          {"algorithms", algos}};
}

inline std::string report_json_text(const EvalReport& report) { return report_to_json(report).dump(2) + "\n"; }

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kReportFormatName) throw std::runtime_error("report json: not a report document");
    if (j.at("version").get<int>() != kReportFormatVersion)
      throw std::runtime_error("report json: unsupported version " + std::to_string(j.at("version").get<int>()));
    EvalReport r;
    auto task = parse_task(j.at("task").get<std::string>());
    auto approach = parse_approach(j.at("approach").get<std::string>());
    if (!task || !approach) throw std::runtime_error("report json: unknown task or approach");
    r.task = *task;
    r.approach = *approach;
    const auto& m = j.at("metadata");
    auto& meta = r.metadata;
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.cohort_size = m.at("cohort_size").get<std::size_t>();
    meta.n_train = m.at("n_train").get<std::size_t>();
    meta.n_test = m.at("n_test").get<std::size_t>();
    meta.n_test_before_overlap_removal = m.at("n_test_before_overlap_removal").get<std::size_t>();
    meta.overlap_removed = m.at("overlap_removed").get<bool>();
    m.at("excluded_features").get_to(meta.excluded_features);
    m.at("feature_columns").get_to(meta.feature_columns);
    meta.k_folds = m.at("k_folds").get<std::size_t>();
    meta.train_fraction = m.at("train_fraction").get<double>();
    meta.stratified = m.at("stratified").get<bool>();
    meta.imputed_from_training = m.at("imputation").get<std::string>() == "training";
    meta.low_q = m.at("low_q").get<double>();
    meta.high_q = m.at("high_q").get<double>();
    meta.los_median = m.at("los_median").get<double>();
    if (m.contains("test_positive_rate")) meta.test_positive_rate = m.at("test_positive_rate").get<double>();

    for (const auto& a : j.at("algorithms")) {
      AlgorithmResult res;
      auto algo = learners::parse_algorithm(a.at("algorithm").get<std::string>());
      if (!algo) throw std::runtime_error("report json: unknown algorithm");
      res.algorithm = *algo;
      a.at("params").get_to(res.params.values);
      if (!a.at("cv").is_null()) {
        CvSummary cv;
        const auto& c = a.at("cv");
        cv.metric = c.at("metric").get<std::string>();
        c.at("folds").get_to(cv.folds);
        cv.mean = c.at("mean").get<double>();
        cv.sd = c.at("sd").get<double>();
        res.cv = std::move(cv);
      }
      const auto& t = a.at("test");
      if (is_classification(r.task)) {
        ClassificationResult c;
        const auto& cm = t.at("confusion");
        c.confusion = {cm.at("tp").get<std::uint64_t>(), cm.at("fp").get<std::uint64_t>(),
                       cm.at("tn").get<std::uint64_t>(), cm.at("fn").get<std::uint64_t>()};
        c.metrics = {detail::proportion_from(t.at("accuracy")), detail::proportion_from(t.at("sensitivity")),
                     detail::proportion_from(t.at("specificity")), detail::proportion_from(t.at("ppv")),
                     detail::proportion_from(t.at("npv"))};
        if (!t.at("auroc").is_null()) c.auroc = t.at("auroc").get<double>();
        for (const auto& p : t.at("roc")) c.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        for (const auto& b : t.at("calibration"))
          c.calibration.push_back({b.at("mean_predicted").get<double>(), b.at("fraction_positive").get<double>(),
                                   b.at("count").get<std::size_t>()});
        if (!t.at("calibration_fit").is_null())
          c.calibration_fit = CalibrationFit{t.at("calibration_fit").at("slope").get<double>(),
                                             t.at("calibration_fit").at("intercept").get<double>()};
        res.classification = std::move(c);
      } else {
        res.regression = RegressionErrors{t.at("mae").get<double>(), t.at("rmse").get<double>()};
      }
      r.results.push_back(std::move(res));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("report json: ") + e.what());
  }
}

inline EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

// CSV and SVG renderings. Values are printed with the shortest round-trip form,
// so the SVG data-points attribute and the sibling CSV hold identical strings.

inline std::string roc_csv(const ClassificationResult& c) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : c.roc)
    out += vitalsforge::detail::format_double(p.fpr) + "," + vitalsforge::detail::format_double(p.tpr) + "\n";
  return out;
}

inline std::string calibration_csv(const ClassificationResult& c) {
  std::string out = "mean_predicted,fraction_positive,count\n";
  for (const auto& b : c.calibration)
    out += vitalsforge::detail::format_double(b.mean_predicted) + "," +
           vitalsforge::detail::format_double(b.fraction_positive) + "," + std::to_string(b.count) + "\n";
  return out;
}

namespace detail {

inline constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                        "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

inline std::string px(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

// Unit-square plot with axes, ticks, a dashed diagonal reference, one polyline per series and a legend.
inline std::string unit_square_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                                   const std::vector<Series>& series) {
  constexpr double left = 70, top = 40, size = 400, width = 680, height = 510;
  auto sx = [&](double v) { return px(left + v * size); };
  auto sy = [&](double v) { return px(top + (1.0 - v) * size); };
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) + "\" height=\"" + px(height) +
       "\" viewBox=\"0 0 " + px(width) + " " + px(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<title>" + title + "</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + px(width) + "\" height=\"" + px(height) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(left + size / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
  s += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(size) + "\" height=\"" + px(size) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    const std::string lab = vitalsforge::detail::format_double(v);
    s += "<line x1=\"" + sx(v) + "\" y1=\"" + sy(0) + "\" x2=\"" + sx(v) + "\" y2=\"" + px(top + size + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + sx(v) + "\" y=\"" + px(top + size + 19) + "\" text-anchor=\"middle\">" + lab + "</text>\n";
    s += "<line x1=\"" + px(left - 5) + "\" y1=\"" + sy(v) + "\" x2=\"" + sx(0) + "\" y2=\"" + sy(v) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(left - 8) + "\" y=\"" + px(top + (1.0 - v) * size + 4) + "\" text-anchor=\"end\">" + lab +
         "</text>\n";
  }
  s += "<text x=\"" + px(left + size / 2) + "\" y=\"" + px(top + size + 40) + "\" text-anchor=\"middle\">" + x_label +
       "</text>\n";
  s += "<text x=\"18\" y=\"" + px(top + size / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       px(top + size / 2) + ")\">" + y_label + "</text>\n";
  s += "<line x1=\"" + sx(0) + "\" y1=\"" + sy(0) + "\" x2=\"" + sx(1) + "\" y2=\"" + sy(1) +
       "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& ser = series[i];
    std::string pts, data;
    for (const auto& [x, y] : ser.points) {
      if (!pts.empty()) {
        pts += ' ';
        data += ' ';
      }
      pts += sx(x) + "," + sy(y);
      data += vitalsforge::detail::format_double(x) + "," + vitalsforge::detail::format_double(y);
    }
    const char* color = kPalette[i % kPalette.size()];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" data-series=\"" +
         ser.label + "\" data-points=\"" + data + "\" points=\"" + pts + "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    s += "<line x1=\"" + px(left + size + 20) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(left + size + 45) + "\" y2=\"" +
         px(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + px(left + size + 52) + "\" y=\"" + px(ly + 4) + "\">" + ser.label + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace detail

inline std::string roc_svg(const EvalReport& report) {
  std::vector<detail::Series> series;
  for (const auto& r : report.results) {
    if (!r.classification || r.classification->roc.empty()) continue;
    detail::Series s;
    s.label = std::string(learners::algorithm_name(r.algorithm));
    if (r.classification->auroc) s.label += " (AUROC " + vitalsforge::detail::format_double(*r.classification->auroc) + ")";
    for (const auto& p : r.classification->roc) s.points.emplace_back(p.fpr, p.tpr);
    series.push_back(std::move(s));
  }
  return detail::unit_square_svg("ROC: " + std::string(task_name(report.task)) + ", " +
                                     std::string(approach_name(report.approach)),
                                 "False positive rate", "True positive rate", series);
}

inline std::string calibration_svg(const EvalReport& report) {
  std::vector<detail::Series> series;
  for (const auto& r : report.results) {
    if (!r.classification) continue;
    detail::Series s;
    s.label = std::string(learners::algorithm_name(r.algorithm));
    for (const auto& b : r.classification->calibration) s.points.emplace_back(b.mean_predicted, b.fraction_positive);
    series.push_back(std::move(s));
  }
  return detail::unit_square_svg("Calibration: " + std::string(task_name(report.task)) + ", " +
                                     std::string(approach_name(report.approach)),
                                 "Mean predicted probability", "Observed fraction positive", series);
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace detail

// Per-algorithm roc_<algo>.csv and calibration_<algo>.csv plus roc.svg and
// calibration.svg. Regression reports have no plot outputs.
inline std::vector<std::filesystem::path> write_plot_outputs(const EvalReport& report,
                                                             const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (!is_classification(report.task)) return written;
  std::filesystem::create_directories(dir);
  for (const auto& r : report.results) {
    if (!r.classification) continue;
    const std::string name(learners::algorithm_name(r.algorithm));
    written.push_back(dir / ("roc_" + name + ".csv"));
    detail::write_text(written.back(), roc_csv(*r.classification));
    written.push_back(dir / ("calibration_" + name + ".csv"));
    detail::write_text(written.back(), calibration_csv(*r.classification));
  }
  written.push_back(dir / "roc.svg");
  detail::write_text(written.back(), roc_svg(report));
  written.push_back(dir / "calibration.svg");
  detail::write_text(written.back(), calibration_svg(report));
  return written;
}

// Writes report.json, then renders plots from the canonical (rounded) document
// so that re-rendering from the file later reproduces the same bytes.
inline std::vector<std::filesystem::path> write_report_outputs(const EvalReport& report,
                                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const nlohmann::json j = report_to_json(report);
  std::vector<std::filesystem::path> written{dir / "report.json"};
  detail::write_text(written.back(), j.dump(2) + "\n");
  auto plots = write_plot_outputs(report_from_json(j), dir);
  written.insert(written.end(), plots.begin(), plots.end());
  return written;
}

// Text table: one row per algorithm, CI in brackets.
inline void print_metrics_table(const EvalReport& report, std::ostream& out) {
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    return s.str();
  };
  auto prop = [&](const std::optional<Proportion>& p) -> std::string {
    if (!p) return "n/a";
    return fmt(p->value) + " [" + fmt(p->lower) + "-" + fmt(p->upper) + "]";
  };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  out << "task " << task_name(report.task) << ", approach " << approach_name(report.approach) << ", train "
      << report.metadata.n_train << ", test " << report.metadata.n_test;
  if (report.metadata.overlap_removed)
    out << " (" << report.metadata.n_test_before_overlap_removal << " before overlap removal)";
  out << "\n";
  if (is_classification(report.task)) {
    out << pad("algorithm", 10) << pad("cv accuracy", 16) << pad("test accuracy", 22) << pad("sensitivity", 22)
        << pad("specificity", 22) << pad("ppv", 22) << pad("npv", 22) << "auroc\n";
    for (const auto& r : report.results) {
      const auto& c = *r.classification;
      out << pad(std::string(learners::algorithm_name(r.algorithm)), 10)
          << pad(r.cv ? fmt(r.cv->mean) + " +/- " + fmt(r.cv->sd) : "n/a", 16) << pad(prop(c.metrics.accuracy), 22)
          << pad(prop(c.metrics.sensitivity), 22) << pad(prop(c.metrics.specificity), 22)
          << pad(prop(c.metrics.ppv), 22) << pad(prop(c.metrics.npv), 22) << (c.auroc ? fmt(*c.auroc) : "n/a")
          << "\n";
    }
  } else {
    out << pad("algorithm", 10) << pad("cv mae", 18) << pad("mae (days)", 12) << "rmse (days)\n";
    for (const auto& r : report.results)
      out << pad(std::string(learners::algorithm_name(r.algorithm)), 10)
          << pad(r.cv ? fmt(r.cv->mean) + " +/- " + fmt(r.cv->sd) : "n/a", 18) << pad(fmt(r.regression->mae), 12)
          << fmt(r.regression->rmse) << "\n";
  }
}

}  // namespace vitalsforge::evaluation
