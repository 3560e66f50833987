#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vitalsforge/cohort.hpp"
#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/stats.hpp"

namespace vitalsforge {

// Summary of the tail observations of one vital series.
struct TailStats {
  double modified_mean = 0.0;
  double modified_sd = 0.0;
  double quantile_percentage = 0.0;  // retained_count / total_count
  std::size_t retained_count = 0;
  std::size_t total_count = 0;
  double q_low = 0.0;
  double q_high = 0.0;
};

inline constexpr double kDefaultLowQuantile = 0.25;
inline constexpr double kDefaultHighQuantile = 0.75;

inline void validate_quantile_pair(double low_p, double high_p) {
  if (!(low_p > 0.0 && low_p < high_p && high_p < 1.0))
    throw std::invalid_argument("quantile probabilities must satisfy 0 < low < high < 1");
}

// Fits a normal to the series, cuts it at the fitted low/high quantiles and
// summarizes the observations in the two tails.
//
// A value is retained when v < q_low or v >= q_high. With sd == 0 both cutoffs
// collapse onto the mean, so every value is retained. If no value is retained
// the original mean/sd are reported with quantile_percentage 0.
inline TailStats tail_stats(std::span<const double> values, double low_p = kDefaultLowQuantile,
                            double high_p = kDefaultHighQuantile) {
  if (values.empty()) throw std::invalid_argument("tail_stats: empty series");
  validate_quantile_pair(low_p, high_p);

  const stats::MeanSd fit = stats::sample_mean_sd(values);
  TailStats out;
  out.total_count = values.size();
  if (fit.sd > 0.0) {
    out.q_low = stats::normal_ppf(low_p, {fit.mean, fit.sd});
    out.q_high = stats::normal_ppf(high_p, {fit.mean, fit.sd});
  } else {
    out.q_low = out.q_high = fit.mean;
  }

  std::vector<double> retained;
  retained.reserve(values.size());
  for (double v : values)
    if (v < out.q_low || v >= out.q_high) retained.push_back(v);

  out.retained_count = retained.size();
  out.quantile_percentage = static_cast<double>(retained.size()) / static_cast<double>(values.size());
  if (retained.empty()) {
    out.modified_mean = fit.mean;
    out.modified_sd = fit.sd;
  } else {
    const stats::MeanSd mod = stats::sample_mean_sd(retained);
    out.modified_mean = mod.mean;
    out.modified_sd = mod.sd;
  }
  return out;
}

// Row-per-stay feature table with named columns, stored row-major.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> schema) : schema_(std::move(schema)) {}

  const std::vector<std::string>& schema() const noexcept { return schema_; }
  const std::vector<std::string>& stay_ids() const noexcept { return stay_ids_; }
  std::size_t rows() const noexcept { return stay_ids_.size(); }
  std::size_t cols() const noexcept { return schema_.size(); }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols(), cols()}; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

  void add_row(std::string stay_id, std::span<const double> values) {
    if (values.size() != cols())
      throw std::invalid_argument("feature row has " + std::to_string(values.size()) + " values, schema has " +
                                  std::to_string(cols()));
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("feature row for '" + stay_id + "' has a non-finite value");
    stay_ids_.push_back(std::move(stay_id));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  std::size_t column_index(std::string_view name) const {
    auto it = std::find(schema_.begin(), schema_.end(), name);
    if (it == schema_.end()) throw std::invalid_argument("unknown feature column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - schema_.begin());
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
  }

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix out(schema_);
    out.stay_ids_.reserve(indices.size());
    out.data_.reserve(indices.size() * cols());
    for (std::size_t i : indices) {
      out.stay_ids_.push_back(stay_ids_.at(i));
      auto r = row(i);
      out.data_.insert(out.data_.end(), r.begin(), r.end());
    }
    return out;
  }

  // Drops the named columns; every name must exist.
  FeatureMatrix without_columns(std::span<const std::string> names) const {
    std::vector<bool> drop(cols(), false);
    for (const auto& n : names) drop[column_index(n)] = true;
    std::vector<std::string> kept;
    for (std::size_t c = 0; c < cols(); ++c)
      if (!drop[c]) kept.push_back(schema_[c]);
    FeatureMatrix out(std::move(kept));
    out.stay_ids_ = stay_ids_;
    out.data_.reserve(rows() * out.cols());
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t c = 0; c < cols(); ++c)
        if (!drop[c]) out.data_.push_back(at(r, c));
    return out;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
  std::vector<std::string> schema_;
  std::vector<std::string> stay_ids_;
  std::vector<double> data_;
};

inline const std::vector<std::string>& baseline_schema() {
  static const std::vector<std::string> names = {
      "HeartRate_mean", "sysbp_mean", "diasbp_mean", "RespRate_mean", "Tempc_mean", "Spo2_mean",
      "Glucose_mean",   "Age",        "GenderM",     "GenderF",       "Height",     "Weight"};
  return names;
}

inline const std::vector<std::string>& quantiles_schema() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = baseline_schema();
    for (const char* s : {"HeartRate_mean_mod", "sysbp_mean_mod", "diasbp_mean_mod", "resprate_mean_mod",
                          "tempc_mean_mod", "spo2_mean_mod", "glucose_mean_mod"})
      n.emplace_back(s);
    for (const char* s : {"heartRate_std_mod", "sysbp_std_mod", "diasbp_std_mod", "resprate_std_mod",
                          "tempc_std_mod", "spo2_std_mod", "glucose_std_mod"})
      n.emplace_back(s);
    for (const char* s : {"HeartRateQuantPer", "SystolicQuantPer", "DiastolicQuantPer", "RespRateQuantPer",
                          "TempCQuantPer", "SPO2QuantPer", "GlucoseQuantPer"})
      n.emplace_back(s);
    return n;
  }();
  return names;
}

namespace detail {

inline void baseline_row(const IcuStay& stay, std::span<double> out) {
  for (VitalKind k : kAllVitals) {
    const auto& series = stay.vital(k);
    if (series.empty())
      throw std::invalid_argument("stay '" + stay.stay_id + "' has no " + std::string(vital_id(k)) +
                                  " observations; impute before featurizing");
    double sum = 0.0;
    for (const auto& o : series.observations) sum += o.value;
    out[index_of(k)] = sum / static_cast<double>(series.observations.size());
  }
  if (!stay.height_cm || !stay.weight_kg)
    throw std::invalid_argument("stay '" + stay.stay_id + "' is missing height or weight; impute before featurizing");
  out[7] = stay.age_years;
  out[8] = stay.gender == Gender::M ? 1.0 : 0.0;
  out[9] = stay.gender == Gender::F ? 1.0 : 0.0;
  out[10] = *stay.height_cm;
  out[11] = *stay.weight_kg;
}

template <class RowFn>
FeatureMatrix assemble(const Cohort& cohort, const std::vector<std::string>& schema, RowFn&& fill) {
  const std::size_t n = cohort.size(), d = schema.size();
  std::vector<double> buffer(n * d);
  detail::parallel_for(n, [&](std::size_t i) { fill(cohort.stays[i], std::span<double>(buffer.data() + i * d, d)); });
  FeatureMatrix m(schema);
  for (std::size_t i = 0; i < n; ++i)
    m.add_row(cohort.stays[i].stay_id, std::span<const double>(buffer.data() + i * d, d));
  return m;
}

}  // namespace detail

// Rows follow cohort order.
inline FeatureMatrix build_baseline_matrix(const Cohort& cohort) {
  return detail::assemble(cohort, baseline_schema(), [](const IcuStay& s, std::span<double> out) {
    detail::baseline_row(s, out);
  });
}

inline FeatureMatrix build_quantiles_matrix(const Cohort& cohort, double low_p = kDefaultLowQuantile,
                                            double high_p = kDefaultHighQuantile) {
  validate_quantile_pair(low_p, high_p);
  return detail::assemble(cohort, quantiles_schema(), [&](const IcuStay& s, std::span<double> out) {
    detail::baseline_row(s, out);
    for (VitalKind k : kAllVitals) {
      const std::size_t v = index_of(k);
      const std::vector<double> values = s.vital(k).values();
      const TailStats t = tail_stats(values, low_p, high_p);
      out[12 + v] = t.modified_mean;
      out[19 + v] = t.modified_sd;
      out[26 + v] = t.quantile_percentage;
    }
  });
}

inline void write_feature_csv(const FeatureMatrix& m, std::ostream& out) {
  out << "stay_id";
  for (const auto& name : m.schema()) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.stay_ids()[r];
    for (double v : m.row(r)) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

inline void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_feature_csv(m, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Pearson correlations among the seven per-stay vital means (first seven columns).
inline stats::CorrelationMatrix vital_correlations(const FeatureMatrix& m) {
  std::vector<stats::NamedColumn> cols;
  for (std::size_t c = 0; c < kVitalCount; ++c) cols.push_back({m.schema()[c], m.column(c)});
  return stats::pearson_matrix(cols);
}

}  // namespace vitalsforge
