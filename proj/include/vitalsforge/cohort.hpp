#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vitalsforge/detail/common.hpp"
#include "vitalsforge/stats.hpp"

namespace vitalsforge {

// Ordinal order fixes feature column order everywhere.
enum class VitalKind : std::uint8_t { heart_rate = 0, sbp, dbp, resp_rate, temp_c, spo2, glucose };

inline constexpr std::size_t kVitalCount = 7;
inline constexpr std::array<VitalKind, kVitalCount> kAllVitals = {
    VitalKind::heart_rate, VitalKind::sbp,  VitalKind::dbp,    VitalKind::resp_rate,
    VitalKind::temp_c,     VitalKind::spo2, VitalKind::glucose};

inline constexpr std::size_t index_of(VitalKind k) noexcept { return static_cast<std::size_t>(k); }

inline constexpr std::string_view vital_id(VitalKind k) noexcept {
  constexpr std::array<std::string_view, kVitalCount> ids = {
      "heart_rate", "sbp", "dbp", "resp_rate", "temp_c", "spo2", "glucose"};
  return ids[index_of(k)];
}

inline std::optional<VitalKind> parse_vital_id(std::string_view id) {
  for (VitalKind k : kAllVitals)
    if (vital_id(k) == id) return k;
  return std::nullopt;
}

// First day of an ICU stay, in minutes.
inline constexpr std::int64_t kFirstDayMinutes = 1440;

struct Observation {
  std::int64_t offset_minutes = 0;
  double value = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct VitalSeries {
  VitalKind kind = VitalKind::heart_rate;
  std::vector<Observation> observations;  // ascending offset_minutes

  bool empty() const noexcept { return observations.empty(); }
  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) out.push_back(o.value);
    return out;
  }
  void sort() {
    std::stable_sort(observations.begin(), observations.end(),
                     [](const Observation& a, const Observation& b) { return a.offset_minutes < b.offset_minutes; });
  }

  friend bool operator==(const VitalSeries&, const VitalSeries&) = default;
};

enum class Gender : std::uint8_t { M, F };

struct IcuStay {
  std::string stay_id;
  std::string patient_id;
  double los_days = 1.0;
  bool mortality = false;
  double age_years = 0.0;
  Gender gender = Gender::M;
  std::optional<double> height_cm;
  std::optional<double> weight_kg;
  std::array<VitalSeries, kVitalCount> series = make_empty_series();

  VitalSeries& vital(VitalKind k) { return series[index_of(k)]; }
  const VitalSeries& vital(VitalKind k) const { return series[index_of(k)]; }

  static std::array<VitalSeries, kVitalCount> make_empty_series() {
    std::array<VitalSeries, kVitalCount> s;
    for (VitalKind k : kAllVitals) s[index_of(k)].kind = k;
    return s;
  }

  friend bool operator==(const IcuStay&, const IcuStay&) = default;
};

enum class Provenance : std::uint8_t { loaded, synthetic };

struct Cohort {
  std::vector<IcuStay> stays;
  Provenance provenance = Provenance::loaded;
  std::optional<std::uint64_t> seed;

  std::size_t size() const noexcept { return stays.size(); }
  bool empty() const noexcept { return stays.empty(); }

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

// Throws DataError on duplicate stay ids.
inline void validate_unique_stays(const Cohort& cohort) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : cohort.stays)
    if (!seen.insert(s.stay_id).second) throw DataError("duplicate stay_id '" + s.stay_id + "'");
}

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
  bool min_exclusive = false;

  bool contains(double v) const noexcept {
    if (!std::isfinite(v)) return false;
    if (min_exclusive ? !(v > min) : !(v >= min)) return false;
    return v <= max;
  }
};

// Plausibility screens for charted vitals; not clinical reference ranges.
struct OutlierBounds {
  std::array<ValueRange, kVitalCount> ranges{};

  static OutlierBounds defaults() {
    OutlierBounds b;
    b.ranges[index_of(VitalKind::heart_rate)] = {10.0, 300.0};
    b.ranges[index_of(VitalKind::sbp)] = {20.0, 300.0};
    b.ranges[index_of(VitalKind::dbp)] = {5.0, 200.0};
    b.ranges[index_of(VitalKind::resp_rate)] = {1.0, 70.0};
    b.ranges[index_of(VitalKind::temp_c)] = {25.0, 45.0};
    b.ranges[index_of(VitalKind::spo2)] = {0.0, 100.0, true};
    b.ranges[index_of(VitalKind::glucose)] = {10.0, 1500.0};
    return b;
  }

  const ValueRange& operator[](VitalKind k) const { return ranges[index_of(k)]; }
  ValueRange& operator[](VitalKind k) { return ranges[index_of(k)]; }

  void validate() const {
    for (VitalKind k : kAllVitals)
      if (!(ranges[index_of(k)].min < ranges[index_of(k)].max))
        throw std::invalid_argument("outlier bounds for " + std::string(vital_id(k)) + " need min < max");
  }
};

// Drops stays shorter than one day and observations past the first 24 hours.
inline Cohort filter_first_day(Cohort cohort) {
  std::erase_if(cohort.stays, [](const IcuStay& s) { return s.los_days < 1.0; });
  for (auto& stay : cohort.stays)
    for (auto& series : stay.series)
      std::erase_if(series.observations,
                    [](const Observation& o) { return o.offset_minutes >= kFirstDayMinutes; });
  return cohort;
}

// Drops non-finite and out-of-range observations. Never drops stays.
inline Cohort filter_outliers(Cohort cohort, const OutlierBounds& bounds = OutlierBounds::defaults()) {
  bounds.validate();
  for (auto& stay : cohort.stays)
    for (auto& series : stay.series) {
      const ValueRange& range = bounds[series.kind];
      std::erase_if(series.observations, [&](const Observation& o) { return !range.contains(o.value); });
    }
  return cohort;
}

struct ImputationMeans {
  std::array<double, kVitalCount> vitals{};
  double height_cm = 0.0;
  double weight_kg = 0.0;
};

// Fills empty vital series with one observation at offset 0 holding the mean of
// per-stay means, and missing height/weight with their cohort means. When
// `reference` is given, only those stay indices contribute to the means.
inline std::pair<Cohort, ImputationMeans> impute_missing(
    Cohort cohort, std::optional<std::span<const std::size_t>> reference = std::nullopt) {
  std::vector<std::size_t> rows;
  if (reference) {
    rows.assign(reference->begin(), reference->end());
  } else {
    rows.resize(cohort.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }

  ImputationMeans means;
  for (VitalKind k : kAllVitals) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r : rows) {
      const auto& series = cohort.stays.at(r).vital(k);
      if (series.empty()) continue;
      double s = 0.0;
      for (const auto& o : series.observations) s += o.value;
      sum += s / static_cast<double>(series.observations.size());
      ++count;
    }
    if (count == 0)
      throw DataError("cannot impute " + std::string(vital_id(k)) + ": no stay has any observation");
    means.vitals[index_of(k)] = sum / static_cast<double>(count);
  }

  auto anthropometric_mean = [&](auto member, const char* name) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r : rows)
      if (const auto& v = cohort.stays[r].*member) {
        sum += *v;
        ++count;
      }
    if (count == 0) throw DataError(std::string("cannot impute ") + name + ": no stay has a value");
    return sum / static_cast<double>(count);
  };
  means.height_cm = anthropometric_mean(&IcuStay::height_cm, "height_cm");
  means.weight_kg = anthropometric_mean(&IcuStay::weight_kg, "weight_kg");

  for (auto& stay : cohort.stays) {
    for (VitalKind k : kAllVitals) {
      auto& series = stay.vital(k);
      if (series.empty()) series.observations.push_back({0, means.vitals[index_of(k)]});
    }
    if (!stay.height_cm) stay.height_cm = means.height_cm;
    if (!stay.weight_kg) stay.weight_kg = means.weight_kg;
  }
  return {std::move(cohort), means};
}

// Even counts use the mean of the two middle values.
inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct LabelSet {
  std::vector<int> mortality;   // 1 = nonsurvival
  std::vector<int> los_binary;  // 1 = LOS above the cohort median
  std::vector<double> los_days;
  double los_median = 0.0;
};

inline LabelSet derive_labels(const Cohort& cohort) {
  if (cohort.empty()) throw std::invalid_argument("derive_labels: empty cohort");
  LabelSet labels;
  labels.los_days.reserve(cohort.size());
  for (const auto& s : cohort.stays) {
    labels.mortality.push_back(s.mortality ? 1 : 0);
    labels.los_days.push_back(s.los_days);
  }
  labels.los_median = median(labels.los_days);
  for (double los : labels.los_days) labels.los_binary.push_back(los > labels.los_median ? 1 : 0);
  return labels;
}

// Full preprocessing chain used by the CLI: first-day window, outlier screen, imputation.
inline std::pair<Cohort, ImputationMeans> preprocess(Cohort cohort,
                                                     const OutlierBounds& bounds = OutlierBounds::defaults()) {
  return impute_missing(filter_outliers(filter_first_day(std::move(cohort)), bounds));
}

}  // namespace vitalsforge
