#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "vitalsforge/cohort.hpp"
#include "vitalsforge/detail/common.hpp"

namespace vitalsforge {

inline constexpr std::string_view kStaysHeader =
    "stay_id,patient_id,los_days,mortality,age_years,gender,height_cm,weight_kg";
inline constexpr std::string_view kObservationsHeader = "stay_id,vital_id,offset_minutes,value";

namespace detail {

inline bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  return true;
}

inline void expect_header(std::string_view got, std::string_view want, std::size_t line_no, const char* file) {
  auto g = split_csv_line(got);
  auto w = split_csv_line(want);
  if (g != w)
    throw DataError(std::string(file) + ": expected header '" + std::string(want) + "'", line_no);
}

inline double require_double(std::string_view field, const char* name, std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(field, v) || !std::isfinite(v))
    throw DataError("invalid " + std::string(name) + " '" + std::string(field) + "'", line_no);
  return v;
}

}  // namespace detail

// Reads the stays/observations CSV pair. Stays keep file order; each vital
// series is sorted by offset.
inline Cohort parse_cohort(std::istream& stays_in, std::istream& obs_in) {
  Cohort cohort;
  cohort.provenance = Provenance::loaded;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(stays_in, line, line_no)) throw DataError("stays file: missing header", 1);
  detail::expect_header(line, kStaysHeader, line_no, "stays file");
  while (detail::next_line(stays_in, line, line_no)) {
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 8) throw DataError("stays file: expected 8 fields, got " + std::to_string(f.size()), line_no);
    IcuStay s;
    s.stay_id = std::string(f[0]);
    s.patient_id = std::string(f[1]);
    if (s.stay_id.empty()) throw DataError("stays file: empty stay_id", line_no);
    if (s.patient_id.empty()) throw DataError("stays file: empty patient_id", line_no);
    s.los_days = detail::require_double(f[2], "los_days", line_no);
    if (!(s.los_days > 0.0)) throw DataError("stays file: los_days must be positive", line_no);
    if (f[3] == "0") s.mortality = false;
    else if (f[3] == "1") s.mortality = true;
    else throw DataError("stays file: mortality must be 0 or 1", line_no);
    s.age_years = detail::require_double(f[4], "age_years", line_no);
    if (!(s.age_years > 0.0)) throw DataError("stays file: age_years must be positive", line_no);
    if (f[5] == "M") s.gender = Gender::M;
    else if (f[5] == "F") s.gender = Gender::F;
    else throw DataError("stays file: gender must be M or F", line_no);
    auto optional_positive = [&](std::string_view field, const char* name) -> std::optional<double> {
      if (field.empty()) return std::nullopt;
      double v = detail::require_double(field, name, line_no);
      if (!(v > 0.0)) throw DataError(std::string("stays file: ") + name + " must be positive", line_no);
      return v;
    };
    s.height_cm = optional_positive(f[6], "height_cm");
    s.weight_kg = optional_positive(f[7], "weight_kg");
    if (!index.emplace(s.stay_id, cohort.stays.size()).second)
      throw DataError("stays file: duplicate stay_id '" + s.stay_id + "'", line_no);
    cohort.stays.push_back(std::move(s));
  }

  line_no = 0;
  if (detail::next_line(obs_in, line, line_no)) {
    detail::expect_header(line, kObservationsHeader, line_no, "observations file");
    while (detail::next_line(obs_in, line, line_no)) {
      if (detail::trim(line).empty()) continue;
      auto f = detail::split_csv_line(line);
      if (f.size() != 4)
        throw DataError("observations file: expected 4 fields, got " + std::to_string(f.size()), line_no);
      auto it = index.find(std::string(f[0]));
      if (it == index.end())
        throw DataError("observations file: unknown stay_id '" + std::string(f[0]) + "'", line_no);
      auto kind = parse_vital_id(f[1]);
      if (!kind) throw DataError("observations file: unknown vital_id '" + std::string(f[1]) + "'", line_no);
      long long offset = 0;
      if (!detail::parse_int(f[2], offset) || offset < 0)
        throw DataError("observations file: offset_minutes must be a non-negative integer", line_no);
      double value = detail::require_double(f[3], "value", line_no);
      cohort.stays[it->second].vital(*kind).observations.push_back({offset, value});
    }
  }
  for (auto& stay : cohort.stays)
    for (auto& series : stay.series) series.sort();
  return cohort;
}

inline Cohort parse_cohort(const std::filesystem::path& stays_file, const std::filesystem::path& observations_file) {
  std::ifstream stays(stays_file);
  if (!stays) throw std::runtime_error("cannot open " + stays_file.string());
  std::ifstream obs(observations_file);
  if (!obs) throw std::runtime_error("cannot open " + observations_file.string());
  try {
    return parse_cohort(stays, obs);
  } catch (const DataError& e) {
    // Re-throw with the file name attached; the line number is already in the message.
    std::string where = std::string(e.what()).rfind("observations file", 0) == 0 ? observations_file.string()
                                                                                 : stays_file.string();
    throw DataError(where + ": " + e.what());
  }
}

inline void write_stays_csv(const Cohort& cohort, std::ostream& out) {
  out << kStaysHeader << '\n';
  for (const auto& s : cohort.stays) {
    out << s.stay_id << ',' << s.patient_id << ',' << detail::format_double(s.los_days) << ','
        << (s.mortality ? '1' : '0') << ',' << detail::format_double(s.age_years) << ','
        << (s.gender == Gender::M ? 'M' : 'F') << ',';
    if (s.height_cm) out << detail::format_double(*s.height_cm);
    out << ',';
    if (s.weight_kg) out << detail::format_double(*s.weight_kg);
    out << '\n';
  }
}

inline void write_observations_csv(const Cohort& cohort, std::ostream& out) {
  out << kObservationsHeader << '\n';
  for (const auto& s : cohort.stays)
    for (const auto& series : s.series)
      for (const auto& o : series.observations)
        out << s.stay_id << ',' << vital_id(series.kind) << ',' << o.offset_minutes << ','
            << detail::format_double(o.value) << '\n';
}

// Writes stays.csv and observations.csv into `dir`, creating it if needed.
inline void write_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, auto&& fn) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    fn(out);
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  write(dir / "stays.csv", [&](std::ostream& o) { write_stays_csv(cohort, o); });
  write(dir / "observations.csv", [&](std::ostream& o) { write_observations_csv(cohort, o); });
}

}  // namespace vitalsforge
