#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vitalsforge/cohort.hpp"
#include "vitalsforge/detail/common.hpp"

namespace vitalsforge {

struct VitalProfile {
  double population_mean;  // mean of per-stay means
  double population_sd;    // SD of per-stay means
  double within_sd;        // typical within-stay observation SD
  double first_day_count;  // expected number of first-day observations
  double missing_probability;
  int decimals;            // charting resolution
  double ceiling;          // observations are clipped here (spo2 saturates at 100)
};

// Synthetic ICU cohort generator settings.
//
// Per stay, latent vital means are correlated normals around the population
// targets. A latent "instability" score scales the within-stay variability and
// the rate of symmetric excursions into both tails; it shifts the expected mean
// of no vital. Outcomes depend on the standardized latent means, age and
// instability, so the tail features carry signal that per-stay means cannot.
//
// Mortality:  logit P(death) = mortality_intercept + sum_v mortality_vital[v] * z_v
//                              + mortality_age * age_z + mortality_instability * u
// LOS (days): 1 + exp(los_log_intercept + sum_v los_vital[v] * z_v + los_age * age_z
//                     + los_instability * u + los_noise_sd * e)
// Short stays (< 1 day) are drawn uniformly in [0.1, 1) with short_stay_fraction.
struct SynthConfig {
  std::size_t n_stays = 5000;

  std::array<VitalProfile, kVitalCount> vitals = {{
      {85.99, 15.59, 8.3, 24.0, 0.005, 1, 1e9},    // heart_rate
      {118.75, 16.90, 14.0, 24.0, 0.005, 1, 1e9},  // sbp
      {60.47, 10.89, 9.7, 24.0, 0.005, 1, 1e9},    // dbp
      {18.93, 4.05, 3.6, 24.0, 0.005, 1, 1e9},     // resp_rate
      {36.84, 0.62, 0.45, 8.0, 0.015, 2, 1e9},     // temp_c
      {97.27, 1.80, 1.9, 24.0, 0.005, 1, 100.0},   // spo2
      {138.74, 41.86, 25.0, 5.0, 0.008, 1, 1e9},   // glucose
  }};

  // Correlation of the latent per-stay means; the symmetrized published
  // first-day correlation table.
  std::array<std::array<double, kVitalCount>, kVitalCount> mean_correlation = {{
      {1.0, -0.104, 0.211, 0.326, 0.268, -0.099, 0.063},
      {-0.104, 1.0, 0.524, -0.032, 0.065, 0.045, 0.0705},
      {0.211, 0.524, 1.0, 0.0257, 0.04925, -0.0148, 0.0142},
      {0.326, -0.032, 0.0257, 1.0, 0.118, -0.259, 0.069},
      {0.268, 0.065, 0.04925, 0.118, 1.0, 0.051, -0.022},
      {-0.099, 0.045, -0.0148, -0.259, 0.051, 1.0, -0.048},
      {0.063, 0.0705, 0.0142, 0.069, -0.022, -0.048, 1.0},
  }};

  double age_mean = 64.35;
  double age_sd = 16.87;
  double age_min = 18.0;
  double age_cap = 90.0;
  double male_fraction = 0.5656;
  double height_mean = 160.66;
  double height_sd = 11.76;
  double weight_mean = 80.45;
  double weight_sd = 23.47;
  double height_missing_probability = 0.05;
  double weight_missing_probability = 0.03;

  // Geometric number of additional stays per patient.
  double repeat_stay_probability = 0.2;
  // Share of latent variance that a patient carries across stays.
  double patient_effect_share = 0.5;

  double volatility_scale = 0.45;     // log within-SD per unit instability
  double volatility_noise = 0.15;     // per-vital log within-SD jitter
  double excursion_rate = 0.06;       // excursion probability at u = 0
  double excursion_scale = 0.8;       // log excursion rate per unit instability
  double excursion_size = 2.5;        // excursion size in within-SD units
  double artifact_probability = 0.001;  // negative or 10x charting errors
  double later_day_count_fraction = 0.5;

  std::array<double, kVitalCount> mortality_vital = {0.30, -0.25, -0.10, 0.25, 0.10, -0.20, 0.15};
  double mortality_age = 0.45;
  double mortality_instability = 1.10;
  double mortality_intercept = -2.55;

  std::array<double, kVitalCount> los_vital = {0.12, -0.08, -0.04, 0.12, 0.08, -0.06, 0.06};
  double los_age = 0.05;
  double los_instability = 0.75;
  double los_log_intercept = 0.495;  // median LOS about 2.6 days once stays under 1 day are dropped
  double los_noise_sd = 0.95;
  double short_stay_fraction = 0.08;

  void validate() const {
    for (VitalKind k : kAllVitals) {
      const auto& v = vitals[index_of(k)];
      const std::string name(vital_id(k));
      if (!(v.population_sd > 0.0) || !(v.within_sd > 0.0))
        throw std::invalid_argument("synth config: SDs for " + name + " must be positive");
      if (!(v.first_day_count >= 1.0))
        throw std::invalid_argument("synth config: observation count for " + name + " must be >= 1");
      if (v.missing_probability < 0.0 || v.missing_probability >= 1.0)
        throw std::invalid_argument("synth config: missing probability for " + name + " must be in [0, 1)");
    }
    auto prob = [](double p, const char* name) {
      if (p < 0.0 || p >= 1.0) throw std::invalid_argument(std::string("synth config: ") + name + " must be in [0, 1)");
    };
    prob(height_missing_probability, "height_missing_probability");
    prob(weight_missing_probability, "weight_missing_probability");
    prob(repeat_stay_probability, "repeat_stay_probability");
    prob(artifact_probability, "artifact_probability");
    prob(short_stay_fraction, "short_stay_fraction");
    if (male_fraction < 0.0 || male_fraction > 1.0) throw std::invalid_argument("synth config: male_fraction out of [0, 1]");
    if (patient_effect_share < 0.0 || patient_effect_share > 1.0)
      throw std::invalid_argument("synth config: patient_effect_share out of [0, 1]");
    if (!(age_sd > 0.0) || !(height_sd > 0.0) || !(weight_sd > 0.0) || !(los_noise_sd >= 0.0))
      throw std::invalid_argument("synth config: demographic SDs must be positive");
    if (!(age_min > 0.0) || !(age_cap > age_min)) throw std::invalid_argument("synth config: invalid age range");
    if (excursion_rate < 0.0 || excursion_size < 0.0 || volatility_noise < 0.0)
      throw std::invalid_argument("synth config: excursion parameters must be non-negative");
  }
};

namespace detail {

struct PatientDraw {
  std::size_t first_stay = 0;
  std::size_t n_stays = 0;
  double age = 0.0;
  Gender gender = Gender::M;
  double height = 0.0;
  double weight = 0.0;
  std::array<double, kVitalCount> latent{};  // independent normals, correlated later
  double instability = 0.0;
};

inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

}  // namespace detail

inline Cohort synthesize_cohort(const SynthConfig& config, std::uint64_t seed) {
  config.validate();

  Eigen::Matrix<double, 7, 7> corr;
  for (std::size_t i = 0; i < kVitalCount; ++i)
    for (std::size_t j = 0; j < kVitalCount; ++j) corr(i, j) = config.mean_correlation[i][j];
  Eigen::LLT<Eigen::Matrix<double, 7, 7>> llt(corr);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("synth config: mean_correlation is not positive definite");
  const Eigen::Matrix<double, 7, 7> chol = llt.matrixL();

  // Patients first (sequential, cheap), then stays in parallel with per-stay streams.
  std::vector<detail::PatientDraw> patients;
  std::vector<std::size_t> stay_patient;
  stay_patient.reserve(config.n_stays);
  for (std::size_t p = 0; stay_patient.size() < config.n_stays; ++p) {
    std::mt19937_64 rng(detail::child_seed(seed, 1, p));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    detail::PatientDraw d;
    d.first_stay = stay_patient.size();
    d.n_stays = 1;
    while (unit(rng) < config.repeat_stay_probability) ++d.n_stays;
    d.n_stays = std::min(d.n_stays, config.n_stays - stay_patient.size());
    d.age = std::clamp(config.age_mean + config.age_sd * normal(rng), config.age_min, config.age_cap);
    d.gender = unit(rng) < config.male_fraction ? Gender::M : Gender::F;
    d.height = std::max(120.0, config.height_mean + config.height_sd * normal(rng));
    d.weight = std::max(30.0, config.weight_mean + config.weight_sd * normal(rng));
    for (auto& z : d.latent) z = normal(rng);
    d.instability = normal(rng);
    for (std::size_t s = 0; s < d.n_stays; ++s) stay_patient.push_back(patients.size());
    patients.push_back(d);
  }

  const int id_width = std::max<int>(6, static_cast<int>(std::to_string(config.n_stays).size()));
  auto make_id = [id_width](char prefix, std::size_t n) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, id_width, n);
    return std::string(buf);
  };

  Cohort cohort;
  cohort.provenance = Provenance::synthetic;
  cohort.seed = seed;
  cohort.stays.resize(config.n_stays);

  const double share = config.patient_effect_share;
  const double own = std::sqrt(1.0 - share);
  const double shared = std::sqrt(share);

  detail::parallel_for(config.n_stays, [&](std::size_t i) {
    const detail::PatientDraw& patient = patients[stay_patient[i]];
    const std::size_t visit = i - patient.first_stay;
    std::mt19937_64 rng(detail::child_seed(seed, 2, i));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;

    IcuStay& stay = cohort.stays[i];
    stay.stay_id = make_id('S', i + 1);
    stay.patient_id = make_id('P', stay_patient[i] + 1);
    stay.gender = patient.gender;
    stay.age_years = detail::round_to(std::min(config.age_cap, patient.age + 0.5 * static_cast<double>(visit)), 1);
    if (unit(rng) >= config.height_missing_probability) stay.height_cm = detail::round_to(patient.height, 1);
    if (unit(rng) >= config.weight_missing_probability)
      stay.weight_kg = detail::round_to(std::max(30.0, patient.weight + 2.0 * normal(rng)), 1);

    Eigen::Matrix<double, 7, 1> raw;
    for (std::size_t v = 0; v < kVitalCount; ++v) raw(v) = shared * patient.latent[v] + own * normal(rng);
    const Eigen::Matrix<double, 7, 1> z = chol * raw;
    const double u = shared * patient.instability + own * normal(rng);
    const double age_z = (stay.age_years - config.age_mean) / config.age_sd;

    // Outcomes.
    double mortality_logit = config.mortality_intercept + config.mortality_age * age_z + config.mortality_instability * u;
    double los_log = config.los_log_intercept + config.los_age * age_z + config.los_instability * u +
                     config.los_noise_sd * normal(rng);
    for (std::size_t v = 0; v < kVitalCount; ++v) {
      mortality_logit += config.mortality_vital[v] * z(v);
      los_log += config.los_vital[v] * z(v);
    }
    stay.mortality = unit(rng) < 1.0 / (1.0 + std::exp(-mortality_logit));
    const bool short_stay = unit(rng) < config.short_stay_fraction;
    const double los = short_stay ? 0.1 + 0.9 * unit(rng) : 1.0 + std::exp(los_log);
    stay.los_days = std::max(0.0001, detail::round_to(los, 4));

    const double excursion_p = std::min(0.5, config.excursion_rate * std::exp(config.excursion_scale * u));
    const double later_span = std::min(stay.los_days, 2.0) * static_cast<double>(kFirstDayMinutes);

    for (VitalKind k : kAllVitals) {
      const std::size_t v = index_of(k);
      const VitalProfile& profile = config.vitals[v];
      const double mean = profile.population_mean + profile.population_sd * z(v);
      const double sd = profile.within_sd *
                        std::exp(config.volatility_scale * u + config.volatility_noise * normal(rng));
      auto draw_value = [&]() {
        double x = mean + sd * normal(rng);
        if (unit(rng) < excursion_p) {
          const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
          x += sign * config.excursion_size * profile.within_sd;
        }
        x = std::min(x, profile.ceiling);
        x = detail::round_to(x, profile.decimals);
        if (unit(rng) < config.artifact_probability) x = unit(rng) < 0.5 ? -x : 10.0 * x;
        return x;
      };

      auto& series = stay.vital(k);
      std::poisson_distribution<int> first_day(profile.first_day_count);
      const int n_first = std::max(1, first_day(rng));
      std::uniform_int_distribution<std::int64_t> first_offset(0, kFirstDayMinutes - 1);
      for (int j = 0; j < n_first; ++j) series.observations.push_back({first_offset(rng), draw_value()});

      if (later_span > static_cast<double>(kFirstDayMinutes)) {
        std::poisson_distribution<int> later(profile.first_day_count * config.later_day_count_fraction);
        const int n_later = later(rng);
        std::uniform_int_distribution<std::int64_t> later_offset(kFirstDayMinutes,
                                                                 static_cast<std::int64_t>(later_span) - 1);
        for (int j = 0; j < n_later; ++j) series.observations.push_back({later_offset(rng), draw_value()});
      }
      if (unit(rng) < profile.missing_probability) series.observations.clear();
      series.sort();
    }
  });
  return cohort;
}

struct CohortSummary {
  std::size_t n_stays = 0;
  std::size_t n_patients = 0;
  double mortality_rate = 0.0;
  double median_los = 0.0;
};

inline CohortSummary summarize(const Cohort& cohort) {
  CohortSummary s;
  s.n_stays = cohort.size();
  if (cohort.empty()) return s;
  std::unordered_set<std::string_view> patients;
  std::size_t deaths = 0;
  std::vector<double> los;
  for (const auto& stay : cohort.stays) {
    patients.insert(stay.patient_id);
    deaths += stay.mortality ? 1 : 0;
    los.push_back(stay.los_days);
  }
  s.n_patients = patients.size();
  s.mortality_rate = static_cast<double>(deaths) / static_cast<double>(cohort.size());
  s.median_los = median(std::move(los));
  return s;
}

}  // namespace vitalsforge
