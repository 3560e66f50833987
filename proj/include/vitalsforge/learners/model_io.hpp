#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "vitalsforge/learners/model.hpp"

namespace vitalsforge::learners {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "vitalsforge.model";

namespace detail {

using nlohmann::json;

inline json tree_to_json(const Tree& t) {
  return {{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left}, {"right", t.right}, {"value", t.value}};
}

inline Tree tree_from_json(const json& j) {
  Tree t;
  j.at("feature").get_to(t.feature);
  j.at("threshold").get_to(t.threshold);
  j.at("left").get_to(t.left);
  j.at("right").get_to(t.right);
  j.at("value").get_to(t.value);
  const std::size_t n = t.feature.size();
  if (t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.value.size() != n || n == 0)
    throw std::runtime_error("model json: inconsistent tree arrays");
  for (std::size_t i = 0; i < n; ++i)
    if (t.feature[i] >= 0 && (t.left[i] <= static_cast<std::int32_t>(i) || t.right[i] <= static_cast<std::int32_t>(i) ||
                              t.left[i] >= static_cast<std::int32_t>(n) || t.right[i] >= static_cast<std::int32_t>(n)))
      throw std::runtime_error("model json: invalid tree child index");
  return t;
}

inline json dataset_to_json(const Dataset& d) { return {{"rows", d.rows}, {"cols", d.cols}, {"data", d.x}}; }

inline Dataset dataset_from_json(const json& j) {
  Dataset d;
  d.rows = j.at("rows").get<std::size_t>();
  d.cols = j.at("cols").get<std::size_t>();
  j.at("data").get_to(d.x);
  if (d.x.size() != d.rows * d.cols) throw std::runtime_error("model json: dataset size mismatch");
  return d;
}

inline json state_to_json(const ModelState& state) {
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantState>) {
          return {{"kind", "constant"}, {"value", s.value}};
        } else if constexpr (std::is_same_v<S, LinearState>) {
          return {{"kind", "linear"}, {"intercept", s.intercept}, {"coef", s.coef}};
        } else if constexpr (std::is_same_v<S, ForestState>) {
          json trees = json::array();
          for (const auto& t : s.trees) trees.push_back(tree_to_json(t));
          return {{"kind", "forest"}, {"trees", trees}};
        } else if constexpr (std::is_same_v<S, BoostedState>) {
          json trees = json::array();
          for (const auto& t : s.trees) trees.push_back(tree_to_json(t));
          return {{"kind", "boosted"}, {"base_score", s.base_score}, {"trees", trees}};
        } else if constexpr (std::is_same_v<S, KnnState>) {
          return {{"kind", "knn"}, {"k", s.k}, {"train", dataset_to_json(s.train)}, {"labels", s.labels}};
        } else {
          return {{"kind", "kernel"},
                  {"support", dataset_to_json(s.support)},
                  {"coef", s.coef},
                  {"rho", s.rho},
                  {"gamma", s.gamma}};
        }
      },
      state);
}

inline ModelState state_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ConstantState{j.at("value").get<double>()};
  if (kind == "linear") {
    LinearState s;
    s.intercept = j.at("intercept").get<double>();
    j.at("coef").get_to(s.coef);
    return s;
  }
  if (kind == "forest") {
    ForestState s;
    for (const auto& t : j.at("trees")) s.trees.push_back(tree_from_json(t));
    return s;
  }
  if (kind == "boosted") {
    BoostedState s;
    s.base_score = j.at("base_score").get<double>();
    for (const auto& t : j.at("trees")) s.trees.push_back(tree_from_json(t));
    return s;
  }
  if (kind == "knn") {
    KnnState s;
    s.k = j.at("k").get<std::size_t>();
    s.train = dataset_from_json(j.at("train"));
    j.at("labels").get_to(s.labels);
    if (s.labels.size() != s.train.rows) throw std::runtime_error("model json: knn label count mismatch");
    return s;
  }
  if (kind == "kernel") {
    KernelExpansion s;
    s.support = dataset_from_json(j.at("support"));
    j.at("coef").get_to(s.coef);
    s.rho = j.at("rho").get<double>();
    s.gamma = j.at("gamma").get<double>();
    if (s.coef.size() != s.support.rows) throw std::runtime_error("model json: kernel coefficient count mismatch");
    return s;
  }
  throw std::runtime_error("model json: unknown state kind '" + kind + "'");
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["algorithm"] = std::string(algorithm_name(m.algorithm));
  j["params"] = m.params.values;
  j["seed"] = m.seed;
  j["feature_schema"] = m.feature_schema;
  if (m.scaler.empty())
    j["standardizer"] = nullptr;
  else
    j["standardizer"] = {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}};
  j["state"] = detail::state_to_json(m.state);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) throw std::runtime_error("model json: not a model document");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw std::runtime_error("model json: unsupported version " + std::to_string(version));
    TrainedModel m;
    auto algo = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!algo) throw std::runtime_error("model json: unknown algorithm");
    m.algorithm = *algo;
    j.at("params").get_to(m.params.values);
    validate_params(m.algorithm, m.params);
    m.seed = j.at("seed").get<std::uint64_t>();
    j.at("feature_schema").get_to(m.feature_schema);
    if (!j.at("standardizer").is_null()) {
      j.at("standardizer").at("mean").get_to(m.scaler.mean);
      j.at("standardizer").at("scale").get_to(m.scaler.scale);
      if (m.scaler.mean.size() != m.feature_schema.size() || m.scaler.scale.size() != m.feature_schema.size())
        throw std::runtime_error("model json: standardizer size mismatch");
    }
    m.state = detail::state_from_json(j.at("state"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model json: ") + e.what());
  }
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(m).dump() << '\n';
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace vitalsforge::learners
