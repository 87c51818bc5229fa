#include "incat/api.hpp"

#include <limits>

namespace incat::api {

using nlohmann::json;

json themes(const Store& store) {
  json out = json::array();
  for (const auto& t : store.themes()) out.push_back(theme_to_json(t, FeatureSchema::cvss_v3()));
  return out;
}

json clusters(const Store& store) {
  const auto& schema = FeatureSchema::cvss_v3();
  auto model = store.latest_model(schema);
  if (!model) return json{{"model", nullptr}, {"profile", json::array()}};
  const auto matrix = categorical_matrix(store.records(schema), schema);
  json profile = json::array();
  for (const auto& p : profile_clusters(*model, matrix.rows))
    profile.push_back({{"cluster", p.cluster}, {"mode", vector_to_json(p.mode, schema)}, {"count", p.count}});
  return json{{"model", model_to_json(*model, schema)}, {"profile", std::move(profile)}};
}

json elbow(const Store& store) {
  auto report = store.latest_report("elbow");
  if (!report) return json{{"init", nullptr}, {"entries", json::array()}, {"running_min", json::array()}};
  return elbow_to_json(elbow_from_json(*report));
}

json combos(const Store& store, std::size_t top) {
  const auto& schema = FeatureSchema::cvss_v3();
  const auto matrix = categorical_matrix(store.records(schema), schema);
  return combos_report(combination_stats(matrix.rows), schema, top);
}

json readiness(const Store& store) {
  const auto responses = store.responses();
  const auto assessments = store.assessments();
  return readiness_to_json(aggregate_readiness(responses, assessments));
}

json targeting(const Store& store, const std::string& theme_id, std::optional<std::size_t> quota) {
  const auto report = aggregate_readiness(store.responses(), store.assessments());
  const auto q = quota.value_or(std::numeric_limits<std::size_t>::max());
  json j{{"theme_id", theme_id}, {"groups", target_groups(report, theme_id, q)}};
  j["quota"] = quota ? json(*quota) : json(nullptr);
  return j;
}

} // namespace incat::api
