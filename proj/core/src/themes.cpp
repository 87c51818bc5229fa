#include "incat/themes.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "incat/defaults.hpp"
#include "incat/error.hpp"

namespace incat {

using nlohmann::json;

CombinationStats combination_stats(const CategoricalMatrix& rows) {
  std::map<CategoricalVector, std::size_t> counts;
  for (std::size_t i = 0; i < rows.rows(); ++i) ++counts[rows.vector(i)];

  CombinationStats stats;
  stats.total_rows = rows.rows();
  stats.combos.reserve(counts.size());
  for (auto& [v, n] : counts) stats.combos.push_back({v, n});
  // std::map already yields canonical order; a stable sort keeps it for ties.
  std::stable_sort(stats.combos.begin(), stats.combos.end(),
                   [](const Combination& a, const Combination& b) { return a.count > b.count; });
  return stats;
}

double coverage_top_m(const CombinationStats& stats, std::size_t m) {
  if (stats.total_rows == 0) throw ValidationError("coverage: no rows");
  std::size_t covered = 0;
  const auto upto = std::min(m, stats.combos.size());
  for (std::size_t i = 0; i < upto; ++i) covered += stats.combos[i].count;
  return static_cast<double>(covered) / static_cast<double>(stats.total_rows);
}

json combos_report(const CombinationStats& stats, const FeatureSchema& schema, std::size_t top) {
  json curve = json::array();
  if (stats.total_rows > 0) {
    for (std::size_t m = 0; m <= stats.combos.size(); ++m) curve.push_back({m, coverage_top_m(stats, m)});
  }
  json combos = json::array();
  const auto listed = top == 0 ? stats.combos.size() : std::min(top, stats.combos.size());
  for (std::size_t i = 0; i < listed; ++i)
    combos.push_back({{"vector", vector_to_json(stats.combos[i].vector, schema)}, {"count", stats.combos[i].count}});
  return json{{"possible", schema.combination_count()},
              {"observed", stats.combos.size()},
              {"total", stats.total_rows},
              {"coverage_curve", std::move(curve)},
              {"combos", std::move(combos)}};
}

std::vector<ClusterProfile> profile_clusters(const ClusterModel& model, const CategoricalMatrix& rows) {
  if (model.assignments.size() != rows.rows())
    throw ValidationError("profile: model has " + std::to_string(model.assignments.size()) + " assignments for " +
                          std::to_string(rows.rows()) + " rows");
  const auto sizes = model.cluster_sizes();
  std::vector<ClusterProfile> out;
  out.reserve(model.k);
  for (std::size_t j = 0; j < model.k; ++j) out.push_back({j, model.modes.at(j), sizes[j]});
  std::stable_sort(out.begin(), out.end(),
                   [](const ClusterProfile& a, const ClusterProfile& b) { return a.count > b.count; });
  return out;
}

TagMap TagMap::defaults() { return from_json(json::parse(defaults::tagmap_json()), FeatureSchema::cvss_v3()); }

TagMap TagMap::from_json(const json& j, const FeatureSchema& schema) {
  std::vector<TagRule> rules;
  try {
    for (const auto& r : j.at("rules")) {
      TagRule rule{r.at("feature").get<std::string>(), r.at("value").get<std::string>(), r.at("tag").get<std::string>()};
      auto f = schema.index_of(rule.feature);
      if (!f) throw ValidationError("tag map: unknown feature '" + rule.feature + "'");
      auto code = schema.encode(*f, rule.value);
      if (!code) throw ValidationError("tag map: value '" + rule.value + "' not in domain of '" + rule.feature + "'");
      if (rule.tag.empty()) throw ValidationError("tag map: empty tag for " + rule.feature + "=" + rule.value);
      rule.value = schema.decode(*f, *code);
      rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("tag map: ") + e.what());
  }
  return TagMap(std::move(rules));
}

json TagMap::to_json() const {
  json rules = json::array();
  for (const auto& r : rules_) rules.push_back({{"feature", r.feature}, {"value", r.value}, {"tag", r.tag}});
  return json{{"rules", std::move(rules)}};
}

std::vector<std::string> TagMap::tags_for(const CategoricalVector& mode, const FeatureSchema& schema) const {
  std::vector<std::string> tags;
  for (const auto& r : rules_) {
    auto f = schema.index_of(r.feature);
    if (!f || *f >= mode.size()) continue;
    if (schema.decode(*f, mode[*f]) != r.value) continue;
    if (std::find(tags.begin(), tags.end(), r.tag) == tags.end()) tags.push_back(r.tag);
  }
  return tags;
}

std::string theme_id_for_cluster(std::size_t cluster) { return "theme-" + std::to_string(cluster); }

std::vector<Theme> themes_from_model(const ClusterModel& model, const CategoricalMatrix& rows, const TagMap& tag_map,
                                     const FeatureSchema& schema) {
  std::vector<Theme> out;
  for (const auto& p : profile_clusters(model, rows)) {
    if (p.count == 0) continue;
    out.push_back({theme_id_for_cluster(p.cluster), p.cluster, p.mode, p.count, tag_map.tags_for(p.mode, schema)});
  }
  return out;
}

json theme_to_json(const Theme& theme, const FeatureSchema& schema) {
  return json{{"theme_id", theme.theme_id},
              {"source_cluster", theme.source_cluster},
              {"mode", vector_to_json(theme.mode, schema)},
              {"count", theme.count},
              {"tags", theme.tags}};
}

Theme theme_from_json(const json& j, const FeatureSchema& schema) {
  Theme t;
  try {
    t.theme_id = j.at("theme_id").get<std::string>();
    t.source_cluster = j.at("source_cluster").get<std::size_t>();
    t.mode = vector_from_json(j.at("mode"), schema);
    t.count = j.at("count").get<std::size_t>();
    t.tags = j.at("tags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("theme: ") + e.what());
  }
  return t;
}

} // namespace incat
