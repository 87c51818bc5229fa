#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incat/kmodes.hpp"
#include "incat/schema.hpp"

namespace incat {

struct Combination {
  CategoricalVector vector;
  std::size_t count = 0;
};

// Exact frequency table of distinct vectors, most frequent first; equal
// counts ordered by code-lexicographic vector order.
struct CombinationStats {
  std::size_t total_rows = 0;
  std::vector<Combination> combos;
};

CombinationStats combination_stats(const CategoricalMatrix& rows);

// Share of rows covered by the m most frequent combinations. Throws
// ValidationError when there are no rows.
double coverage_top_m(const CombinationStats& stats, std::size_t m);

// {possible, observed, total, coverage_curve:[[m, fraction]...], combos:[...]}
// `top` limits the listed combos (0 lists all). An empty table yields an
// empty curve rather than an error.
nlohmann::json combos_report(const CombinationStats& stats, const FeatureSchema& schema,
                             std::size_t top = 0);

struct ClusterProfile {
  std::size_t cluster = 0;
  CategoricalVector mode;
  std::size_t count = 0;
};

// One entry per cluster, largest first (ties by cluster index).
std::vector<ClusterProfile> profile_clusters(const ClusterModel& model, const CategoricalMatrix& rows);

struct TagRule {
  std::string feature;
  std::string value;
  std::string tag;
};

/// Rules that turn a cluster mode into knowledge tags. A rule fires when
/// the mode's value for `feature` equals `value`.
class TagMap {
public:
  TagMap() = default;
  explicit TagMap(std::vector<TagRule> rules) : rules_(std::move(rules)) {}

  static TagMap defaults();
  // {"rules":[{"feature","value","tag"}...]}; checked against the schema.
  static TagMap from_json(const nlohmann::json& j, const FeatureSchema& schema);
  nlohmann::json to_json() const;

  // Tags in rule order, without duplicates.
  std::vector<std::string> tags_for(const CategoricalVector& mode, const FeatureSchema& schema) const;

  const std::vector<TagRule>& rules() const noexcept { return rules_; }

private:
  std::vector<TagRule> rules_;
};

struct Theme {
  std::string theme_id;
  std::size_t source_cluster = 0;
  CategoricalVector mode;
  std::size_t count = 0;
  std::vector<std::string> tags;
};

std::string theme_id_for_cluster(std::size_t cluster);

// One theme per non-empty cluster, in profile order.
std::vector<Theme> themes_from_model(const ClusterModel& model, const CategoricalMatrix& rows,
                                     const TagMap& tag_map,
                                     const FeatureSchema& schema = FeatureSchema::cvss_v3());

nlohmann::json theme_to_json(const Theme& theme, const FeatureSchema& schema);
Theme theme_from_json(const nlohmann::json& j, const FeatureSchema& schema);

} // namespace incat
