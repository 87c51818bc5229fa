#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incat/annotate.hpp"
#include "incat/themes.hpp"

namespace incat {

struct AssessmentItem {
  std::string item_id;
  std::string prompt;
  std::vector<std::string> choices;
  std::size_t correct_index = 0;
  std::vector<std::string> tags;
};

struct Assessment {
  std::string assessment_id;
  std::string theme_id;
  std::vector<std::string> theme_tags;
  std::vector<AssessmentItem> items;

  const AssessmentItem* find_item(const std::string& item_id) const;
};

struct ResponseSet {
  std::string user_id;
  std::string group_id;
  std::string assessment_id;
  std::map<std::string, std::size_t> answers;
  std::map<std::string, std::string> free_text;
  std::string submitted_at;
};

struct TagScore {
  std::size_t correct = 0;
  std::size_t attempted = 0;

  bool operator==(const TagScore&) const = default;
};

using GroupTheme = std::pair<std::string, std::string>;  // (group_id, theme_id)

struct ReadinessReport {
  std::map<GroupTheme, double> matrix;
  std::map<GroupTheme, std::size_t> support;
  std::map<GroupTheme, TagScore> totals;
  // theme -> groups, least ready first.
  std::map<std::string, std::vector<std::string>> ranking;
};

// Validates item invariants (>= 2 choices, correct index in range, >= 1 tag,
// unique ids). Throws ValidationError.
std::vector<AssessmentItem> load_item_bank(const nlohmann::json& j);
std::vector<AssessmentItem> default_item_bank();

/// Seeded uniform sample of n items that share at least one tag with the
/// theme. Throws ValidationError listing the per-tag shortfall when fewer
/// than n items qualify.
Assessment generate_assessment(const Theme& theme, std::span<const AssessmentItem> bank,
                               std::size_t n_items, std::uint64_t seed);

// Per tag over the items carrying it. Unanswered items count as attempted
// and wrong. Throws ValidationError for unknown items or out-of-range
// answers, and when the response targets another assessment.
std::map<std::string, TagScore> score_response(const ResponseSet& resp, const Assessment& assessment);

/// Per (group, theme) readiness: correct / attempted summed over the
/// theme's tags for every response to that theme's assessments. `grouping`
/// overrides a response's own group_id. Cells without attempts are absent.
ReadinessReport aggregate_readiness(std::span<const ResponseSet> responses,
                                    std::span<const Assessment> assessments,
                                    const std::map<std::string, std::string>& grouping = {});

std::vector<std::string> target_groups(const ReadinessReport& report, const std::string& theme_id,
                                       std::size_t quota);

// Free-text answers as ASSESSMENT_RESPONSE documents, one per answered item.
std::vector<Document> response_documents(const ResponseSet& resp);

nlohmann::json item_to_json(const AssessmentItem& item);
AssessmentItem item_from_json(const nlohmann::json& j);
nlohmann::json assessment_to_json(const Assessment& a);
Assessment assessment_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ResponseSet& r);
// Throws ValidationError naming the offending field.
ResponseSet response_from_json(const nlohmann::json& j);
nlohmann::json tag_scores_to_json(const std::map<std::string, TagScore>& scores);
nlohmann::json readiness_to_json(const ReadinessReport& r);

} // namespace incat
