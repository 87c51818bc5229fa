#include "incat/assess.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "incat/defaults.hpp"
#include "incat/error.hpp"
#include "incat/rng.hpp"

namespace incat {

using nlohmann::json;

namespace {

bool shares_tag(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string& t) { return std::find(b.begin(), b.end(), t) != b.end(); });
}

void check_item(const AssessmentItem& item) {
  if (item.item_id.empty()) throw ValidationError("item: empty item_id");
  if (item.choices.size() < 2) throw ValidationError("item '" + item.item_id + "': needs at least two choices");
  if (item.correct_index >= item.choices.size())
    throw ValidationError("item '" + item.item_id + "': correct index out of range");
  if (item.tags.empty()) throw ValidationError("item '" + item.item_id + "': needs at least one tag");
}

} // namespace

const AssessmentItem* Assessment::find_item(const std::string& item_id) const {
  auto it = std::find_if(items.begin(), items.end(), [&](const AssessmentItem& i) { return i.item_id == item_id; });
  return it == items.end() ? nullptr : &*it;
}

std::vector<AssessmentItem> load_item_bank(const json& j) {
  const json* items = &j;
  if (j.is_object()) {
    auto it = j.find("items");
    if (it == j.end()) throw ValidationError("item bank: missing \"items\"");
    items = &*it;
  }
  if (!items->is_array()) throw ValidationError("item bank: items must be an array");
  std::vector<AssessmentItem> bank;
  std::set<std::string> ids;
  for (const auto& i : *items) {
    auto item = item_from_json(i);
    if (!ids.insert(item.item_id).second) throw ValidationError("item bank: duplicate item '" + item.item_id + "'");
    bank.push_back(std::move(item));
  }
  return bank;
}

std::vector<AssessmentItem> default_item_bank() { return load_item_bank(json::parse(defaults::item_bank_json())); }

Assessment generate_assessment(const Theme& theme, std::span<const AssessmentItem> bank, std::size_t n_items,
                               std::uint64_t seed) {
  if (n_items < 1) throw ValidationError("assessment: need at least one item");
  std::vector<const AssessmentItem*> eligible;
  for (const auto& item : bank) {
    if (shares_tag(item.tags, theme.tags)) eligible.push_back(&item);
  }
  if (eligible.size() < n_items) {
    std::string detail;
    for (const auto& tag : theme.tags) {
      const auto have = std::count_if(bank.begin(), bank.end(), [&](const AssessmentItem& i) {
        return std::find(i.tags.begin(), i.tags.end(), tag) != i.tags.end();
      });
      const auto have_n = static_cast<std::size_t>(have);
      detail += "; " + tag + ": " + std::to_string(have_n) + " items, short by " +
                std::to_string(n_items > have_n ? n_items - have_n : 0);
    }
    if (theme.tags.empty()) detail = "; theme has no tags";
    throw ValidationError("assessment for " + theme.theme_id + ": " + std::to_string(eligible.size()) +
                          " eligible items, " + std::to_string(n_items) + " requested" + detail);
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }

  Assessment a;
  a.assessment_id = "asm-" + theme.theme_id + "-" + std::to_string(seed);
  a.theme_id = theme.theme_id;
  a.theme_tags = theme.tags;
  for (std::size_t i = 0; i < n_items; ++i) a.items.push_back(*eligible[i]);
  return a;
}

std::map<std::string, TagScore> score_response(const ResponseSet& resp, const Assessment& assessment) {
  if (resp.assessment_id != assessment.assessment_id)
    throw FieldError("assessment_id", "response targets '" + resp.assessment_id + "', not '" +
                                          assessment.assessment_id + "'");
  for (const auto& [item_id, choice] : resp.answers) {
    const auto* item = assessment.find_item(item_id);
    if (!item) throw FieldError("answers." + item_id, "unknown item");
    if (choice >= item->choices.size())
      throw FieldError("answers." + item_id, "choice " + std::to_string(choice) + " out of range [0, " +
                                                  std::to_string(item->choices.size()) + ")");
  }
  for (const auto& [item_id, text] : resp.free_text) {
    if (!assessment.find_item(item_id)) throw FieldError("free_text." + item_id, "unknown item");
  }

  std::map<std::string, TagScore> scores;
  for (const auto& item : assessment.items) {
    auto it = resp.answers.find(item.item_id);
    const bool correct = it != resp.answers.end() && it->second == item.correct_index;
    for (const auto& tag : item.tags) {
      auto& s = scores[tag];
      ++s.attempted;
      s.correct += correct;
    }
  }
  return scores;
}

ReadinessReport aggregate_readiness(std::span<const ResponseSet> responses, std::span<const Assessment> assessments,
                                    const std::map<std::string, std::string>& grouping) {
  std::map<std::string, const Assessment*> by_id;
  for (const auto& a : assessments) by_id[a.assessment_id] = &a;

  ReadinessReport report;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    auto where = [&] { return "response " + std::to_string(i) + " (user '" + r.user_id + "')"; };
    auto a = by_id.find(r.assessment_id);
    if (a == by_id.end()) throw ValidationError(where() + ": unknown assessment '" + r.assessment_id + "'");
    std::map<std::string, TagScore> scores;
    try {
      scores = score_response(r, *a->second);
    } catch (const ValidationError& e) {
      throw ValidationError(where() + ": " + e.what());
    }
    std::string group = r.group_id;
    if (auto g = grouping.find(r.user_id); g != grouping.end()) group = g->second;
    if (group.empty()) throw ValidationError(where() + ": no group");

    const GroupTheme cell{group, a->second->theme_id};
    TagScore sum;
    for (const auto& tag : a->second->theme_tags) {
      if (auto s = scores.find(tag); s != scores.end()) {
        sum.correct += s->second.correct;
        sum.attempted += s->second.attempted;
      }
    }
    if (sum.attempted == 0) continue;
    auto& total = report.totals[cell];
    total.correct += sum.correct;
    total.attempted += sum.attempted;
    ++report.support[cell];
  }

  for (const auto& [cell, total] : report.totals)
    report.matrix[cell] = static_cast<double>(total.correct) / static_cast<double>(total.attempted);

  for (const auto& [cell, score] : report.matrix) report.ranking[cell.second].push_back(cell.first);
  for (auto& [theme, groups] : report.ranking) {
    std::sort(groups.begin(), groups.end(), [&](const std::string& x, const std::string& y) {
      const GroupTheme cx{x, theme}, cy{y, theme};
      const double sx = report.matrix.at(cx), sy = report.matrix.at(cy);
      if (sx != sy) return sx < sy;
      const auto nx = report.support.at(cx), ny = report.support.at(cy);
      if (nx != ny) return nx > ny;
      return x < y;
    });
  }
  return report;
}

std::vector<std::string> target_groups(const ReadinessReport& report, const std::string& theme_id, std::size_t quota) {
  auto it = report.ranking.find(theme_id);
  if (it == report.ranking.end()) throw NotFoundError("no readiness data for theme '" + theme_id + "'");
  const auto n = std::min(quota, it->second.size());
  return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<Document> response_documents(const ResponseSet& resp) {
  std::vector<Document> docs;
  for (const auto& [item_id, text] : resp.free_text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    docs.push_back({resp.assessment_id + "/" + resp.user_id + "/" + item_id, DocumentSource::AssessmentResponse, text});
  }
  return docs;
}

json item_to_json(const AssessmentItem& item) {
  return json{{"id", item.item_id},
              {"prompt", item.prompt},
              {"choices", item.choices},
              {"correct", item.correct_index},
              {"tags", item.tags}};
}

AssessmentItem item_from_json(const json& j) {
  AssessmentItem item;
  try {
    item.item_id = j.at("id").get<std::string>();
    item.prompt = j.value("prompt", std::string());
    item.choices = j.at("choices").get<std::vector<std::string>>();
    item.correct_index = j.at("correct").get<std::size_t>();
    item.tags = j.at("tags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("item: ") + e.what());
  }
  check_item(item);
  return item;
}

json assessment_to_json(const Assessment& a) {
  json items = json::array();
  for (const auto& i : a.items) items.push_back(item_to_json(i));
  return json{{"assessment_id", a.assessment_id},
              {"theme_id", a.theme_id},
              {"theme_tags", a.theme_tags},
              {"items", std::move(items)}};
}

Assessment assessment_from_json(const json& j) {
  Assessment a;
  try {
    a.assessment_id = j.at("assessment_id").get<std::string>();
    a.theme_id = j.at("theme_id").get<std::string>();
    a.theme_tags = j.at("theme_tags").get<std::vector<std::string>>();
    for (const auto& i : j.at("items")) a.items.push_back(item_from_json(i));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("assessment: ") + e.what());
  }
  if (a.items.empty()) throw ValidationError("assessment '" + a.assessment_id + "': no items");
  for (const auto& i : a.items) {
    if (!shares_tag(i.tags, a.theme_tags))
      throw ValidationError("assessment '" + a.assessment_id + "': item '" + i.item_id + "' shares no tag with theme");
  }
  return a;
}

json response_to_json(const ResponseSet& r) {
  json answers = json::object();
  for (const auto& [k, v] : r.answers) answers[k] = v;
  json j{{"user_id", r.user_id},
         {"group_id", r.group_id},
         {"assessment_id", r.assessment_id},
         {"answers", std::move(answers)},
         {"submitted_at", r.submitted_at}};
  if (!r.free_text.empty()) j["free_text"] = r.free_text;
  return j;
}

ResponseSet response_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("response: body must be a JSON object");
  ResponseSet r;
  auto req_string = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty())
      throw FieldError(key, "required non-empty string");
    return it->get<std::string>();
  };
  r.user_id = req_string("user_id");
  r.group_id = req_string("group_id");
  r.assessment_id = req_string("assessment_id");
  auto answers = j.find("answers");
  if (answers == j.end() || !answers->is_object()) throw FieldError("answers", "required object");
  for (auto it = answers->begin(); it != answers->end(); ++it) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw FieldError("answers." + it.key(), "choice must be a non-negative integer");
    r.answers[it.key()] = it->get<std::size_t>();
  }
  if (auto ft = j.find("free_text"); ft != j.end() && !ft->is_null()) {
    if (!ft->is_object()) throw FieldError("free_text", "must be an object");
    for (auto it = ft->begin(); it != ft->end(); ++it) {
      if (!it->is_string()) throw FieldError("free_text." + it.key(), "must be a string");
      r.free_text[it.key()] = it->get<std::string>();
    }
  }
  if (auto s = j.find("submitted_at"); s != j.end() && s->is_string()) r.submitted_at = s->get<std::string>();
  return r;
}

json tag_scores_to_json(const std::map<std::string, TagScore>& scores) {
  json j = json::object();
  for (const auto& [tag, s] : scores) j[tag] = {{"correct", s.correct}, {"attempted", s.attempted}};
  return j;
}

json readiness_to_json(const ReadinessReport& r) {
  json matrix = json::array();
  for (const auto& [cell, score] : r.matrix) {
    const auto& t = r.totals.at(cell);
    matrix.push_back({{"group_id", cell.first},
                      {"theme_id", cell.second},
                      {"score", score},
                      {"support", r.support.at(cell)},
                      {"correct", t.correct},
                      {"attempted", t.attempted}});
  }
  return json{{"matrix", std::move(matrix)}, {"ranking", r.ranking}};
}

} // namespace incat
