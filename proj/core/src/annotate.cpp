#include "incat/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "incat/error.hpp"
#include "incat/rng.hpp"

namespace incat {

using nlohmann::json;

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool at_boundary(std::string_view text, std::size_t pos) {
  if (pos == 0 || pos >= text.size()) return true;
  return !is_word_char(text[pos - 1]) || !is_word_char(text[pos]);
}

auto position_key(const Mention& m) { return std::tie(m.doc_id, m.start, m.end, m.entity_type); }

bool spans_match(const Mention& a, const Mention& b, MatchMode mode) {
  if (a.doc_id != b.doc_id || a.entity_type != b.entity_type) return false;
  if (mode == MatchMode::Exact) return a.start == b.start && a.end == b.end;
  return a.start < b.end && b.start < a.end;
}

std::vector<Mention> sorted_by_position(std::span<const Mention> in) {
  std::vector<Mention> out(in.begin(), in.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Mention& a, const Mention& b) { return position_key(a) < position_key(b); });
  return out;
}

double f1_of(std::size_t tp, std::size_t a, std::size_t b) {
  return a + b == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(a + b);
}

template <typename E>
E enum_from(std::string_view s, std::initializer_list<std::pair<std::string_view, E>> table, const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ValidationError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), e.byte);
  }
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

} // namespace

std::string_view to_string(DocumentSource s) {
  return s == DocumentSource::ThreatReport ? "THREAT_REPORT" : "ASSESSMENT_RESPONSE";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Dictionary: return "DICTIONARY";
    case Provenance::Human: return "HUMAN";
    case Provenance::Model: return "MODEL";
  }
  return "HUMAN";
}

std::string_view to_string(MatchMode m) { return m == MatchMode::Exact ? "exact" : "overlap"; }

DocumentSource document_source_from_string(std::string_view s) {
  return enum_from<DocumentSource>(
      s, {{"THREAT_REPORT", DocumentSource::ThreatReport}, {"ASSESSMENT_RESPONSE", DocumentSource::AssessmentResponse}},
      "document source");
}

Provenance provenance_from_string(std::string_view s) {
  return enum_from<Provenance>(
      s, {{"DICTIONARY", Provenance::Dictionary}, {"HUMAN", Provenance::Human}, {"MODEL", Provenance::Model}},
      "provenance");
}

MatchMode match_mode_from_string(std::string_view s) {
  const auto lower = fold_case(s);
  return enum_from<MatchMode>(lower, {{"exact", MatchMode::Exact}, {"overlap", MatchMode::Overlap}}, "match mode");
}

std::vector<Mention> preannotate(const Document& doc, const Dictionary& dict, const TypeSystem& ts) {
  dict.validate(ts);

  struct Form {
    std::string folded;
    const std::string* type;
  };
  // Bucketed by first folded byte; within a bucket longer forms come first.
  std::unordered_map<char, std::vector<Form>> buckets;
  for (const auto& [type, forms] : dict.entries()) {
    for (const auto& f : forms) {
      auto folded = fold_case(f);
      if (folded.empty()) continue;
      buckets[folded.front()].push_back({std::move(folded), &type});
    }
  }
  for (auto& [c, forms] : buckets) {
    std::stable_sort(forms.begin(), forms.end(),
                     [](const Form& a, const Form& b) { return a.folded.size() > b.folded.size(); });
  }

  const std::string text = fold_case(doc.text);
  std::vector<Mention> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const Form* hit = nullptr;
    if (at_boundary(text, i)) {
      if (auto b = buckets.find(text[i]); b != buckets.end()) {
        for (const auto& f : b->second) {
          const auto end = i + f.folded.size();
          if (end > text.size() || text.compare(i, f.folded.size(), f.folded) != 0) continue;
          if (!at_boundary(text, end)) continue;
          hit = &f;
          break;
        }
      }
    }
    if (!hit) {
      ++i;
      continue;
    }
    const auto end = i + hit->folded.size();
    out.push_back({doc.doc_id, i, end, *hit->type, "dictionary", Provenance::Dictionary});
    i = end;
  }
  return out;
}

std::array<std::size_t, 3> apportion(std::size_t n, std::array<double, 3> ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * ratios[i];
    // Absorb representation error such as 100 * 0.07 = 7.000000000000001.
    const double fl = std::floor(quota + 1e-9);
    sizes[i] = static_cast<std::size_t>(fl);
    remainder[i] = std::max(0.0, quota - fl);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < n; r = (r + 1) % 3, ++assigned) ++sizes[order[r]];
  return sizes;
}

CorpusSplit split_corpus(std::span<const std::string> doc_ids, std::array<double, 3> ratios, std::uint64_t seed) {
  if (doc_ids.empty()) throw ValidationError("split: empty corpus");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("split: ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split: ratios must sum to 1");
  std::unordered_set<std::string> seen;
  for (const auto& id : doc_ids) {
    if (!seen.insert(id).second) throw ValidationError("split: duplicate doc_id '" + id + "'");
  }

  std::vector<std::string> shuffled(doc_ids.begin(), doc_ids.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(shuffled));
  const auto sizes = apportion(shuffled.size(), ratios);

  CorpusSplit split;
  split.seed = seed;
  auto it = shuffled.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  split.test.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  split.blind.assign(it, shuffled.end());
  return split;
}

OverlapAssignment assign_overlap(std::span<const std::string> doc_ids, std::span<const std::string> annotators,
                                 double overlap_fraction, std::size_t batch_size, std::uint64_t seed) {
  if (annotators.size() != 2) throw ValidationError("assign: exactly two annotators are required");
  if (annotators[0] == annotators[1]) throw ValidationError("assign: annotators must differ");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0))
    throw ValidationError("assign: overlap fraction must be in [0, 1]");
  if (batch_size > doc_ids.size())
    throw ValidationError("assign: batch of " + std::to_string(batch_size) + " exceeds corpus of " +
                          std::to_string(doc_ids.size()));

  std::vector<std::string> pool(doc_ids.begin(), doc_ids.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(pool));

  const auto shared = std::min<std::size_t>(
      batch_size, static_cast<std::size_t>(std::llround(static_cast<double>(batch_size) * overlap_fraction)));
  const auto rest = batch_size - shared;
  const auto first_only = (rest + 1) / 2;

  OverlapAssignment out;
  out.shared.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shared));
  auto a = out.shared;
  auto b = out.shared;
  auto it = pool.begin() + static_cast<std::ptrdiff_t>(shared);
  a.insert(a.end(), it, it + static_cast<std::ptrdiff_t>(first_only));
  it += static_cast<std::ptrdiff_t>(first_only);
  b.insert(b.end(), it, it + static_cast<std::ptrdiff_t>(rest - first_only));
  out.per_annotator = {{annotators[0], std::move(a)}, {annotators[1], std::move(b)}};
  return out;
}

std::size_t count_matches(std::span<const Mention> pred, std::span<const Mention> gold, MatchMode mode) {
  const auto p = sorted_by_position(pred);
  const auto g = sorted_by_position(gold);
  std::unordered_map<std::string, std::vector<std::size_t>> gold_by_doc;
  for (std::size_t i = 0; i < g.size(); ++i) gold_by_doc[g[i].doc_id].push_back(i);

  std::vector<bool> used(g.size(), false);
  std::size_t matched = 0;
  for (const auto& m : p) {
    auto it = gold_by_doc.find(m.doc_id);
    if (it == gold_by_doc.end()) continue;
    for (auto gi : it->second) {
      if (used[gi] || !spans_match(m, g[gi], mode)) continue;
      used[gi] = true;
      ++matched;
      break;
    }
  }
  return matched;
}

AgreementReport pairwise_agreement(std::span<const Mention> a, std::span<const Mention> b, MatchMode mode,
                                   std::span<const std::string> shared_docs, std::span<const RelationMention> a_relations,
                                   std::span<const RelationMention> b_relations) {
  const std::unordered_set<std::string> shared(shared_docs.begin(), shared_docs.end());
  for (auto set : {a, b}) {
    for (const auto& m : set) {
      if (!shared.count(m.doc_id))
        throw ValidationError("agreement: mention in '" + m.doc_id + "' [" + std::to_string(m.start) + "," +
                              std::to_string(m.end) + ") is not on a shared document");
    }
  }

  std::map<std::string, std::pair<std::vector<Mention>, std::vector<Mention>>> by_type;
  for (const auto& m : a) by_type[m.entity_type].first.push_back(m);
  for (const auto& m : b) by_type[m.entity_type].second.push_back(m);

  AgreementReport report;
  report.mode = mode;
  report.a_total = a.size();
  report.b_total = b.size();
  for (const auto& [type, sets] : by_type) {
    const auto tp = count_matches(sets.first, sets.second, mode);
    report.matched += tp;
    report.per_type[type] = f1_of(tp, sets.first.size(), sets.second.size());
  }
  report.overall = f1_of(report.matched, a.size(), b.size());

  if (mode == MatchMode::Exact && (!a_relations.empty() || !b_relations.empty())) {
    auto key = [](const RelationMention& r) {
      return std::make_tuple(r.relation, r.subject.doc_id, r.subject.start, r.subject.end, r.subject.entity_type,
                             r.object.doc_id, r.object.start, r.object.end, r.object.entity_type);
    };
    std::multiset<decltype(key(a_relations.front()))> pool;
    for (const auto& r : b_relations) pool.insert(key(r));
    std::size_t tp = 0;
    for (const auto& r : a_relations) {
      if (auto it = pool.find(key(r)); it != pool.end()) {
        pool.erase(it);
        ++tp;
      }
    }
    report.relations = f1_of(tp, a_relations.size(), b_relations.size());
  }
  return report;
}

EvalReport evaluate(std::span<const Mention> pred, std::span<const Mention> gold, MatchMode mode) {
  EvalReport r;
  r.mode = mode;
  r.true_pos = count_matches(pred, gold, mode);
  r.pred_total = pred.size();
  r.gold_total = gold.size();
  r.precision = r.pred_total ? static_cast<double>(r.true_pos) / static_cast<double>(r.pred_total) : 0.0;
  r.recall = r.gold_total ? static_cast<double>(r.true_pos) / static_cast<double>(r.gold_total) : 0.0;
  r.f1 = (r.precision > 0.0 && r.recall > 0.0) ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

void validate_mentions(std::span<const Mention> mentions, std::span<const Document> docs, const TypeSystem& ts) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.doc_id] = &d;

  std::map<std::pair<std::string, std::string>, std::vector<const Mention*>> groups;
  for (const auto& m : mentions) {
    auto it = by_id.find(m.doc_id);
    if (it == by_id.end()) throw ValidationError("mention refers to unknown document '" + m.doc_id + "'");
    if (!(m.start < m.end && m.end <= it->second->text.size()))
      throw ValidationError("mention [" + std::to_string(m.start) + "," + std::to_string(m.end) + ") out of bounds in '" +
                            m.doc_id + "'");
    if (!ts.has_entity(m.entity_type)) throw ValidationError("mention has unknown entity type '" + m.entity_type + "'");
    groups[{m.annotator_id, m.doc_id}].push_back(&m);
  }
  for (auto& [key, ms] : groups) {
    std::sort(ms.begin(), ms.end(), [](const Mention* x, const Mention* y) { return x->start < y->start; });
    for (std::size_t i = 1; i < ms.size(); ++i) {
      if (ms[i]->start < ms[i - 1]->end)
        throw ValidationError("annotator '" + key.first + "' has overlapping mentions in '" + key.second + "' at " +
                              std::to_string(ms[i]->start));
    }
  }
}

void validate_relation_mention(const RelationMention& r, const TypeSystem& ts) {
  if (r.subject.doc_id != r.object.doc_id) throw ValidationError("relation '" + r.relation + "' spans two documents");
  if (!ts.validate_relation(r.relation, r.subject.entity_type, r.object.entity_type))
    throw ValidationError("relation '" + r.relation + "' does not accept " + r.subject.entity_type + " -> " +
                          r.object.entity_type);
}

json document_to_json(const Document& d) {
  return json{{"doc_id", d.doc_id}, {"source", to_string(d.source)}, {"text", d.text}};
}

Document document_from_json(const json& j) {
  Document d;
  try {
    d.doc_id = j.at("doc_id").get<std::string>();
    if (auto s = j.find("source"); s != j.end()) d.source = document_source_from_string(s->get<std::string>());
    d.text = j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("document: ") + e.what());
  }
  if (d.doc_id.empty()) throw ValidationError("document: empty doc_id");
  if (blank(d.text)) throw ValidationError("document '" + d.doc_id + "': empty text");
  return d;
}

json mention_to_json(const Mention& m) {
  return json{{"doc", m.doc_id},       {"start", m.start},          {"end", m.end},
              {"type", m.entity_type}, {"annotator", m.annotator_id}, {"provenance", to_string(m.provenance)}};
}

Mention mention_from_json(const json& j) {
  Mention m;
  try {
    m.doc_id = j.at("doc").get<std::string>();
    m.start = j.at("start").get<std::size_t>();
    m.end = j.at("end").get<std::size_t>();
    m.entity_type = j.at("type").get<std::string>();
    if (auto a = j.find("annotator"); a != j.end()) m.annotator_id = a->get<std::string>();
    if (auto p = j.find("provenance"); p != j.end()) m.provenance = provenance_from_string(p->get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mention: ") + e.what());
  }
  if (m.start >= m.end) throw ValidationError("mention: start must be before end");
  return m;
}

namespace {

json span_json(const Mention& m) { return json{{"start", m.start}, {"end", m.end}, {"type", m.entity_type}}; }

Mention span_from(const json& j, const std::string& doc, const std::string& annotator) {
  Mention m;
  m.doc_id = doc;
  m.start = j.at("start").get<std::size_t>();
  m.end = j.at("end").get<std::size_t>();
  m.entity_type = j.at("type").get<std::string>();
  m.annotator_id = annotator;
  return m;
}

} // namespace

json relation_to_json(const RelationMention& r) {
  return json{{"relation", r.relation},
              {"doc", r.subject.doc_id},
              {"annotator", r.annotator_id},
              {"subject", span_json(r.subject)},
              {"object", span_json(r.object)}};
}

RelationMention relation_from_json(const json& j) {
  RelationMention r;
  try {
    r.relation = j.at("relation").get<std::string>();
    const auto doc = j.at("doc").get<std::string>();
    r.annotator_id = j.value("annotator", std::string());
    r.subject = span_from(j.at("subject"), doc, r.annotator_id);
    r.object = span_from(j.at("object"), doc, r.annotator_id);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("relation: ") + e.what());
  }
  return r;
}

json split_to_json(const CorpusSplit& s) {
  return json{{"seed", s.seed},
              {"sizes", {{"train", s.train.size()}, {"test", s.test.size()}, {"blind", s.blind.size()}}},
              {"train", s.train},
              {"test", s.test},
              {"blind", s.blind}};
}

json assignment_to_json(const OverlapAssignment& a) {
  json per = json::object();
  for (const auto& [name, docs] : a.per_annotator) per[name] = docs;
  return json{{"shared", a.shared}, {"annotators", std::move(per)}};
}

json agreement_to_json(const AgreementReport& r) {
  json j{{"mode", to_string(r.mode)}, {"overall", r.overall},   {"per_type", r.per_type},
         {"matched", r.matched},      {"a_total", r.a_total},   {"b_total", r.b_total}};
  j["relations"] = r.relations ? json(*r.relations) : json(nullptr);
  return j;
}

json eval_to_json(const EvalReport& r) {
  return json{{"mode", to_string(r.mode)},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"counts", {{"true_pos", r.true_pos}, {"pred_total", r.pred_total}, {"gold_total", r.gold_total}}}};
}

std::vector<Document> read_documents_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto d = document_from_json(parse_line(line, lineno));
    if (!ids.insert(d.doc_id).second)
      throw ValidationError("line " + std::to_string(lineno) + ": duplicate doc_id '" + d.doc_id + "'");
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_documents_jsonl(std::ostream& out, std::span<const Document> docs) {
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

StandoffSet read_standoff_jsonl(std::istream& in) {
  StandoffSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto j = parse_line(line, lineno);
    try {
      if (j.contains("relation"))
        set.relations.push_back(relation_from_json(j));
      else
        set.mentions.push_back(mention_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return set;
}

void write_standoff_jsonl(std::ostream& out, std::span<const Mention> mentions,
                          std::span<const RelationMention> relations) {
  for (const auto& m : mentions) out << mention_to_json(m).dump() << '\n';
  for (const auto& r : relations) out << relation_to_json(r).dump() << '\n';
}

} // namespace incat
