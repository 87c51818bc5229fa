#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incat/typesystem.hpp"

namespace incat {

enum class DocumentSource { ThreatReport, AssessmentResponse };
enum class Provenance { Dictionary, Human, Model };
enum class MatchMode { Exact, Overlap };

std::string_view to_string(DocumentSource s);
std::string_view to_string(Provenance p);
std::string_view to_string(MatchMode m);
DocumentSource document_source_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);
MatchMode match_mode_from_string(std::string_view s);

struct Document {
  std::string doc_id;
  DocumentSource source = DocumentSource::ThreatReport;
  std::string text;

  bool operator==(const Document&) const = default;
};

// Offsets are UTF-8 byte offsets into Document::text, [start, end).
struct Mention {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string entity_type;
  std::string annotator_id;
  Provenance provenance = Provenance::Human;

  bool operator==(const Mention&) const = default;
};

// A typed relation between two mentions in the same document.
struct RelationMention {
  std::string relation;
  Mention subject;
  Mention object;
  std::string annotator_id;
};

/// Dictionary pre-annotation: case-insensitive, token-bounded,
/// leftmost-longest matching with no overlaps. A token boundary is a string
/// edge or a position next to a non-alphanumeric character.
std::vector<Mention> preannotate(const Document& doc, const Dictionary& dict, const TypeSystem& ts);

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> blind;
  std::uint64_t seed = 0;
};

inline constexpr std::array<double, 3> kDefaultSplitRatios{0.70, 0.23, 0.07};

// Sizes for n items by largest-remainder apportionment. Ties in the
// remainder go to the earlier share.
std::array<std::size_t, 3> apportion(std::size_t n, std::array<double, 3> ratios);

// Seeded shuffle followed by apportionment. Ratios must be positive and sum
// to 1 within 1e-9.
CorpusSplit split_corpus(std::span<const std::string> doc_ids, std::array<double, 3> ratios,
                         std::uint64_t seed);

struct OverlapAssignment {
  std::vector<std::string> shared;
  // annotator -> assigned docs (shared ones first), in annotator order.
  std::vector<std::pair<std::string, std::vector<std::string>>> per_annotator;
};

// Draws `batch_size` documents, gives round(batch_size * overlap) of them to
// both annotators and splits the rest between them (first annotator takes
// the odd one). Exactly two annotators.
OverlapAssignment assign_overlap(std::span<const std::string> doc_ids,
                                 std::span<const std::string> annotators, double overlap_fraction,
                                 std::size_t batch_size, std::uint64_t seed);

struct AgreementReport {
  MatchMode mode = MatchMode::Exact;
  std::map<std::string, double> per_type;
  double overall = 0.0;
  std::size_t matched = 0;
  std::size_t a_total = 0;
  std::size_t b_total = 0;
  // Relation agreement, only computed in exact mode.
  std::optional<double> relations;
};

struct EvalReport {
  MatchMode mode = MatchMode::Exact;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_pos = 0;
  std::size_t pred_total = 0;
  std::size_t gold_total = 0;
};

// Greedy one-to-one matching in (doc_id, start, end) order. Returns the
// number of matched pairs.
std::size_t count_matches(std::span<const Mention> pred, std::span<const Mention> gold, MatchMode mode);

/// Entity agreement between two annotators over shared documents. Throws
/// ValidationError if a mention refers to a document outside `shared_docs`.
AgreementReport pairwise_agreement(std::span<const Mention> a, std::span<const Mention> b,
                                   MatchMode mode, std::span<const std::string> shared_docs,
                                   std::span<const RelationMention> a_relations = {},
                                   std::span<const RelationMention> b_relations = {});

EvalReport evaluate(std::span<const Mention> pred, std::span<const Mention> gold, MatchMode mode);

// Checks offsets against the document text, the entity type against `ts`,
// and per-annotator non-overlap. Throws ValidationError.
void validate_mentions(std::span<const Mention> mentions, std::span<const Document> docs,
                       const TypeSystem& ts);
void validate_relation_mention(const RelationMention& r, const TypeSystem& ts);

nlohmann::json document_to_json(const Document& d);
Document document_from_json(const nlohmann::json& j);
nlohmann::json mention_to_json(const Mention& m);
Mention mention_from_json(const nlohmann::json& j);
nlohmann::json relation_to_json(const RelationMention& r);
RelationMention relation_from_json(const nlohmann::json& j);
nlohmann::json split_to_json(const CorpusSplit& s);
nlohmann::json assignment_to_json(const OverlapAssignment& a);
nlohmann::json agreement_to_json(const AgreementReport& r);
nlohmann::json eval_to_json(const EvalReport& r);

std::vector<Document> read_documents_jsonl(std::istream& in);
void write_documents_jsonl(std::ostream& out, std::span<const Document> docs);

// Standoff file: mention lines, plus optional relation lines that carry a
// "relation" member.
struct StandoffSet {
  std::vector<Mention> mentions;
  std::vector<RelationMention> relations;
};
StandoffSet read_standoff_jsonl(std::istream& in);
void write_standoff_jsonl(std::ostream& out, std::span<const Mention> mentions,
                          std::span<const RelationMention> relations = {});

} // namespace incat
