#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "incat/schema.hpp"

namespace incat {

struct CveRecord {
  std::string id;
  std::string description;
  std::optional<CategoricalVector> base_metrics;
  std::optional<std::string> published;

  bool operator==(const CveRecord&) const = default;
};

// A CVE item that could not be turned into a record. The rest of the feed
// still parses.
struct FeedReject {
  std::size_t item_index = 0;
  std::string id;     // may be empty if the id itself was unreadable
  std::string field;  // e.g. "attackVector", "description"
  std::string value;
  std::string reason;
};

struct FeedParseResult {
  std::vector<CveRecord> records;
  std::vector<FeedReject> rejects;
  std::size_t item_count = 0;

  std::size_t with_metrics() const;
};

bool is_valid_cve_id(std::string_view id);

/// Parses an NVD JSON 1.0 feed (top-level `CVE_Items`).
///
/// Only the fields needed downstream are read: the id, the first English
/// description, `publishedDate` and the seven CVSS v3 categorical base
/// metrics. Items without v3 metrics keep `base_metrics` empty. Items with
/// an unreadable id, empty description or an out-of-domain metric value go
/// to `rejects`, so `records.size() + rejects.size() == item_count`.
///
/// Throws ParseError for malformed JSON and ValidationError when the
/// document is not shaped like a feed.
FeedParseResult parse_nvd_feed(std::string_view feed_bytes,
                               const FeatureSchema& schema = FeatureSchema::cvss_v3());

struct FeatureMatrix {
  std::vector<std::string> ids;
  CategoricalMatrix rows;
};

// Records with metrics, in input order. Duplicates are kept.
FeatureMatrix categorical_matrix(const std::vector<CveRecord>& records,
                                 const FeatureSchema& schema = FeatureSchema::cvss_v3());

// Internal record JSONL: {"id","description","metrics":{...}|null,"published":...|null}
std::string record_to_jsonl(const CveRecord& record, const FeatureSchema& schema);
CveRecord record_from_jsonl(std::string_view line, const FeatureSchema& schema);
void write_records_jsonl(std::ostream& out, const std::vector<CveRecord>& records,
                         const FeatureSchema& schema);
std::vector<CveRecord> read_records_jsonl(std::istream& in, const FeatureSchema& schema);

// Clustering input files. JSONL lines are either bare metric objects or
// record lines carrying a "metrics" member (null metrics are skipped).
CategoricalMatrix read_matrix_jsonl(std::istream& in, const FeatureSchema& schema);
// CSV with a header row naming every schema feature (any column order).
CategoricalMatrix read_matrix_csv(std::istream& in, const FeatureSchema& schema);

} // namespace incat
