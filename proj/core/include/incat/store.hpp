#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "incat/assess.hpp"
#include "incat/kmodes.hpp"
#include "incat/nvd.hpp"
#include "incat/themes.hpp"

namespace incat {

inline constexpr int kStoreSchemaVersion = 1;

enum class Collection { Records, Models, Themes, Corpora, Mentions, Assessments, Responses, Reports };

std::string_view to_string(Collection c);

/// Directory of JSONL collections plus manifest.json.
///
/// Every mutation rewrites the collection file to a temporary sibling,
/// fsyncs it and renames it over the original, so a crash leaves either the
/// old or the new file. Writes are serialized by one mutex; reads open the
/// current file without locking.
class Store {
public:
  // Creates the directory and manifest if missing. Throws StoreError on a
  // manifest version mismatch.
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path path_of(Collection c) const;

  std::vector<nlohmann::json> read(Collection c) const;
  std::optional<nlohmann::json> latest(Collection c) const;

  void append(Collection c, const nlohmann::json& value);
  void append_all(Collection c, const std::vector<nlohmann::json>& values);
  void replace(Collection c, const std::vector<nlohmann::json>& values);

  // Typed accessors over the collections above.
  std::vector<CveRecord> records(const FeatureSchema& schema = FeatureSchema::cvss_v3()) const;
  void put_records(const std::vector<CveRecord>& records,
                   const FeatureSchema& schema = FeatureSchema::cvss_v3());
  std::optional<ClusterModel> latest_model(const FeatureSchema& schema = FeatureSchema::cvss_v3()) const;
  std::vector<Theme> themes(const FeatureSchema& schema = FeatureSchema::cvss_v3()) const;
  std::vector<Assessment> assessments() const;
  std::optional<Assessment> assessment(const std::string& id) const;
  std::vector<ResponseSet> responses() const;
  // Latest entry of the reports collection with "kind" == kind.
  std::optional<nlohmann::json> latest_report(std::string_view kind) const;

private:
  void write_atomic(Collection c, const std::string& content);
  std::string read_raw(Collection c) const;

  std::filesystem::path root_;
  std::mutex write_mutex_;
};

} // namespace incat
