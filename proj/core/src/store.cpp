#include "incat/store.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "incat/error.hpp"

namespace incat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Collection kAllCollections[] = {Collection::Records,     Collection::Models,    Collection::Themes,
                                          Collection::Corpora,     Collection::Mentions,  Collection::Assessments,
                                          Collection::Responses,   Collection::Reports};

std::string errno_text() { return std::strerror(errno); }

void write_file_durably(const fs::path& path, const std::string& content) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError("open '" + path.string() + "': " + errno_text());
  std::size_t written = 0;
  while (written < content.size()) {
    const auto n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const auto msg = errno_text();
      ::close(fd);
      throw StoreError("write '" + path.string() + "': " + msg);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const auto msg = errno_text();
    ::close(fd);
    throw StoreError("fsync '" + path.string() + "': " + msg);
  }
  ::close(fd);
}

void sync_directory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

} // namespace

std::string_view to_string(Collection c) {
  switch (c) {
    case Collection::Records: return "records";
    case Collection::Models: return "models";
    case Collection::Themes: return "themes";
    case Collection::Corpora: return "corpora";
    case Collection::Mentions: return "mentions";
    case Collection::Assessments: return "assessments";
    case Collection::Responses: return "responses";
    case Collection::Reports: return "reports";
  }
  return "unknown";
}

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreError("cannot create store '" + root_.string() + "': " + ec.message());

  const auto manifest = root_ / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw StoreError("unreadable manifest '" + manifest.string() + "': " + e.what());
    }
    const auto version = m.value("schema_version", -1);
    if (version != kStoreSchemaVersion)
      throw StoreError("store '" + root_.string() + "' has schema version " + std::to_string(version) + ", expected " +
                       std::to_string(kStoreSchemaVersion));
    return;
  }
  json collections = json::array();
  for (auto c : kAllCollections) collections.push_back(std::string(to_string(c)) + ".jsonl");
  const json m{{"schema_version", kStoreSchemaVersion}, {"collections", std::move(collections)}};
  const auto tmp = root_ / ".manifest.json.tmp";
  write_file_durably(tmp, m.dump(2) + "\n");
  fs::rename(tmp, manifest, ec);
  if (ec) throw StoreError("cannot write manifest: " + ec.message());
  sync_directory(root_);
}

fs::path Store::path_of(Collection c) const { return root_ / (std::string(to_string(c)) + ".jsonl"); }

std::string Store::read_raw(Collection c) const {
  std::ifstream in(path_of(c), std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<json> Store::read(Collection c) const {
  const auto raw = read_raw(c);
  std::vector<json> out;
  std::istringstream in(raw);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw StoreError(path_of(c).string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::optional<json> Store::latest(Collection c) const {
  auto all = read(c);
  if (all.empty()) return std::nullopt;
  return std::move(all.back());
}

void Store::write_atomic(Collection c, const std::string& content) {
  const auto target = path_of(c);
  const auto tmp = root_ / ("." + target.filename().string() + ".tmp");
  write_file_durably(tmp, content);
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StoreError("rename into '" + target.string() + "' failed");
  }
  sync_directory(root_);
}

void Store::append(Collection c, const json& value) { append_all(c, {value}); }

void Store::append_all(Collection c, const std::vector<json>& values) {
  std::lock_guard lock(write_mutex_);
  std::string content = read_raw(c);
  if (!content.empty() && content.back() != '\n') content += '\n';
  for (const auto& v : values) content += v.dump() + "\n";
  write_atomic(c, content);
}

void Store::replace(Collection c, const std::vector<json>& values) {
  std::lock_guard lock(write_mutex_);
  std::string content;
  for (const auto& v : values) content += v.dump() + "\n";
  write_atomic(c, content);
}

std::vector<CveRecord> Store::records(const FeatureSchema& schema) const {
  const auto raw = read_raw(Collection::Records);
  std::istringstream in(raw);
  return read_records_jsonl(in, schema);
}

void Store::put_records(const std::vector<CveRecord>& records, const FeatureSchema& schema) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(json::parse(record_to_jsonl(r, schema)));
  replace(Collection::Records, lines);
}

std::optional<ClusterModel> Store::latest_model(const FeatureSchema& schema) const {
  auto j = latest(Collection::Models);
  if (!j) return std::nullopt;
  return model_from_json(*j, schema);
}

std::vector<Theme> Store::themes(const FeatureSchema& schema) const {
  std::vector<Theme> out;
  for (const auto& j : read(Collection::Themes)) out.push_back(theme_from_json(j, schema));
  return out;
}

std::vector<Assessment> Store::assessments() const {
  std::vector<Assessment> out;
  for (const auto& j : read(Collection::Assessments)) out.push_back(assessment_from_json(j));
  return out;
}

std::optional<Assessment> Store::assessment(const std::string& id) const {
  std::optional<Assessment> found;
  for (const auto& j : read(Collection::Assessments)) {
    if (j.value("assessment_id", std::string()) == id) found = assessment_from_json(j);
  }
  return found;
}

std::vector<ResponseSet> Store::responses() const {
  std::vector<ResponseSet> out;
  for (const auto& j : read(Collection::Responses)) out.push_back(response_from_json(j));
  return out;
}

std::optional<json> Store::latest_report(std::string_view kind) const {
  std::optional<json> found;
  for (auto& j : read(Collection::Reports)) {
    if (j.value("kind", std::string()) == kind) found = std::move(j);
  }
  return found;
}

} // namespace incat
