#include "incat/nvd.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "incat/error.hpp"

namespace incat {

using nlohmann::json;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

const json* find_path(const json& j, std::initializer_list<const char*> path) {
  const json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

// First English entry, or nullptr.
const json* english_description(const json& cve) {
  const json* data = find_path(cve, {"description", "description_data"});
  if (!data || !data->is_array()) return nullptr;
  for (const auto& entry : *data) {
    if (!entry.is_object()) continue;
    auto lang = entry.find("lang");
    if (lang != entry.end() && lang->is_string() && *lang != "en") continue;
    auto value = entry.find("value");
    if (value != entry.end() && value->is_string()) return &*value;
  }
  return nullptr;
}

// cvssV3 object under baseMetricV3, falling back to baseMetricV31.
const json* cvss_v3_block(const json& item) {
  for (const char* key : {"baseMetricV3", "baseMetricV31"}) {
    const json* block = find_path(item, {"impact", key, "cvssV3"});
    if (block && block->is_object()) return block;
  }
  return nullptr;
}

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

} // namespace

std::size_t FeedParseResult::with_metrics() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CveRecord& r) { return r.base_metrics.has_value(); }));
}

bool is_valid_cve_id(std::string_view id) {
  if (id.size() < 13 || id.substr(0, 4) != "CVE-") return false;
  const auto year = id.substr(4, 4);
  if (!all_digits(year) || id[8] != '-') return false;
  const auto seq = id.substr(9);
  return seq.size() >= 4 && all_digits(seq);
}

FeedParseResult parse_nvd_feed(std::string_view feed_bytes, const FeatureSchema& schema) {
  const json doc = parse_json(feed_bytes);
  if (!doc.is_object()) throw ValidationError("NVD feed: top level is not an object");
  auto items_it = doc.find("CVE_Items");
  if (items_it == doc.end()) throw ValidationError("NVD feed: missing CVE_Items");
  if (!items_it->is_array()) throw ValidationError("NVD feed: CVE_Items is not an array");

  FeedParseResult out;
  out.item_count = items_it->size();
  out.records.reserve(out.item_count);

  std::size_t index = 0;
  for (const auto& item : *items_it) {
    const std::size_t item_index = index++;
    auto reject = [&](std::string id, std::string field, std::string value, std::string reason) {
      out.rejects.push_back({item_index, std::move(id), std::move(field), std::move(value), std::move(reason)});
    };

    const json* id_node = find_path(item, {"cve", "CVE_data_meta", "ID"});
    if (!id_node || !id_node->is_string()) {
      reject("", "ID", "", "missing CVE_data_meta.ID");
      continue;
    }
    CveRecord rec;
    rec.id = id_node->get<std::string>();
    if (!is_valid_cve_id(rec.id)) {
      reject(rec.id, "ID", rec.id, "not a CVE identifier");
      continue;
    }

    const json* desc = english_description(item.at("cve"));
    if (!desc || blank(desc->get_ref<const std::string&>())) {
      reject(rec.id, "description", "", "no non-empty English description");
      continue;
    }
    rec.description = desc->get<std::string>();

    if (auto pub = item.find("publishedDate"); pub != item.end() && pub->is_string())
      rec.published = pub->get<std::string>();

    if (const json* cvss = cvss_v3_block(item)) {
      CategoricalVector v;
      v.codes.reserve(schema.size());
      bool ok = true;
      for (std::size_t f = 0; f < schema.size() && ok; ++f) {
        const auto& name = schema.feature(f).name;
        auto field = cvss->find(name);
        if (field == cvss->end() || !field->is_string()) {
          reject(rec.id, name, "", "missing base metric");
          ok = false;
          break;
        }
        const auto& raw = field->get_ref<const std::string&>();
        auto code = schema.encode(f, raw);
        if (!code) {
          reject(rec.id, name, raw, "value outside feature domain");
          ok = false;
          break;
        }
        v.codes.push_back(*code);
      }
      if (!ok) continue;
      rec.base_metrics = std::move(v);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

FeatureMatrix categorical_matrix(const std::vector<CveRecord>& records, const FeatureSchema& schema) {
  FeatureMatrix m;
  m.rows = CategoricalMatrix(schema.size());
  for (const auto& r : records) {
    if (!r.base_metrics) continue;
    m.ids.push_back(r.id);
    m.rows.push_back(*r.base_metrics);
  }
  return m;
}

std::string record_to_jsonl(const CveRecord& record, const FeatureSchema& schema) {
  json j;
  j["id"] = record.id;
  j["description"] = record.description;
  j["metrics"] = record.base_metrics ? vector_to_json(*record.base_metrics, schema) : json(nullptr);
  j["published"] = record.published ? json(*record.published) : json(nullptr);
  return j.dump();
}

CveRecord record_from_jsonl(std::string_view line, const FeatureSchema& schema) {
  const json j = parse_json(line);
  if (!j.is_object()) throw ValidationError("record line is not an object");
  CveRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.description = j.at("description").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("record line: ") + e.what());
  }
  if (!is_valid_cve_id(r.id)) throw ValidationError("record '" + r.id + "': not a CVE identifier");
  if (auto m = j.find("metrics"); m != j.end() && !m->is_null()) r.base_metrics = vector_from_json(*m, schema);
  if (auto p = j.find("published"); p != j.end() && p->is_string()) r.published = p->get<std::string>();
  return r;
}

void write_records_jsonl(std::ostream& out, const std::vector<CveRecord>& records, const FeatureSchema& schema) {
  for (const auto& r : records) out << record_to_jsonl(r, schema) << '\n';
}

std::vector<CveRecord> read_records_jsonl(std::istream& in, const FeatureSchema& schema) {
  std::vector<CveRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(record_from_jsonl(line, schema));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

CategoricalMatrix read_matrix_jsonl(std::istream& in, const FeatureSchema& schema) {
  CategoricalMatrix m(schema.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const json j = parse_json(line);
    const json* metrics = &j;
    if (j.is_object() && j.contains("metrics")) {
      metrics = &j.at("metrics");
      if (metrics->is_null()) continue;
    }
    try {
      m.push_back(vector_from_json(*metrics, schema));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  for (auto& cell : cells) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return cells;
}

} // namespace

CategoricalMatrix read_matrix_csv(std::istream& in, const FeatureSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV: missing header row");
  const auto header = split_csv_line(line);
  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    auto it = std::find(header.begin(), header.end(), schema.feature(f).name);
    if (it == header.end()) throw ValidationError("CSV: header lacks column '" + schema.feature(f).name + "'");
    column_of[f] = static_cast<std::size_t>(it - header.begin());
  }

  CategoricalMatrix m(schema.size());
  std::vector<CategoryCode> row(schema.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " cells, got " + std::to_string(cells.size()));
    for (std::size_t f = 0; f < schema.size(); ++f) {
      auto code = schema.encode(f, cells[column_of[f]]);
      if (!code)
        throw ValidationError("CSV line " + std::to_string(lineno) + ": value '" + cells[column_of[f]] +
                              "' not in domain of '" + schema.feature(f).name + "'");
      row[f] = *code;
    }
    m.push_back(row);
  }
  return m;
}

} // namespace incat
