#include "incat/schema.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "incat/error.hpp"

namespace incat {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

} // namespace

FeatureSchema::FeatureSchema(std::vector<Feature> features) : features_(std::move(features)) {
  std::set<std::string> names;
  for (const auto& f : features_) {
    if (f.name.empty()) throw ValidationError("feature schema: empty feature name");
    if (!names.insert(f.name).second) throw ValidationError("feature schema: duplicate feature '" + f.name + "'");
    if (f.domain.empty()) throw ValidationError("feature schema: empty domain for '" + f.name + "'");
    if (f.domain.size() > 255) throw ValidationError("feature schema: domain too large for '" + f.name + "'");
    std::set<std::string> values(f.domain.begin(), f.domain.end());
    if (values.size() != f.domain.size())
      throw ValidationError("feature schema: duplicate value in domain of '" + f.name + "'");
    for (const auto& [alias, target] : f.aliases) {
      if (!values.count(target))
        throw ValidationError("feature schema: alias '" + alias + "' targets unknown value '" + target + "'");
    }
  }
}

const FeatureSchema& FeatureSchema::cvss_v3() {
  static const FeatureSchema schema({
      {"attackVector", {"NETWORK", "ADJACENT", "LOCAL", "PHYSICAL"}, {{"ADJACENT_NETWORK", "ADJACENT"}}},
      {"attackComplexity", {"LOW", "HIGH"}, {}},
      {"privilegesRequired", {"NONE", "LOW", "HIGH"}, {}},
      {"userInteraction", {"NONE", "REQUIRED"}, {}},
      {"confidentialityImpact", {"HIGH", "LOW", "NONE"}, {}},
      {"integrityImpact", {"HIGH", "LOW", "NONE"}, {}},
      {"availabilityImpact", {"HIGH", "LOW", "NONE"}, {}},
  });
  return schema;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view feature_name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == feature_name) return i;
  }
  return std::nullopt;
}

std::optional<CategoryCode> FeatureSchema::encode(std::size_t feature, std::string_view value) const {
  const auto& f = features_.at(feature);
  std::string v = upper(value);
  for (const auto& [alias, target] : f.aliases) {
    if (upper(alias) == v) {
      v = target;
      break;
    }
  }
  for (std::size_t i = 0; i < f.domain.size(); ++i) {
    if (upper(f.domain[i]) == v) return static_cast<CategoryCode>(i);
  }
  return std::nullopt;
}

const std::string& FeatureSchema::decode(std::size_t feature, CategoryCode code) const {
  return features_.at(feature).domain.at(code);
}

std::uint64_t FeatureSchema::combination_count() const noexcept {
  if (features_.empty()) return 0;
  std::uint64_t n = 1;
  for (const auto& f : features_) n *= f.domain.size();
  return n;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
  if (features_.size() != other.features_.size()) return false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name != other.features_[i].name || features_[i].domain != other.features_[i].domain)
      return false;
  }
  return true;
}

nlohmann::json vector_to_json(const CategoricalVector& v, const FeatureSchema& schema) {
  if (v.size() != schema.size()) throw ValidationError("vector width does not match schema");
  auto j = nlohmann::json::object();
  for (std::size_t i = 0; i < v.size(); ++i) j[schema.feature(i).name] = schema.decode(i, v[i]);
  return j;
}

CategoricalVector vector_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  if (!j.is_object()) throw ValidationError("metrics must be a JSON object");
  CategoricalVector v;
  v.codes.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& name = schema.feature(i).name;
    auto it = j.find(name);
    if (it == j.end() || !it->is_string()) throw ValidationError("metrics: missing field '" + name + "'");
    auto code = schema.encode(i, it->get<std::string>());
    if (!code)
      throw ValidationError("metrics: value '" + it->get<std::string>() + "' not in domain of '" + name + "'");
    v.codes.push_back(*code);
  }
  return v;
}

std::string vector_label(const CategoricalVector& v, const FeatureSchema& schema) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += '/';
    out += schema.decode(i, v[i]);
  }
  return out;
}

CategoricalMatrix CategoricalMatrix::from_rows(std::span<const CategoricalVector> rows) {
  CategoricalMatrix m(rows.empty() ? 0 : rows.front().size());
  for (const auto& r : rows) m.push_back(r);
  return m;
}

CategoricalVector CategoricalMatrix::vector(std::size_t i) const {
  auto r = row(i);
  return CategoricalVector{{r.begin(), r.end()}};
}

void CategoricalMatrix::push_back(std::span<const CategoryCode> row) {
  if (data_.empty() && cols_ == 0) cols_ = row.size();
  if (row.size() != cols_ || cols_ == 0)
    throw ValidationError("row width " + std::to_string(row.size()) + " does not match matrix width " +
                          std::to_string(cols_));
  data_.insert(data_.end(), row.begin(), row.end());
}

std::vector<std::size_t> CategoricalMatrix::column_cardinalities() const {
  std::vector<std::size_t> card(cols_, 0);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    auto& c = card[i % cols_];
    c = std::max<std::size_t>(c, static_cast<std::size_t>(data_[i]) + 1);
  }
  return card;
}

} // namespace incat
