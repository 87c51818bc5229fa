#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace incat {

// Index of a value inside one feature's domain.
using CategoryCode = std::uint8_t;

struct Feature {
  std::string name;
  std::vector<std::string> domain;
  // Alternate spellings accepted on input, mapped onto a domain value.
  std::vector<std::pair<std::string, std::string>> aliases;
};

/// Ordered list of categorical features and their value domains.
///
/// The default instance holds the seven CVSS v3 base metrics used for
/// clustering, keyed by their NVD JSON field names.
class FeatureSchema {
public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Feature> features);

  static const FeatureSchema& cvss_v3();

  std::size_t size() const noexcept { return features_.size(); }
  const Feature& feature(std::size_t i) const { return features_.at(i); }
  std::span<const Feature> features() const noexcept { return features_; }

  std::optional<std::size_t> index_of(std::string_view feature_name) const;

  // Upper-cases `value`, resolves aliases and returns the domain index.
  std::optional<CategoryCode> encode(std::size_t feature, std::string_view value) const;
  const std::string& decode(std::size_t feature, CategoryCode code) const;

  // Product of all domain sizes: the number of distinct vectors possible.
  std::uint64_t combination_count() const noexcept;

  bool operator==(const FeatureSchema& other) const;

private:
  std::vector<Feature> features_;
};

/// One categorical observation, stored as domain indices in schema order.
struct CategoricalVector {
  std::vector<CategoryCode> codes;

  std::size_t size() const noexcept { return codes.size(); }
  CategoryCode operator[](std::size_t i) const { return codes[i]; }

  auto operator<=>(const CategoricalVector&) const = default;
};

// {"attackVector": "NETWORK", ...}
nlohmann::json vector_to_json(const CategoricalVector& v, const FeatureSchema& schema);
// Throws ValidationError naming the offending field.
CategoricalVector vector_from_json(const nlohmann::json& j, const FeatureSchema& schema);

// "NETWORK/LOW/NONE/..." for tables and logs.
std::string vector_label(const CategoricalVector& v, const FeatureSchema& schema);

/// Row-major matrix of categorical codes with a fixed column count.
class CategoricalMatrix {
public:
  CategoricalMatrix() = default;
  explicit CategoricalMatrix(std::size_t cols) : cols_(cols) {}

  static CategoricalMatrix from_rows(std::span<const CategoricalVector> rows);

  std::size_t rows() const noexcept { return cols_ == 0 ? 0 : data_.size() / cols_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const CategoryCode> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  CategoricalVector vector(std::size_t i) const;

  // Throws ValidationError on width mismatch.
  void push_back(std::span<const CategoryCode> row);
  void push_back(const CategoricalVector& v) { push_back(std::span<const CategoryCode>(v.codes)); }

  // Per-column count of codes in use (max code + 1).
  std::vector<std::size_t> column_cardinalities() const;

private:
  std::size_t cols_ = 0;
  std::vector<CategoryCode> data_;
};

} // namespace incat
