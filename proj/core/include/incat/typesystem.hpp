#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace incat {

struct EntityType {
  std::string name;
  std::optional<std::string> parent;
  std::string description;

  bool operator==(const EntityType&) const = default;
};

struct RelationType {
  std::string name;
  std::string domain;
  std::string range;
  std::string description;

  bool operator==(const RelationType&) const = default;
};

/// Entity-type forest plus typed relations. Immutable once built; the
/// constructor validates uniqueness, references and acyclicity.
class TypeSystem {
public:
  TypeSystem(std::vector<EntityType> entities, std::vector<RelationType> relations);

  // {"entities":[{"name","parent","desc"}...],"relations":[{"name","domain","range","desc"}...]}
  static TypeSystem from_json(const nlohmann::json& j);
  static TypeSystem load(const std::string& path);
  static const TypeSystem& defaults();
  nlohmann::json to_json() const;

  bool has_entity(std::string_view name) const;
  bool has_relation(std::string_view name) const;
  const EntityType& entity(std::string_view name) const;
  const RelationType& relation(std::string_view name) const;

  const std::vector<EntityType>& entities() const noexcept { return entities_; }
  const std::vector<RelationType>& relations() const noexcept { return relations_; }

  // Reflexive: is_subtype(x, x) is true. Throws NotFoundError for unknown names.
  bool is_subtype(std::string_view child, std::string_view ancestor) const;
  bool validate_relation(std::string_view relation, std::string_view subject_type,
                         std::string_view object_type) const;

  bool operator==(const TypeSystem& other) const {
    return entities_ == other.entities_ && relations_ == other.relations_;
  }

private:
  std::vector<EntityType> entities_;
  std::vector<RelationType> relations_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::unordered_map<std::string, std::size_t> relation_index_;
};

/// Gazetteer: surface forms per entity type.
class Dictionary {
public:
  Dictionary() = default;
  // Validates every key against `ts`; forms must be non-empty and unique per
  // type after ASCII case folding.
  Dictionary(std::map<std::string, std::vector<std::string>> entries, const TypeSystem& ts);

  static Dictionary from_json(const nlohmann::json& j, const TypeSystem& ts);
  static Dictionary load(const std::string& path, const TypeSystem& ts);
  static Dictionary defaults();
  nlohmann::json to_json() const;

  const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  // Throws ValidationError if any key is not an entity type of `ts`.
  void validate(const TypeSystem& ts) const;

private:
  std::map<std::string, std::vector<std::string>> entries_;
};

std::string fold_case(std::string_view s);

} // namespace incat
