#include "incat/typesystem.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "incat/defaults.hpp"
#include "incat/error.hpp"

namespace incat {

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what(), e.byte);
  }
}

std::string opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->get<std::string>();
}

} // namespace

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

TypeSystem::TypeSystem(std::vector<EntityType> entities, std::vector<RelationType> relations)
    : entities_(std::move(entities)), relations_(std::move(relations)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& e = entities_[i];
    if (e.name.empty()) throw ValidationError("type system: entity with empty name");
    if (!entity_index_.emplace(e.name, i).second)
      throw ValidationError("type system: duplicate entity type '" + e.name + "'");
  }
  for (const auto& e : entities_) {
    if (e.parent && !entity_index_.count(*e.parent))
      throw ValidationError("type system: entity '" + e.name + "' has unknown parent '" + *e.parent + "'");
  }

  // Walk each parent chain; reaching a node already on the current chain is a cycle.
  std::vector<int> state(entities_.size(), 0);  // 0 unseen, 1 on chain, 2 done
  for (std::size_t start = 0; start < entities_.size(); ++start) {
    std::vector<std::size_t> chain;
    std::size_t cur = start;
    while (state[cur] != 2) {
      if (state[cur] == 1) {
        std::string names;
        for (auto it = std::find(chain.begin(), chain.end(), cur); it != chain.end(); ++it)
          names += entities_[*it].name + " -> ";
        throw ValidationError("type system: parent cycle " + names + entities_[cur].name);
      }
      state[cur] = 1;
      chain.push_back(cur);
      const auto& parent = entities_[cur].parent;
      if (!parent) break;
      cur = entity_index_.at(*parent);
    }
    for (auto c : chain) state[c] = 2;
  }

  for (std::size_t i = 0; i < relations_.size(); ++i) {
    const auto& r = relations_[i];
    if (r.name.empty()) throw ValidationError("type system: relation with empty name");
    if (!relation_index_.emplace(r.name, i).second)
      throw ValidationError("type system: duplicate relation '" + r.name + "'");
    if (!entity_index_.count(r.domain))
      throw ValidationError("type system: relation '" + r.name + "' references unknown domain type '" + r.domain + "'");
    if (!entity_index_.count(r.range))
      throw ValidationError("type system: relation '" + r.name + "' references unknown range type '" + r.range + "'");
  }
}

TypeSystem TypeSystem::from_json(const json& j) {
  std::vector<EntityType> entities;
  std::vector<RelationType> relations;
  try {
    for (const auto& e : j.at("entities")) {
      EntityType t{e.at("name").get<std::string>(), std::nullopt, opt_string(e, "desc")};
      if (auto p = opt_string(e, "parent"); !p.empty()) t.parent = p;
      entities.push_back(std::move(t));
    }
    if (auto rel = j.find("relations"); rel != j.end()) {
      for (const auto& r : *rel) {
        relations.push_back({r.at("name").get<std::string>(), r.at("domain").get<std::string>(),
                             r.at("range").get<std::string>(), opt_string(r, "desc")});
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("type system: ") + e.what());
  }
  return TypeSystem(std::move(entities), std::move(relations));
}

TypeSystem TypeSystem::load(const std::string& path) { return from_json(read_json_file(path)); }

const TypeSystem& TypeSystem::defaults() {
  static const TypeSystem ts = from_json(json::parse(defaults::typesystem_json()));
  return ts;
}

json TypeSystem::to_json() const {
  json entities = json::array();
  for (const auto& e : entities_) {
    entities.push_back({{"name", e.name}, {"parent", e.parent ? json(*e.parent) : json(nullptr)}, {"desc", e.description}});
  }
  json relations = json::array();
  for (const auto& r : relations_)
    relations.push_back({{"name", r.name}, {"domain", r.domain}, {"range", r.range}, {"desc", r.description}});
  return json{{"entities", std::move(entities)}, {"relations", std::move(relations)}};
}

bool TypeSystem::has_entity(std::string_view name) const { return entity_index_.count(std::string(name)) > 0; }
bool TypeSystem::has_relation(std::string_view name) const { return relation_index_.count(std::string(name)) > 0; }

const EntityType& TypeSystem::entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) throw NotFoundError("unknown entity type '" + std::string(name) + "'");
  return entities_[it->second];
}

const RelationType& TypeSystem::relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) throw NotFoundError("unknown relation '" + std::string(name) + "'");
  return relations_[it->second];
}

bool TypeSystem::is_subtype(std::string_view child, std::string_view ancestor) const {
  entity(ancestor);
  const EntityType* cur = &entity(child);
  while (true) {
    if (cur->name == ancestor) return true;
    if (!cur->parent) return false;
    cur = &entity(*cur->parent);
  }
}

bool TypeSystem::validate_relation(std::string_view relation_name, std::string_view subject_type,
                                   std::string_view object_type) const {
  const auto& r = relation(relation_name);
  return is_subtype(subject_type, r.domain) && is_subtype(object_type, r.range);
}

Dictionary::Dictionary(std::map<std::string, std::vector<std::string>> entries, const TypeSystem& ts)
    : entries_(std::move(entries)) {
  validate(ts);
  for (const auto& [type, forms] : entries_) {
    std::set<std::string> folded;
    for (const auto& f : forms) {
      if (f.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ValidationError("dictionary: empty surface form under '" + type + "'");
      if (!folded.insert(fold_case(f)).second)
        throw ValidationError("dictionary: duplicate surface form '" + f + "' under '" + type + "'");
    }
  }
}

void Dictionary::validate(const TypeSystem& ts) const {
  for (const auto& [type, forms] : entries_) {
    if (!ts.has_entity(type)) throw ValidationError("dictionary: unknown entity type '" + type + "'");
  }
}

Dictionary Dictionary::from_json(const json& j, const TypeSystem& ts) {
  if (!j.is_object()) throw ValidationError("dictionary: expected an object of type -> forms");
  std::map<std::string, std::vector<std::string>> entries;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) entries[it.key()] = it.value().get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("dictionary: ") + e.what());
  }
  return Dictionary(std::move(entries), ts);
}

Dictionary Dictionary::load(const std::string& path, const TypeSystem& ts) { return from_json(read_json_file(path), ts); }

Dictionary Dictionary::defaults() { return from_json(json::parse(defaults::dictionary_json()), TypeSystem::defaults()); }

json Dictionary::to_json() const { return json(entries_); }

} // namespace incat
