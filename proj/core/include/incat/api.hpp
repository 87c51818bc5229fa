#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "incat/store.hpp"

// JSON payloads shared by the HTTP service and the CLI. Each one loads from
// the store and makes a single library call.
namespace incat::api {

nlohmann::json themes(const Store& store);
// {"model": {...}|null, "profile": [{"cluster","mode","count"}...]}
nlohmann::json clusters(const Store& store);
nlohmann::json elbow(const Store& store);
nlohmann::json combos(const Store& store, std::size_t top = 0);
nlohmann::json readiness(const Store& store);
// Throws NotFoundError for a theme without readiness data. No quota means
// the whole ranking.
nlohmann::json targeting(const Store& store, const std::string& theme_id, std::optional<std::size_t> quota);

} // namespace incat::api
