#pragma once

#include <string_view>

// Shipped defaults, compiled in from core/data/*.json.
namespace incat::defaults {

std::string_view typesystem_json();
std::string_view dictionary_json();
std::string_view tagmap_json();
std::string_view item_bank_json();

} // namespace incat::defaults
