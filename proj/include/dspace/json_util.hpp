#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "dspace/space.hpp"

namespace dspace {

// JSON <-> Value conversions used by the store format, the CLI, and the YAML
// loader. Objects are std::map-backed, so every dump has sorted keys.
nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

nlohmann::json assignments_to_json(const std::map<std::string, Value>& assignments);
std::map<std::string, Value> assignments_from_json(const nlohmann::json& j);

}  // namespace dspace
