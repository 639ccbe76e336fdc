#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mentor {

// Validates `value` against a small structural subset of JSON Schema:
// type (string or list), properties, required, additionalProperties (schema
// applied to every non-listed member), items, enum, minimum, maximum,
// minItems, maxItems, minLength. Unknown keywords are ignored.
//
// Returns one message per violation, each prefixed with a JSON-pointer-like
// location ("$.skills[2].name"). Empty means valid.
std::vector<std::string> schema_violations(const nlohmann::json& value, const nlohmann::json& schema);

}  // namespace mentor
