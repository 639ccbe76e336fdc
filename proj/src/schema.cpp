#include "mentor/schema.hpp"

#include <algorithm>

namespace mentor {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

void check(const json& v, const json& schema, const std::string& at, std::vector<std::string>& out) {
    if (!schema.is_object()) return;

    if (auto it = schema.find("type"); it != schema.end()) {
        bool ok = false;
        if (it->is_string()) {
            ok = has_type(v, it->get<std::string>());
        } else if (it->is_array()) {
            ok = std::any_of(it->begin(), it->end(), [&](const json& t) { return has_type(v, t.get<std::string>()); });
        }
        if (!ok) {
            out.push_back(at + ": expected type " + it->dump() + ", got " + v.type_name());
            return;
        }
    }

    if (auto it = schema.find("enum"); it != schema.end()) {
        if (std::find(it->begin(), it->end(), v) == it->end()) {
            out.push_back(at + ": value " + v.dump() + " not in " + it->dump());
        }
    }

    if (v.is_number()) {
        const double x = v.get<double>();
        if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) {
            out.push_back(at + ": " + v.dump() + " below minimum " + it->dump());
        }
        if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>()) {
            out.push_back(at + ": " + v.dump() + " above maximum " + it->dump());
        }
    }

    if (v.is_string()) {
        if (auto it = schema.find("minLength"); it != schema.end() &&
                                                v.get_ref<const std::string&>().size() < it->get<std::size_t>()) {
            out.push_back(at + ": string shorter than " + it->dump());
        }
    }

    if (v.is_array()) {
        if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>()) {
            out.push_back(at + ": fewer than " + it->dump() + " items");
        }
        if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>()) {
            out.push_back(at + ": more than " + it->dump() + " items");
        }
        if (auto it = schema.find("items"); it != schema.end()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                check(v[i], *it, at + "[" + std::to_string(i) + "]", out);
            }
        }
    }

    if (v.is_object()) {
        if (auto it = schema.find("required"); it != schema.end()) {
            for (const auto& key : *it) {
                if (!v.contains(key.get<std::string>())) {
                    out.push_back(at + ": missing required field '" + key.get<std::string>() + "'");
                }
            }
        }
        const json* props = nullptr;
        if (auto it = schema.find("properties"); it != schema.end()) props = &*it;
        const json* extra = nullptr;
        if (auto it = schema.find("additionalProperties"); it != schema.end() && it->is_object()) extra = &*it;
        for (const auto& [key, member] : v.items()) {
            if (props != nullptr && props->contains(key)) {
                check(member, (*props)[key], at + "." + key, out);
            } else if (extra != nullptr) {
                check(member, *extra, at + "." + key, out);
            }
        }
    }
}

}  // namespace

std::vector<std::string> schema_violations(const nlohmann::json& value, const nlohmann::json& schema) {
    std::vector<std::string> out;
    check(value, schema, "$", out);
    return out;
}

}  // namespace mentor
