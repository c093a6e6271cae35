#pragma once
// Validator for the subset of JSON Schema used by the shipped schema files:
// type, const, enum, required, properties, additionalProperties: false, items.

#include <string>

#include "json.hpp"

namespace schema {

using json = nlohmann::json;

inline bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
}

// empty string if valid, else the first violation with its path
inline std::string validate(const json& v, const json& s, const std::string& path = "$") {
    if (s.contains("type")) {
        bool ok = false;
        if (s["type"].is_string()) ok = has_type(v, s["type"]);
        else
            for (const auto& t : s["type"]) ok = ok || has_type(v, t);
        if (!ok) return path + ": expected type " + s["type"].dump();
    }
    if (s.contains("const") && v != s["const"]) return path + ": expected " + s["const"].dump();
    if (s.contains("enum")) {
        bool ok = false;
        for (const auto& e : s["enum"]) ok = ok || v == e;
        if (!ok) return path + ": not in " + s["enum"].dump();
    }
    if (v.is_object()) {
        if (s.contains("required"))
            for (const auto& k : s["required"])
                if (!v.contains(k.get<std::string>())) return path + ": missing " + k.get<std::string>();
        if (s.contains("properties"))
            for (const auto& [k, sub] : s["properties"].items())
                if (v.contains(k)) {
                    std::string r = validate(v[k], sub, path + "." + k);
                    if (!r.empty()) return r;
                }
        if (s.contains("additionalProperties") && s["additionalProperties"] == false)
            for (const auto& [k, _] : v.items())
                if (!s.contains("properties") || !s["properties"].contains(k)) return path + ": unexpected key " + k;
    }
    if (v.is_array() && s.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::string r = validate(v[i], s["items"], path + "[" + std::to_string(i) + "]");
            if (!r.empty()) return r;
        }
    return "";
}

}  // namespace schema
