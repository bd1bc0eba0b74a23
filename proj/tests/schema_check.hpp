#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace testing {

// Validates the subset of JSON Schema used by the shipped report schemas:
// type, enum, required, properties, items, additionalProperties, allOf and
// file-relative $ref.
class SchemaChecker {
 public:
  explicit SchemaChecker(std::string dir) : dir_(std::move(dir)) {}

  std::vector<std::string> validate(const nlohmann::json& doc, const std::string& schema_file) const {
    std::vector<std::string> errors;
    check(doc, load(schema_file), "$", errors);
    return errors;
  }

 private:
  nlohmann::json load(const std::string& file) const {
    std::ifstream in(dir_ + "/" + file);
    if (!in) throw std::runtime_error("missing schema " + file);
    return nlohmann::json::parse(in);
  }

  static bool has_type(const nlohmann::json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    return false;
  }

  void check(const nlohmann::json& v, const nlohmann::json& s, const std::string& at,
             std::vector<std::string>& errors) const {
    if (s.contains("$ref")) check(v, load(s["$ref"].get<std::string>()), at, errors);
    if (s.contains("allOf")) {
      for (const auto& sub : s["allOf"]) check(v, sub, at, errors);
    }
    if (s.contains("type")) {
      bool ok = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
      } else {
        ok = has_type(v, s["type"].get<std::string>());
      }
      if (!ok) {
        errors.push_back(at + ": expected " + s["type"].dump() + ", got " + v.type_name());
        return;
      }
    }
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) errors.push_back(at + ": value " + v.dump() + " not in enum");
    }
    if (v.is_object()) {
      if (s.contains("required")) {
        for (const auto& k : s["required"]) {
          if (!v.contains(k.get<std::string>())) errors.push_back(at + ": missing '" + k.get<std::string>() + "'");
        }
      }
      for (const auto& [key, value] : v.items()) {
        if (s.contains("properties") && s["properties"].contains(key)) {
          check(value, s["properties"][key], at + "." + key, errors);
        } else if (s.contains("additionalProperties")) {
          const auto& extra = s["additionalProperties"];
          if (extra.is_boolean() && !extra.get<bool>()) {
            errors.push_back(at + ": unexpected '" + key + "'");
          } else if (extra.is_object()) {
            check(value, extra, at + "." + key, errors);
          }
        }
      }
    }
    if (v.is_array() && s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], at + "[" + std::to_string(i) + "]", errors);
    }
  }

  std::string dir_;
};

}  // namespace testing
