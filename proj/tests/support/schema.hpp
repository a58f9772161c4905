// Copyright 2026 The Lanekeeper Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Just enough of JSON Schema for the shapes in schemas/: type, required,
// properties, additionalProperties, items, enum, and same-directory $ref.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "lanekeeper/json_io.hpp"

namespace schema {

using lanekeeper::Json;

inline Json load(const std::string& dir, const std::string& name) {
  std::ifstream in(dir + "/" + name);
  if (!in) throw std::runtime_error("cannot read schema " + name);
  return Json::parse(in);
}

inline bool type_matches(const Json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer")
    return value.is_number_integer() || value.is_number_unsigned();
  throw std::runtime_error("unknown schema type " + type);
}

inline void check(const Json& value, const Json& sch, const std::string& dir,
                  const std::string& where = "$") {
  if (sch.contains("$ref")) {
    check(value, load(dir, sch.at("$ref").get<std::string>()), dir, where);
    return;
  }
  if (sch.contains("enum")) {
    for (const auto& candidate : sch.at("enum"))
      if (candidate == value) return;
    throw std::runtime_error(where + ": value not in enum");
  }
  if (sch.contains("type")) {
    const Json& t = sch.at("type");
    bool ok = false;
    if (t.is_array()) {
      for (const auto& candidate : t)
        ok = ok || type_matches(value, candidate.get<std::string>());
    } else {
      ok = type_matches(value, t.get<std::string>());
    }
    if (!ok)
      throw std::runtime_error(where + ": type mismatch, got " +
                               std::string(value.type_name()));
  }
  if (value.is_object()) {
    if (sch.contains("required"))
      for (const auto& key : sch.at("required"))
        if (!value.contains(key.get<std::string>()))
          throw std::runtime_error(where + ": missing required key " +
                                   key.get<std::string>());
    const Json props =
        sch.contains("properties") ? sch.at("properties") : Json::object();
    for (const auto& [key, sub] : value.items()) {
      if (props.contains(key)) {
        check(sub, props.at(key), dir, where + "." + key);
      } else if (sch.contains("additionalProperties")) {
        const Json& extra = sch.at("additionalProperties");
        if (extra.is_boolean() && !extra.get<bool>())
          throw std::runtime_error(where + ": unexpected key " + key);
        if (extra.is_object()) check(sub, extra, dir, where + "." + key);
      }
    }
  }
  if (value.is_array() && sch.contains("items")) {
    std::size_t i = 0;
    for (const auto& element : value)
      check(element, sch.at("items"), dir,
            where + "[" + std::to_string(i++) + "]");
  }
}

inline void validate(const Json& value, const std::string& schema_name,
                     const std::string& dir) {
  check(value, load(dir, schema_name), dir);
}

}  // namespace schema
