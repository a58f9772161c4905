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

// Flat key/value text files: one "key = value" per line, '#' comments.
// Every module config (model geometry, corridor, camera, controller) uses
// this one format.

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lanekeeper/errors.hpp"

namespace lanekeeper {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidConfig("line " + std::to_string(line_no) +
                          ": expected 'key = value'");
    std::string key{detail::trim(line.substr(0, eq))};
    std::string value{detail::trim(line.substr(eq + 1))};
    if (key.empty())
      throw InvalidConfig("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw InvalidConfig("duplicate key '" + key + "'");
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

inline std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

/// Typed accessor over a KeyValues map that tracks which keys were read,
/// so callers can reject unknown keys after consuming their own.
class KvReader {
 public:
  explicit KvReader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, std::string fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    seen_.insert(key);
    return it->second;
  }

  long long get_int(const std::string& key, long long fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    seen_.insert(key);
    return parse_int(it->second, key);
  }

  double get_double(const std::string& key, double fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    seen_.insert(key);
    return parse_double(it->second, key);
  }

  bool get_bool(const std::string& key, bool fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    seen_.insert(key);
    const std::string& v = it->second;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidConfig("key '" + key + "': expected true/false, got '" + v +
                        "'");
  }

  std::vector<int> get_int_list(const std::string& key,
                                std::vector<int> fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    seen_.insert(key);
    std::vector<int> out;
    std::string_view rest = it->second;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto item = detail::trim(rest.substr(0, comma));
      if (item.empty())
        throw InvalidConfig("key '" + key + "': empty list element");
      out.push_back(static_cast<int>(parse_int(item, key)));
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
    }
    return out;
  }

  /// Throws if the map holds keys nobody consumed.
  void reject_unknown() const {
    for (const auto& [k, v] : kv_) {
      (void)v;
      if (!seen_.count(k)) throw InvalidConfig("unknown key '" + k + "'");
    }
  }

  static long long parse_int(std::string_view v, const std::string& key) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw InvalidConfig("key '" + key + "': expected integer, got '" +
                          std::string(v) + "'");
    return out;
  }

  static double parse_double(std::string_view v, const std::string& key) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw InvalidConfig("key '" + key + "': expected number, got '" +
                          std::string(v) + "'");
    return out;
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> seen_;
};

}  // namespace lanekeeper
