// Copyright (c) 2026 The usbl_homing Authors
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

/**
 * @file config.hpp
 * @brief Flat `key = value` configuration documents.
 *
 * Blank lines and text after `#` are ignored. Keys are unique; lookups record
 * which keys were consumed so that unknown keys can be reported.
 */

#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace homing {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::istream& is);
  static KeyValueConfig Load(const std::string& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Keys present in the document that no getter has asked for.
  std::vector<std::string> unused_keys() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Serializes in key order.
  void write(std::ostream& os) const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace homing
