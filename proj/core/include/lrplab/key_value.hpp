// Copyright 2026 The lrplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lrplab {

// Flat `key = value` configuration. Lines starting with '#' and text after
// an unquoted " #" are comments. Later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  // Parses "key=value"; throws ConfigError if there is no '='.
  void apply_override(std::string_view assignment);
  void merge(const KeyValueConfig& other);
  void erase(std::string_view key);

  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, std::string_view fallback) const;
  int get_int(std::string_view key, int fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  // Comma-separated lists.
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
  std::vector<int> get_ints(std::string_view key, std::vector<int> fallback) const;
  std::vector<std::string> get_strings(std::string_view key,
                                       std::vector<std::string> fallback) const;

  const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return entries_;
  }
  // Keys that were set but never read.
  std::vector<std::string> unused_keys() const;

  // Sorted `key = value` lines.
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
  mutable std::set<std::string, std::less<>> read_;
};

}  // namespace lrplab
