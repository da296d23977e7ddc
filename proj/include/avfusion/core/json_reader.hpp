// include/avfusion/core/json_reader.hpp

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"

namespace avf {

using Json = nlohmann::json;

/// Strict reader over a JSON object: every key must be consumed, and type
/// errors name the full field path.
class JsonReader {
 public:
  JsonReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  void get(const std::string& key, T& dst) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    try {
      dst = obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(field(key), std::string("wrong type: ") + e.what());
    }
  }

  template <class T>
  T require(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError(field(key), "required field missing");
    T v{};
    get(key, v);
    return v;
  }

  const Json* child(const std::string& key) {
    if (!obj_.contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_.at(key);
  }

  /// Rejects any key that was not read.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace avf
