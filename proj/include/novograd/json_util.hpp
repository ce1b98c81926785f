#pragma once

// Fail-closed reading of JSON objects: every key must be consumed, otherwise
// the first unknown key is reported with its dotted path.

#include <set>
#include <type_traits>
#include <string>
#include <utility>

#include <json.hpp>

#include "novograd/error.hpp"

namespace novograd {

using json = nlohmann::json;

class StrictObject {
 public:
  StrictObject(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw Error("'" + display_path() + "' must be an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  /// Assigns `out` when the key is present; leaves the default otherwise.
  template <typename T>
  void get(const std::string& key, T& out) {
    if (!object_.contains(key)) return;
    used_.insert(key);
    const json& value = object_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!value.is_number_integer()) throw Error("key '" + key_path(key) + "': expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (value.is_number_integer() && !value.is_number_unsigned() && value.get<long long>() < 0)
          throw Error("key '" + key_path(key) + "': expected a non-negative integer");
      }
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) throw Error("key '" + key_path(key) + "': expected a number");
    }
    try {
      out = value.template get<T>();
    } catch (const json::exception& e) {
      throw Error("key '" + key_path(key) + "': " + type_hint<T>());
    }
  }

  template <typename T>
  T require(const std::string& key) {
    if (!object_.contains(key)) throw Error("missing key '" + key_path(key) + "'");
    T out{};
    get(key, out);
    return out;
  }

  /// Raw sub-document; marks the key as consumed.
  const json* child(const std::string& key) {
    if (!object_.contains(key)) return nullptr;
    used_.insert(key);
    return &object_.at(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : object_.items()) {
      if (!used_.contains(item.key())) throw Error("unknown key '" + key_path(item.key()) + "'");
    }
  }

 private:
  std::string display_path() const { return path_.empty() ? "<root>" : path_; }

  template <typename T>
  static std::string type_hint() {
    if constexpr (std::is_same_v<T, bool>) return "expected a boolean";
    else if constexpr (std::is_arithmetic_v<T>) return "expected a number";
    else if constexpr (std::is_same_v<T, std::string>) return "expected a string";
    else return "unexpected value type";
  }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace novograd
