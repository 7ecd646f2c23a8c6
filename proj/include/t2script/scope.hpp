#pragma once

// Variable storage: globals, frames of locals, one-dimensional arrays.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "t2script/number.hpp"
#include "t2script/text.hpp"

namespace t2script {

/// Numeric keys iterate ascending, then text keys in insertion order.
class Array {
 public:
  const Value* get(std::string_view key) const {
    if (auto n = numeric_key(key)) {
      auto it = numeric_.find(*n);
      return it == numeric_.end() ? nullptr : &it->second;
    }
    auto it = text_index_.find(std::string(key));
    return it == text_index_.end() ? nullptr : &text_[it->second].second;
  }

  void set(std::string_view key, Value v) {
    if (auto n = numeric_key(key)) {
      numeric_[*n] = std::move(v);
      return;
    }
    std::string k(key);
    if (auto it = text_index_.find(k); it != text_index_.end()) {
      text_[it->second].second = std::move(v);
      return;
    }
    text_index_.emplace(k, text_.size());
    text_.emplace_back(std::move(k), std::move(v));
  }

  std::size_t size() const { return numeric_.size() + text_.size(); }
  bool empty() const { return size() == 0; }

  std::vector<std::pair<std::string, Value>> items() const {
    std::vector<std::pair<std::string, Value>> out;
    out.reserve(size());
    for (const auto& [k, v] : numeric_) out.emplace_back(std::to_string(k), v);
    for (const auto& kv : text_) out.push_back(kv);
    return out;
  }

 private:
  static std::optional<std::int64_t> numeric_key(std::string_view key) { return number::parse_int64(key); }

  std::map<std::int64_t, Value> numeric_;
  std::vector<std::pair<std::string, Value>> text_;
  std::unordered_map<std::string, std::size_t> text_index_;
};

/// Scalars and arrays live in separate namespaces.
struct VariableTable {
  std::unordered_map<std::string, Value> scalars;
  std::unordered_map<std::string, Array> arrays;

  bool empty() const { return scalars.empty() && arrays.empty(); }
};

struct Frame {
  std::string function_name;
  std::string module;
  VariableTable locals;
  Value result;
  bool args_bound = false;
  bool top_level = false;  // transient frame of a single command, runfile or timer firing
  std::string event;  // set while an event body runs
};

/// `@name` addresses the current frame, `name` the globals.
struct VarName {
  bool local = false;
  std::string_view name;
};

inline VarName split_var_name(std::string_view raw) {
  if (!raw.empty() && raw.front() == '@') return {true, raw.substr(1)};
  return {false, raw};
}

class Scope {
 public:
  VariableTable globals;
  std::deque<Frame> frames;
  /// Locals accumulated with `put`, keyed by function name.
  std::map<std::string, std::vector<std::pair<std::string, Value>>, std::less<>> pending_puts;

  Frame* current() { return frames.empty() ? nullptr : &frames.back(); }
  const Frame* current() const { return frames.empty() ? nullptr : &frames.back(); }

  /// Outside any frame, locals fall back to globals (host-side access only).
  VariableTable& table(bool local) {
    if (local && !frames.empty()) return frames.back().locals;
    return globals;
  }
  const VariableTable* find_table(bool local) const {
    if (local) return frames.empty() ? nullptr : &frames.back().locals;
    return &globals;
  }

  const Value* scalar(std::string_view raw) const {
    auto [local, name] = split_var_name(raw);
    const VariableTable* t = find_table(local);
    if (!t) return nullptr;
    auto it = t->scalars.find(std::string(name));
    return it == t->scalars.end() ? nullptr : &it->second;
  }

  const Array* array(std::string_view raw) const {
    auto [local, name] = split_var_name(raw);
    const VariableTable* t = find_table(local);
    if (!t) return nullptr;
    auto it = t->arrays.find(std::string(name));
    return it == t->arrays.end() ? nullptr : &it->second;
  }

  Array* array(std::string_view raw) { return const_cast<Array*>(std::as_const(*this).array(raw)); }

  const Value* element(std::string_view raw, std::string_view key) const {
    const Array* a = array(raw);
    return a ? a->get(key) : nullptr;
  }

  void set(std::string_view raw, Value v) {
    auto [local, name] = split_var_name(raw);
    table(local).scalars[std::string(name)] = std::move(v);
  }

  void set_element(std::string_view raw, std::string_view key, Value v) {
    auto [local, name] = split_var_name(raw);
    table(local).arrays[std::string(name)].set(key, std::move(v));
  }

  Array& make_array(std::string_view raw) {
    auto [local, name] = split_var_name(raw);
    return table(local).arrays[std::string(name)];
  }

  bool erase(std::string_view raw) {
    auto [local, name] = split_var_name(raw);
    return table(local).scalars.erase(std::string(name)) > 0;
  }

  bool erase_array(std::string_view raw) {
    auto [local, name] = split_var_name(raw);
    return table(local).arrays.erase(std::string(name)) > 0;
  }

  bool exists(std::string_view raw) const { return scalar(raw) || array(raw); }
};

}  // namespace t2script
