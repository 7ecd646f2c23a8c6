#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "t2script/error.hpp"
#include "t2script/text.hpp"

namespace t2script {

class CommandCall;

/// How parameters reach a handler: interpolated by the VM first, or raw.
enum class ExprMode { automatic, on_demand };

enum class BlockShape { none, one, two_required, two_optional };

struct Arity {
  std::size_t min = 0;
  std::optional<std::size_t> max = 0;  // nullopt: no limit
  bool tail = false;                   // last parameter keeps its spaces

  static Arity none() { return {0, 0, false}; }
  static Arity exactly(std::size_t n, bool tail = false) { return {n, n, tail}; }
  static Arity range(std::size_t lo, std::size_t hi, bool tail = false) { return {lo, hi, tail}; }
  static Arity at_least(std::size_t lo) { return {lo, std::nullopt, false}; }
};

using ConstantFunction = std::function<Value()>;
using ConstantBinding = std::variant<Value, ConstantFunction>;

/// Background information of a command execution: which commands and
/// constants are visible.
struct Context {
  std::string id;
  std::map<std::string, ConstantBinding, std::less<>> constants;
  /// Empty filter admits every command.
  std::function<bool(std::string_view command)> command_filter;

  bool admits(std::string_view command) const { return !command_filter || command_filter(command); }
};

inline constexpr std::string_view kDefaultContext = "default";

using CommandHandler = std::function<ExecOutcome(CommandCall&)>;

struct CommandSpec {
  std::string name;
  Arity arity;
  BlockShape blocks = BlockShape::none;
  std::string keyword;       // separation keyword of the second block
  bool inline_form = false;  // without `{`, the last parameter is one command
  ExprMode expr_mode = ExprMode::automatic;
  CommandHandler handler;
  /// Empty predicate: available in every context.
  std::function<bool(const Context&)> available;
};

/// Command names: nonempty, no space, `#`, `;`, backtick, `|` or `/`.
inline bool validate_command_name(std::string_view name) {
  return !name.empty() && name.find_first_of(" #;`|/") == std::string_view::npos;
}

/// Compiled invocations hold a slot plus the generation they were resolved
/// against; removing and re-adding a name starts a new generation.
struct CommandRef {
  std::size_t slot = 0;
  std::uint64_t generation = 0;
};

/// The runtime-mutable command set.
class Reservoir {
 public:
  struct Entry {
    CommandSpec spec;
    std::uint64_t generation = 0;
    bool enabled = true;
    bool removed = false;
  };

  void add(CommandSpec spec) {
    if (!validate_command_name(spec.name)) throw Error(ErrorCode::InvalidName, spec.name);
    spec.name = text::lowercase(spec.name);
    if (auto it = index_.find(spec.name); it != index_.end()) {
      Entry& e = entries_[it->second];
      if (!e.removed) throw Error(ErrorCode::DuplicateCommand, spec.name);
      e.spec = std::move(spec);
      e.generation = ++generation_counter_;
      e.enabled = true;
      e.removed = false;
      return;
    }
    index_.emplace(spec.name, entries_.size());
    entries_.push_back(Entry{std::move(spec), ++generation_counter_, true, false});
  }

  /// Unknown names are ignored.
  void remove(std::string_view name) {
    if (Entry* e = find_entry(name)) {
      e->removed = true;
      e->enabled = false;
    }
  }

  void disable(std::string_view name) { set_enabled(name, false); }
  void enable(std::string_view name) { set_enabled(name, true); }

  /// Resolution by case-folded name; disabled entries still resolve.
  std::optional<CommandRef> resolve(std::string_view name) const {
    auto it = index_.find(text::lowercase(name));
    if (it == index_.end() || entries_[it->second].removed) return std::nullopt;
    return CommandRef{it->second, entries_[it->second].generation};
  }

  const CommandSpec* spec(std::string_view name) const {
    auto ref = resolve(name);
    return ref ? &entries_[ref->slot].spec : nullptr;
  }

  const Entry& entry(CommandRef ref) const { return entries_.at(ref.slot); }

  /// The entry if `ref` still designates a live, enabled command.
  const Entry* live(CommandRef ref) const {
    if (ref.slot >= entries_.size()) return nullptr;
    const Entry& e = entries_[ref.slot];
    if (e.removed || !e.enabled || e.generation != ref.generation) return nullptr;
    return &e;
  }

  bool is_enabled(std::string_view name) const {
    auto ref = resolve(name);
    return ref && entries_[ref->slot].enabled;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const Entry& e : entries_) {
      if (!e.removed) out.push_back(e.spec.name);
    }
    return out;
  }

 private:
  Entry* find_entry(std::string_view name) {
    auto it = index_.find(text::lowercase(name));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  void set_enabled(std::string_view name, bool on) {
    if (Entry* e = find_entry(name); e && !e->removed) e->enabled = on;
  }

  std::deque<Entry> entries_;  // stable addresses while handlers run
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t generation_counter_ = 0;
};

}  // namespace t2script
