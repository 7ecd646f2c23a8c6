#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/compiler.hpp"
#include "t2script/error.hpp"
#include "t2script/scope.hpp"

namespace t2script {

struct Timer {
  std::string name;
  std::int64_t interval_ms = 0;
  std::int64_t remaining = 0;
  std::shared_ptr<const Sequence> body;
  VariableTable captured;  // creator's locals at creation time
  std::string module;
  std::int64_t next_due = 0;
  std::uint64_t order = 0;  // creation order breaks ties
};

struct TimerInfo {
  std::string name;
  std::int64_t interval_ms;
  std::int64_t remaining;
};

/// Live timers; firing is driven by the interpreter.
class TimerTable {
 public:
  /// `name` "auto" yields `timer#N`, which scripts cannot spell.
  std::string add(std::string name, std::int64_t interval, std::int64_t iterations, std::shared_ptr<const Sequence> body,
                  VariableTable captured, std::string module, std::int64_t now) {
    if (name == "auto") name = "timer#" + std::to_string(++auto_counter_);
    if (find(name)) throw ScriptError(ErrorCode::DuplicateTimerName, name);
    if (iterations <= 0) return name;
    timers_.push_back(Timer{name, interval, iterations, std::move(body), std::move(captured), std::move(module),
                            now + interval, ++order_});
    return name;
  }

  void cancel(std::string_view name) {
    for (auto it = timers_.begin(); it != timers_.end(); ++it) {
      if (it->name == name) {
        timers_.erase(it);
        return;
      }
    }
    throw ScriptError(ErrorCode::UnknownTimer, name);
  }

  void remove_module(std::string_view module) {
    std::erase_if(timers_, [&](const Timer& t) { return t.module == module; });
  }

  Timer* find(std::string_view name) {
    for (auto& t : timers_) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  /// Earliest due timer (ties: creation order).
  const Timer* next() const {
    const Timer* best = nullptr;
    for (const auto& t : timers_) {
      if (!best || t.next_due < best->next_due || (t.next_due == best->next_due && t.order < best->order)) best = &t;
    }
    return best;
  }

  std::optional<std::int64_t> next_due() const {
    const Timer* t = next();
    return t ? std::optional(t->next_due) : std::nullopt;
  }

  /// Books one firing of `name`; fixed rate, backlogged slots are skipped.
  void fired(std::string_view name, std::int64_t now) {
    for (auto it = timers_.begin(); it != timers_.end(); ++it) {
      if (it->name != name) continue;
      if (--it->remaining <= 0) {
        timers_.erase(it);
        return;
      }
      it->next_due += it->interval_ms;
      if (it->next_due <= now) {
        std::int64_t behind = now - it->next_due;
        it->next_due += (behind / it->interval_ms + 1) * it->interval_ms;
      }
      return;
    }
  }

  std::vector<TimerInfo> list() const {
    std::vector<TimerInfo> out;
    for (const auto& t : timers_) out.push_back({t.name, t.interval_ms, t.remaining});
    return out;
  }

  bool empty() const { return timers_.empty(); }
  std::size_t size() const { return timers_.size(); }

 private:
  std::vector<Timer> timers_;
  std::uint64_t auto_counter_ = 0;
  std::uint64_t order_ = 0;
};

}  // namespace t2script
