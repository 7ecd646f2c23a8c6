#pragma once

#include <chrono>
#include <cstdint>

namespace t2script {

/// Millisecond time source for timers.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
};

class SteadyClock final : public Clock {
 public:
  std::int64_t now_ms() const override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
  }
};

/// Virtual time, moved only by the owner.
class ManualClock final : public Clock {
 public:
  std::int64_t now_ms() const override { return now_; }
  void set(std::int64_t t) { now_ = t; }
  void advance(std::int64_t ms) { now_ += ms; }

 private:
  std::int64_t now_ = 0;
};

}  // namespace t2script
