#pragma once

// Host-facing setup and a VM thread that owns one interpreter.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "t2script/builtins.hpp"
#include "t2script/interpreter.hpp"

namespace t2script {

struct Configuration {
  std::vector<CommandSpec> commands;
  std::vector<std::pair<std::string, ConstantBinding>> constants;
  std::vector<Context> contexts;
  Options options;
  std::vector<std::string> disabled;
  std::shared_ptr<Clock> clock;
};

/// Built-ins first, so host commands cannot take their names.
inline std::unique_ptr<Interpreter> configure(Configuration cfg) {
  auto vm = std::make_unique<Interpreter>(std::move(cfg.options), std::move(cfg.clock));
  register_builtins(*vm);
  for (auto& c : cfg.commands) vm->add_command(std::move(c));
  for (auto& [name, binding] : cfg.constants) vm->add_constant(name, std::move(binding));
  for (auto& ctx : cfg.contexts) vm->add_context(std::move(ctx));
  for (const auto& name : cfg.disabled) vm->disable_command(name);
  return vm;
}

/// Runs the interpreter on its own thread. Every call is queued; timers
/// fire on the wall clock between tasks.
class Runner {
 public:
  explicit Runner(std::unique_ptr<Interpreter> vm) : vm_(std::move(vm)), thread_([this] { loop(); }) {}

  ~Runner() { stop(); }

  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  template <class F>
  auto post(F&& fn) -> std::future<decltype(fn(std::declval<Interpreter&>()))> {
    using R = decltype(fn(std::declval<Interpreter&>()));
    auto task = std::make_shared<std::packaged_task<R(Interpreter&)>>(std::forward<F>(fn));
    auto fut = task->get_future();
    {
      std::lock_guard lk(mutex_);
      tasks_.emplace_back([task](Interpreter& vm) { (*task)(vm); });
    }
    cv_.notify_all();
    return fut;
  }

  std::future<SubmitResult> submit_single(std::string command, std::string context = std::string(kDefaultContext)) {
    return post([command = std::move(command), context = std::move(context)](Interpreter& vm) {
      return vm.submit(command, context);
    });
  }

  std::future<EventResult> trigger(std::string event, std::vector<Value> args = {}) {
    return post([event = std::move(event), args = std::move(args)](Interpreter& vm) mutable {
      return vm.trigger_event(event, std::move(args));
    });
  }

  /// Blocks until no timer is left or `limit` passes. True if idle.
  bool wait_for_timers(std::chrono::milliseconds limit) {
    auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      if (!post([](Interpreter& vm) { return vm.has_timers(); }).get()) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    return !post([](Interpreter& vm) { return vm.has_timers(); }).get();
  }

  void stop() {
    {
      std::lock_guard lk(mutex_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void loop() {
    std::unique_lock lk(mutex_);
    while (true) {
      if (!tasks_.empty()) {
        auto task = std::move(tasks_.front());
        tasks_.pop_front();
        lk.unlock();
        task(*vm_);
        vm_->run_due_timers();
        lk.lock();
        continue;
      }
      if (stopping_) return;
      lk.unlock();
      vm_->run_due_timers();
      auto due = vm_->next_timer_due();
      lk.lock();
      if (!tasks_.empty() || stopping_) continue;
      if (due) {
        auto wait = std::chrono::milliseconds(std::max<std::int64_t>(0, *due - vm_->clock().now_ms()));
        cv_.wait_for(lk, wait);
      } else {
        cv_.wait(lk);
      }
    }
  }

  std::unique_ptr<Interpreter> vm_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void(Interpreter&)>> tasks_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace t2script
