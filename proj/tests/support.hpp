#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "t2script/t2script.hpp"

namespace t2test {

using namespace t2script;

#ifndef T2S_SAMPLES_DIR
#define T2S_SAMPLES_DIR "samples"
#endif

inline std::filesystem::path samples_dir() { return T2S_SAMPLES_DIR; }
inline std::filesystem::path listing(const std::string& name) { return samples_dir() / "listings" / name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// An interpreter with captured output and errors.
struct Harness {
  std::unique_ptr<Interpreter> vm;
  std::string out;
  std::vector<std::string> errors;
  std::shared_ptr<ManualClock> clock;

  explicit Harness(Configuration cfg = {}, bool manual_clock = false) {
    if (manual_clock) {
      clock = std::make_shared<ManualClock>();
      cfg.clock = clock;
    }
    if (cfg.options.script_root == ".") cfg.options.script_root = samples_dir() / "listings";
    vm = configure(std::move(cfg));
    vm->set_output([this](std::string_view line) {
      out += line;
      out += '\n';
    });
    vm->set_error_sink([this](std::string_view msg) { errors.emplace_back(msg); });
    vm->define_host_event("on_load", EventType::multi);
  }

  Harness(Harness&&) = delete;

  Interpreter& operator*() { return *vm; }
  Interpreter* operator->() { return vm.get(); }

  std::string take() { return std::exchange(out, {}); }

  /// Loads a file, runs its top-level code, then triggers on_load.
  ExecOutcome run_file(const std::filesystem::path& path) {
    auto prog = vm->load_for_run(path);
    ExecOutcome o = vm->run_top_level(prog->instructions, vm->default_context(), {}, prog->module_name);
    if (!o.ok && o.is_error()) return o;
    return vm->trigger_event("on_load").outcome;
  }

  /// Wraps `body` in a private function, loads and calls it.
  std::pair<Value, ExecOutcome> run_body(const std::string& body, std::vector<Value> args = {}) {
    static std::atomic<int> counter{0};
    std::string name = "body_" + std::to_string(counter++);
    vm->load_source("#function " + name + " private()\n" + body + "\n#end " + name + "\n", name);
    return vm->call(name, std::move(args));
  }

  /// Output of one single command.
  std::string single(const std::string& cmd, const std::string& ctx = std::string(kDefaultContext)) {
    SubmitResult r = vm->submit(cmd, ctx);
    return r.outcome.ok ? r.output : "error: " + r.outcome.error.value_or("");
  }
};

/// Small deterministic generator helpers.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(v.size()) - 1))]; }

  std::string word(std::size_t lo = 1, std::size_t hi = 6) {
    static const std::string letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::string w;
    auto n = range(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi));
    for (std::int64_t i = 0; i < n; ++i) w += letters[static_cast<std::size_t>(range(0, 51))];
    return w;
  }
};

}  // namespace t2test
