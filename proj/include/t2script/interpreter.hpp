#pragma once

// The virtual machine: command reservoir, contexts, constants, scopes,
// functions, events, timers and modules.

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "t2script/clock.hpp"
#include "t2script/compiler.hpp"
#include "t2script/error.hpp"
#include "t2script/expr.hpp"
#include "t2script/number.hpp"
#include "t2script/operators.hpp"
#include "t2script/reader.hpp"
#include "t2script/reservoir.hpp"
#include "t2script/scope.hpp"
#include "t2script/text.hpp"
#include "t2script/timers.hpp"

namespace t2script {

class Interpreter;

using OutputSink = std::function<void(std::string_view line)>;
using ErrorSink = std::function<void(std::string_view message)>;

enum class StepDecision { proceed, stop };

/// What the debugger sees before each command runs.
struct DebugEvent {
  std::string_view command;
  const std::vector<std::string>& raw_params;
  const SourceSpan& span;
  std::size_t depth;  // number of frames
};

using DebugHook = std::function<StepDecision(const DebugEvent&, Interpreter&)>;

struct Options {
  bool events_enabled = true;
  std::filesystem::path script_root = ".";
  std::uint64_t seed = 0x7f4a7c15;
  std::vector<std::string> envrs_allow;  // empty: any interpreter
  std::chrono::milliseconds envrs_timeout{30000};
  std::string time_format = "%H:%M:%S";
  std::string date_format = "%Y-%m-%d";
  std::size_t max_call_depth = 200;
};

struct SubmitResult {
  ExecOutcome outcome;
  std::string output;  // textout lines, each ending in '\n'
  bool compile_error = false;
};

struct EventResult {
  ExecOutcome outcome;
  std::vector<Value> results;
};

/// Debugger watch surface.
struct Watch {
  VariableTable globals;
  std::optional<VariableTable> locals;
  std::string function;
  std::vector<std::string> functions;
  std::vector<TimerInfo> timers;
};

/// A running command as seen by its handler.
class CommandCall {
 public:
  CommandCall(Interpreter& vm, const CommandInvocation& inv, std::vector<std::string> params)
      : vm_(vm), inv_(inv), params_(std::move(params)) {}

  const std::string& name() const { return inv_.name; }
  /// Interpolated (automatic mode) or raw (on-demand mode) parameters.
  const std::vector<std::string>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }
  const std::string& param(std::size_t i) const { return params_.at(i); }
  bool has_param(std::size_t i) const { return i < params_.size(); }
  const std::vector<std::string>& raw_params() const { return inv_.raw_params; }
  std::size_t block_count() const { return inv_.blocks.size(); }
  const Sequence& block(std::size_t i) const { return inv_.blocks.at(i); }
  const CommandInvocation& invocation() const { return inv_; }

  inline ExecOutcome run_block(std::size_t i);
  /// Evaluates expressions in `raw`; throws ScriptError.
  inline Value interpolate(std::string_view raw);
  inline const Context& context() const;
  inline Scope& scope();
  inline void output(std::string_view line);
  Interpreter& vm() { return vm_; }

 private:
  Interpreter& vm_;
  const CommandInvocation& inv_;
  std::vector<std::string> params_;
};

class Interpreter : private EvalHost {
 public:
  explicit Interpreter(Options options = {}, std::shared_ptr<Clock> clock = nullptr)
      : options_(std::move(options)),
        clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()),
        rng_(options_.seed),
        evaluator_(*this) {
    contexts_.emplace(std::string(kDefaultContext), Context{std::string(kDefaultContext), {}, {}});
    context_ = &contexts_.at(std::string(kDefaultContext));
    out_ = [](std::string_view line) { std::cout << line << '\n'; };
    err_ = [](std::string_view msg) { std::cerr << "error: " << msg << '\n'; };
  }

  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  // ---- configuration -------------------------------------------------

  Options& options() { return options_; }
  const Options& options() const { return options_; }
  Reservoir& reservoir() { return reservoir_; }
  const Reservoir& reservoir() const { return reservoir_; }

  void add_command(CommandSpec spec) { reservoir_.add(std::move(spec)); }
  void disable_command(std::string_view name) { reservoir_.disable(name); }
  void enable_command(std::string_view name) { reservoir_.enable(name); }
  void remove_command(std::string_view name) { reservoir_.remove(name); }

  /// Host constants may not shadow built-in ones.
  void add_constant(std::string name, ConstantBinding binding) {
    if (builtin_constant(name) || constants_.count(name)) throw Error(ErrorCode::DuplicateConstant, name);
    constants_.emplace(std::move(name), std::move(binding));
  }

  /// Adds or replaces a context (map nodes are stable, so a context that
  /// is currently active stays valid).
  void add_context(Context ctx) {
    std::string id = ctx.id;
    contexts_.insert_or_assign(std::move(id), std::move(ctx));
  }

  const Context& context(std::string_view id) const {
    auto it = contexts_.find(id);
    if (it == contexts_.end()) throw Error(ErrorCode::UnknownContext, std::string(id));
    return it->second;
  }

  const Context& current_context() const { return *context_; }

  void set_output(OutputSink sink) { out_ = std::move(sink); }
  void set_error_sink(ErrorSink sink) { err_ = std::move(sink); }
  void output(std::string_view line) { out_(line); }
  void report_error(std::string_view message) {
    ++reported_errors_;
    err_(message);
  }
  std::size_t reported_errors() const { return reported_errors_; }

  Scope& scope() { return scope_; }
  const Scope& scope() const { return scope_; }
  Clock& clock() { return *clock_; }

  // ---- single commands -----------------------------------------------

  /// Compiles and runs one command. Function returns and special codes
  /// that reach this level end the command silently.
  ExecOutcome execute(std::string_view command, std::string_view context_id = kDefaultContext) {
    return submit_to_sink(command, context_id).outcome;
  }

  /// As execute, but textout output is captured instead of sent to the sink.
  SubmitResult submit(std::string_view command, std::string_view context_id = kDefaultContext) {
    std::string captured;
    OutputSink saved = std::exchange(out_, [&captured](std::string_view line) {
      captured += line;
      captured += '\n';
    });
    SubmitResult r;
    try {
      r = submit_to_sink(command, context_id);
    } catch (...) {
      out_ = std::move(saved);
      throw;
    }
    out_ = std::move(saved);
    r.output = std::move(captured);
    return r;
  }

  // ---- modules -------------------------------------------------------

  /// Reads, compiles and links a script file. The module name defaults to
  /// the file stem.
  void load_module(const std::filesystem::path& path, std::optional<std::string> name = std::nullopt) {
    auto resolved = resolve_path(path);
    std::string module = name ? *name : resolved.stem().string();
    std::string source = read_file(resolved);
    load_source(source, module, resolved.string());
  }

  void load_source(std::string_view source, const std::string& module, const std::string& file = "<source>") {
    Program prog = compile_file_text(source, module, file);
    link(std::move(prog), file);
  }

  void unload_module(std::string_view name) {
    auto it = modules_.find(name);
    if (it == modules_.end()) throw Error(ErrorCode::UnknownModule, std::string(name));
    for (const auto& f : it->second.functions) remove_function(f);
    for (const auto& e : it->second.events) events_.erase(e);
    timers_.remove_module(name);
    modules_.erase(it);
  }

  bool has_module(std::string_view name) const { return modules_.count(std::string(name)) > 0; }

  std::vector<std::string> module_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : modules_) out.push_back(k);
    return out;
  }

  // ---- functions and events ------------------------------------------

  bool has_function(std::string_view name) override {
    std::string n(name);
    return functions_.count(n) || (events_.count(n) && !events_.at(n).host);
  }

  std::vector<std::string> function_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : functions_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Host-side call; `args` become @arg[0..].
  std::pair<Value, ExecOutcome> call(std::string_view name, std::vector<Value> args) {
    ContextGuard guard(*this, &default_context());
    return invoke_named(name, std::move(args));
  }

  /// Host events can only be triggered by the host.
  void define_host_event(const std::string& name, EventType type) {
    if (events_.count(name) || functions_.count(name)) throw Error(ErrorCode::DuplicateEvent, name);
    events_.emplace(name, EventEntry{nullptr, type, {}, true, {}});
  }

  /// Triggers an event from the host side.
  EventResult trigger_event(const std::string& name, std::vector<Value> args = {}) {
    auto it = events_.find(name);
    if (it == events_.end()) {
      return {ExecOutcome::failure(ErrorCode::UnknownFunction, "no event '" + name + "'"), {}};
    }
    ContextGuard guard(*this, &default_context());
    if (!it->second.host) {
      auto [value, outcome] = invoke_named(name, std::move(args));
      return {normalize(outcome), {value}};
    }
    VariableTable locals;
    Array& arg = locals.arrays["arg"];
    for (std::size_t i = 0; i < args.size(); ++i) arg.set(std::to_string(i), args[i]);
    EventResult r;
    r.outcome = dispatch(name, locals, r.results);
    r.outcome = normalize(r.outcome);
    return r;
  }

  std::vector<std::string> registrants(const std::string& event) const {
    auto it = events_.find(event);
    return it == events_.end() ? std::vector<std::string>{} : it->second.registrants;
  }

  bool has_event(const std::string& name) const { return events_.count(name) > 0; }

  /// Removes a script-defined function.
  void delete_function(std::string_view name) {
    if (!functions_.count(std::string(name))) throw ScriptError(ErrorCode::UnknownFunction, name);
    remove_function(std::string(name));
    for (auto& [k, m] : modules_) std::erase(m.functions, std::string(name));
  }

  // ---- timers --------------------------------------------------------

  std::string create_timer(std::string name, std::int64_t interval, std::int64_t iterations,
                           const Sequence& body) {
    if (interval <= 0) throw ScriptError(ErrorCode::ValueOutOfRange, "timer interval must be positive");
    if (iterations < 0) throw ScriptError(ErrorCode::ValueOutOfRange, "timer iterations must not be negative");
    const Frame* f = scope_.current();
    VariableTable captured = f ? f->locals : VariableTable{};
    std::string module = f ? f->module : std::string();
    return timers_.add(std::move(name), interval, iterations, std::make_shared<const Sequence>(body),
                       std::move(captured), std::move(module), clock_->now_ms());
  }

  void cancel_timer(std::string_view name) { timers_.cancel(name); }
  std::vector<TimerInfo> timer_list() const { return timers_.list(); }
  bool has_timers() const { return !timers_.empty(); }
  std::optional<std::int64_t> next_timer_due() const { return timers_.next_due(); }

  /// Fires every timer due at the current clock reading. Returns the number
  /// of firings.
  std::size_t run_due_timers() {
    std::size_t fired = 0;
    std::int64_t now = clock_->now_ms();
    while (const Timer* t = timers_.next()) {
      if (t->next_due > now) break;
      fire(*t, now);
      ++fired;
    }
    return fired;
  }

  /// Virtual time only: steps the ManualClock through every due firing.
  std::size_t advance_time(std::int64_t ms) {
    auto* manual = dynamic_cast<ManualClock*>(clock_.get());
    if (!manual) throw Error(ErrorCode::ValueOutOfRange, "advance_time needs a ManualClock");
    std::int64_t target = manual->now_ms() + ms;
    std::size_t fired = 0;
    while (const Timer* t = timers_.next()) {
      if (t->next_due > target) break;
      if (t->next_due > manual->now_ms()) manual->set(t->next_due);
      fire(*t, manual->now_ms());
      ++fired;
    }
    manual->set(target);
    return fired;
  }

  // ---- debugging -----------------------------------------------------

  void attach_debugger(DebugHook hook) {
    std::lock_guard lk(hook_mutex_);
    hook_ = std::make_shared<DebugHook>(std::move(hook));
  }

  void detach_debugger() {
    {
      std::lock_guard lk(hook_mutex_);
      hook_.reset();
    }
    release();
  }

  /// Resumes a VM parked by a `stop` decision.
  void release() {
    std::lock_guard lk(park_mutex_);
    parked_ = false;
    park_cv_.notify_all();
  }

  bool wait_parked(std::chrono::milliseconds timeout) {
    std::unique_lock lk(park_mutex_);
    return park_cv_.wait_for(lk, timeout, [&] { return parked_; });
  }

  bool parked() const {
    std::lock_guard lk(park_mutex_);
    return parked_;
  }

  /// Snapshot for debuggers; call from the hook or while parked.
  Watch watch() const {
    Watch w;
    w.globals = scope_.globals;
    if (const Frame* f = scope_.current()) {
      w.locals = f->locals;
      w.function = f->function_name;
    }
    for (const auto& [k, v] : functions_) w.functions.push_back(k);
    std::sort(w.functions.begin(), w.functions.end());
    w.timers = timers_.list();
    return w;
  }

  // ---- command implementation surface ----------------------------------

  ExecOutcome run_sequence(const Sequence& seq) {
    for (const auto& inv : seq) {
      ExecOutcome o = execute_invocation(inv);
      if (!o.ok) return o;
    }
    return ExecOutcome::success();
  }

  ExecOutcome execute_invocation(const CommandInvocation& inv) {
    const Reservoir::Entry* entry = reservoir_.live(inv.command);
    if (!entry || !context_->admits(inv.name) || (entry->spec.available && !entry->spec.available(*context_))) {
      return ExecOutcome::failure(ErrorCode::DisabledCommand, inv.name);
    }
    // the handler is copied: it may remove or replace its own entry
    CommandHandler handler = entry->spec.handler;
    bool automatic = entry->spec.expr_mode == ExprMode::automatic;
    active_.push_back(&inv);
    struct Pop {
      std::vector<const CommandInvocation*>& v;
      ~Pop() { v.pop_back(); }
    } pop{active_};

    debug_step(inv);
    try {
      std::vector<std::string> params;
      params.reserve(inv.raw_params.size());
      for (const auto& raw : inv.raw_params) params.push_back(automatic ? interpolate(raw) : raw);
      CommandCall call(*this, inv, std::move(params));
      if (!handler) return ExecOutcome::success();
      return handler(call);
    } catch (const ScriptError& e) {
      return ExecOutcome::failure(e.text());
    } catch (const CompileError& e) {
      return ExecOutcome::failure(compile_error_text(e));
    } catch (const std::exception& e) {
      return ExecOutcome::failure(e.what());
    }
  }

  Value interpolate(std::string_view raw) {
    if (raw.find('$') == std::string_view::npos) return Value(raw);
    return evaluator_.evaluate(*parsed(raw));
  }

  /// Compiles `command_text` as generated code and runs it in the current
  /// frame and context.
  ExecOutcome run_minimal(std::string_view command_text, SourceOrigin origin = SourceOrigin::single_command) {
    Program prog = compile_text(command_text, origin);
    return run_sequence(prog.instructions);
  }

  Program compile_text(std::string_view command_text, SourceOrigin origin) {
    SourceUnit unit = read_source(command_text, origin, "<generated>");
    return compile_single(unit, reservoir_);
  }

  /// Runs `seq` in a transient top-level frame.
  ExecOutcome run_top_level(const Sequence& seq, const Context& ctx, VariableTable locals = {},
                            std::string module = {}) {
    Frame f;
    f.top_level = true;
    f.module = std::move(module);
    f.locals = std::move(locals);
    FrameGuard frame(*this, std::move(f));
    ContextGuard guard(*this, &ctx);
    return run_sequence(seq);
  }

  /// Calls a function or script event by name; errors come back in the outcome.
  std::pair<Value, ExecOutcome> invoke_named(std::string_view name, std::vector<Value> args,
                                             VariableTable initial = {}) {
    std::string n(name);
    if (auto it = functions_.find(n); it != functions_.end()) {
      auto def = it->second;  // keeps the body alive if the function deletes itself
      return invoke(def->name, def->module, def->body, {}, std::move(args), std::move(initial));
    }
    if (auto it = events_.find(n); it != events_.end()) {
      if (it->second.host) {
        return {{}, ExecOutcome::failure(ErrorCode::HostEventNotCallable, n)};
      }
      auto def = it->second.def;
      return invoke(def->name, def->module, def->body, def->name, std::move(args), std::move(initial));
    }
    return {{}, ExecOutcome::failure(ErrorCode::UnknownFunction, n)};
  }

  /// Calls the registered functions of the event whose body is running.
  ExecOutcome trigger_current(const std::optional<std::string>& results_array) {
    Frame* f = scope_.current();
    if (!f || f->event.empty()) return ExecOutcome::failure(ErrorCode::TriggerOutsideEvent, "");
    std::string event = f->event;
    VariableTable locals = f->locals;
    std::vector<Value> results;
    ExecOutcome o = dispatch(event, locals, results);
    if (!o.ok) return o;
    if (results_array && !results.empty()) {
      scope_.erase_array(*results_array);
      Array& a = scope_.make_array(*results_array);
      for (std::size_t i = 0; i < results.size(); ++i) a.set(std::to_string(i), results[i]);
    }
    return o;
  }

  /// Loads a file for runscript/runfile; an already loaded module from the
  /// same file is reused. Returns the top-level instructions.
  std::shared_ptr<const Program> load_for_run(const std::filesystem::path& path) {
    auto resolved = resolve_path(path);
    std::string module = resolved.stem().string();
    Program prog = compile_file_text(read_file(resolved), module, resolved.string());
    auto it = modules_.find(module);
    bool reuse = it != modules_.end() && it->second.path == resolved.string();
    Sequence instructions = std::move(prog.instructions);
    if (!reuse && (!prog.functions.empty() || !prog.events.empty())) {
      link(std::move(prog), resolved.string());
    }
    auto out = std::make_shared<Program>();
    out->instructions = std::move(instructions);
    out->module_name = module;
    return out;
  }

  const Context& default_context() const { return contexts_.at(std::string(kDefaultContext)); }

  std::mt19937_64& rng() { return rng_; }

  // ---- internals -----------------------------------------------------

 private:
  struct EventEntry {
    std::shared_ptr<const EventDef> def;  // null for host events
    EventType type = EventType::multi;
    std::string module;
    bool host = false;
    std::vector<std::string> registrants;
  };

  struct ModuleEntry {
    std::string path;
    std::vector<std::string> functions;
    std::vector<std::string> events;
  };

  class ContextGuard {
   public:
    ContextGuard(Interpreter& vm, const Context* ctx) : vm_(vm), saved_(vm.context_) { vm.context_ = ctx; }
    ~ContextGuard() { vm_.context_ = saved_; }
    ContextGuard(const ContextGuard&) = delete;
    ContextGuard& operator=(const ContextGuard&) = delete;

   private:
    Interpreter& vm_;
    const Context* saved_;
  };

  class FrameGuard {
   public:
    FrameGuard(Interpreter& vm, Frame f) : vm_(vm) { vm.scope_.frames.push_back(std::move(f)); }
    ~FrameGuard() { vm_.scope_.frames.pop_back(); }
    FrameGuard(const FrameGuard&) = delete;
    FrameGuard& operator=(const FrameGuard&) = delete;
    Frame& frame() { return vm_.scope_.frames.back(); }

   private:
    Interpreter& vm_;
  };

  friend class CommandCall;

  static ExecOutcome normalize(ExecOutcome o) {
    if (o.is_function_return() || o.is_special()) return ExecOutcome::success();
    return o;
  }

  static std::string compile_error_text(const CompileError& e) {
    std::string text = e.what();
    if (!e.span().file.empty() && e.span().file != "<input>" && e.span().file != "<generated>") {
      text += " (" + describe(e.span()) + ")";
    }
    return text;
  }

  SubmitResult submit_to_sink(std::string_view command, std::string_view context_id) {
    SubmitResult r;
    const Context& ctx = context(context_id);
    Program prog;
    try {
      prog = compile_text(command, SourceOrigin::single_command);
    } catch (const CompileError& e) {
      r.outcome = ExecOutcome::failure(compile_error_text(e));
      r.compile_error = true;
      return r;
    } catch (const ReadError& e) {
      r.outcome = ExecOutcome::failure(e.what());
      r.compile_error = true;
      return r;
    }
    r.outcome = normalize(run_top_level(prog.instructions, ctx));
    return r;
  }

  Program compile_file_text(std::string_view bytes, const std::string& module, const std::string& file) {
    SourceUnit unit = read_source(decode_source(bytes), SourceOrigin::script_file, file);
    return compile_script(unit, reservoir_, module);
  }

  std::filesystem::path resolve_path(const std::filesystem::path& path) const {
    if (path.is_absolute()) return path;
    return options_.script_root / path;
  }

  static std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// Registers a compiled program's definitions; all checks happen before
  /// anything is committed.
  void link(Program prog, const std::string& file) {
    const std::string& module = prog.module_name;
    for (const auto& f : prog.functions) {
      if (functions_.count(f.name) || events_.count(f.name)) {
        throw CompileError(ErrorCode::RedefinedFunction, f.name, f.span);
      }
    }
    for (const auto& e : prog.events) {
      if (!options_.events_enabled) throw CompileError(ErrorCode::EventsDisabled, e.name, e.span);
      if (functions_.count(e.name) || events_.count(e.name)) {
        throw CompileError(ErrorCode::DuplicateEvent, e.name, e.span);
      }
    }
    for (const auto& f : prog.functions) {
      if (!f.event_binding) continue;
      bool local = std::any_of(prog.events.begin(), prog.events.end(),
                               [&](const EventDef& e) { return e.name == *f.event_binding; });
      if (!local && !events_.count(*f.event_binding)) {
        throw CompileError(ErrorCode::UnknownEventBinding, f.name + " << " + *f.event_binding, f.span);
      }
    }
    if (modules_.count(module)) throw Error(ErrorCode::DuplicateModule, module);

    ModuleEntry entry;
    entry.path = file;
    for (auto& e : prog.events) {
      entry.events.push_back(e.name);
      EventType type = e.type;
      std::string name = e.name;
      events_.emplace(name, EventEntry{std::make_shared<const EventDef>(std::move(e)), type, module, false, {}});
    }
    for (auto& f : prog.functions) {
      entry.functions.push_back(f.name);
      if (f.event_binding) events_.at(*f.event_binding).registrants.push_back(f.name);
      std::string name = f.name;
      functions_.emplace(name, std::make_shared<const FunctionDef>(std::move(f)));
    }
    modules_.emplace(module, std::move(entry));
  }

  void remove_function(const std::string& name) {
    functions_.erase(name);
    for (auto& [k, e] : events_) std::erase(e.registrants, name);
  }

  std::pair<Value, ExecOutcome> invoke(const std::string& name, const std::string& module, const Sequence& body,
                                       const std::string& event, std::vector<Value> args, VariableTable initial) {
    if (scope_.frames.size() >= options_.max_call_depth) {
      return {{}, ExecOutcome::failure(ErrorCode::RecursionLimit, "call depth exceeds " +
                                                                      std::to_string(options_.max_call_depth))};
    }
    Frame f;
    f.function_name = name;
    f.module = module;
    f.event = event;
    f.locals = std::move(initial);
    if (!f.locals.arrays.count("arg") || !args.empty()) {
      Array& arg = f.locals.arrays["arg"];
      arg = Array{};
      for (std::size_t i = 0; i < args.size(); ++i) arg.set(std::to_string(i), std::move(args[i]));
    }
    if (auto it = scope_.pending_puts.find(name); it != scope_.pending_puts.end()) {
      for (auto& [k, v] : it->second) f.locals.scalars[k] = std::move(v);
      scope_.pending_puts.erase(it);
    }
    FrameGuard frame(*this, std::move(f));
    ContextGuard guard(*this, &default_context());
    ExecOutcome o = run_sequence(body);
    Value result = frame.frame().result;
    if (o.ok || o.is_function_return() || o.is_break() || o.is_continue()) return {result, ExecOutcome::success()};
    return {result, o};
  }

  ExecOutcome dispatch(const std::string& event, const VariableTable& locals, std::vector<Value>& results) {
    auto it = events_.find(event);
    if (it == events_.end()) return ExecOutcome::failure(ErrorCode::UnknownFunction, event);
    std::vector<std::string> targets = it->second.registrants;
    if (it->second.type == EventType::single && targets.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
      targets = {targets[pick(rng_)]};
    }
    for (const auto& name : targets) {
      auto fn = functions_.find(name);
      if (fn == functions_.end()) continue;
      auto def = fn->second;
      auto [value, o] = invoke(def->name, def->module, def->body, {}, {}, locals);
      if (!o.ok) return o;
      results.push_back(std::move(value));
    }
    return ExecOutcome::success();
  }

  void fire(const Timer& t, std::int64_t now) {
    std::string name = t.name;
    auto body = t.body;
    VariableTable locals = t.captured;
    std::string module = t.module;
    timers_.fired(name, now);  // books the firing first: the body may cancel or recreate
    ExecOutcome o = normalize(run_top_level(*body, default_context(), std::move(locals), std::move(module)));
    if (!o.ok) report_error("timer " + name + ": " + o.error.value_or(""));
  }

  void debug_step(const CommandInvocation& inv) {
    std::shared_ptr<DebugHook> hook;
    {
      std::lock_guard lk(hook_mutex_);
      hook = hook_;
    }
    if (!hook) return;
    DebugEvent ev{inv.name, inv.raw_params, inv.span, scope_.frames.size()};
    if ((*hook)(ev, *this) == StepDecision::stop) {
      std::unique_lock lk(park_mutex_);
      parked_ = true;
      park_cv_.notify_all();
      park_cv_.wait(lk, [&] { return !parked_; });
    }
  }

  std::shared_ptr<const Segment> parsed(std::string_view raw) {
    std::string key(raw);
    if (auto it = parse_cache_.find(key); it != parse_cache_.end()) return it->second;
    auto seg = std::make_shared<const Segment>(parse_segment(raw));
    if (parse_cache_.size() > 4096) parse_cache_.clear();
    parse_cache_.emplace(std::move(key), seg);
    return seg;
  }

  // ---- constants -----------------------------------------------------

  static const std::map<std::string, std::string, std::less<>>& fixed_constants() {
    static const std::map<std::string, std::string, std::less<>> table{
        {"true", "1"},        {"false", "0"},        {"empty", ""},
        {"Pi", number::format_float(std::numbers::pi)},
        {"\\n", "\n"},        {"\\r\\n", "\r\n"},    {"\\r", "\r"},
        {"\\t", "\t"},        {"\\$", "$"},          {"\\s", " "},
        {"lparen", "("},      {"rparen", ")"},       {"ltabparen", "["},
        {"rtabparen", "]"},   {"lcurlparen", "{"},   {"rcurlparen", "}"},
    };
    return table;
  }

  static bool builtin_constant(std::string_view name) {
    static const std::vector<std::string_view> dynamic{"parent_name", "parent_param", "owner_name", "owner_param",
                                                       "time", "date"};
    return fixed_constants().count(name) || std::find(dynamic.begin(), dynamic.end(), name) != dynamic.end() ||
           (name.substr(0, 3) == "\\u(" && name.back() == ')');
  }

  std::string strftime_now(const std::string& format) const {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[256];
    std::size_t n = std::strftime(buf, sizeof buf, format.c_str(), &tm);
    return std::string(buf, n);
  }

  static std::string joined(const std::vector<std::string>& params) {
    std::string out;
    for (const auto& p : params) {
      if (!out.empty()) out += ' ';
      out += p;
    }
    return out;
  }

  static Value constant_value(const ConstantBinding& b) {
    if (const auto* v = std::get_if<Value>(&b)) return *v;
    return std::get<ConstantFunction>(b)();
  }

  Value read_constant(std::string_view name) override {
    const auto& fixed = fixed_constants();
    if (auto it = fixed.find(name); it != fixed.end()) return it->second;
    if (name.substr(0, 3) == "\\u(" && name.size() > 4 && name.back() == ')') {
      std::string_view digits = name.substr(3, name.size() - 4);
      auto cp = number::parse_int64(digits);
      if (!cp) throw ScriptError(ErrorCode::NonNumericArgument, "'" + std::string(digits) + "' is not a code point");
      if (*cp < 0 || !text::valid_code_point(static_cast<std::uint32_t>(*cp))) {
        throw ScriptError(ErrorCode::ValueOutOfRange, "code point " + std::string(digits));
      }
      std::string out;
      text::append_utf8(out, static_cast<std::uint32_t>(*cp));
      return out;
    }
    if (name == "owner_name" || name == "owner_param" || name == "parent_name" || name == "parent_param") {
      if (active_.empty()) return {};
      const CommandInvocation* self = active_.back();
      const CommandInvocation* target = name.substr(0, 5) == "owner" || active_.size() < 2 ? self : active_[active_.size() - 2];
      return name.ends_with("_name") ? target->name : joined(target->raw_params);
    }
    if (name == "time") return strftime_now(options_.time_format);
    if (name == "date") return strftime_now(options_.date_format);
    if (auto it = context_->constants.find(name); it != context_->constants.end()) return constant_value(it->second);
    if (auto it = constants_.find(name); it != constants_.end()) return constant_value(it->second);
    throw ScriptError(ErrorCode::UnknownConstant, name);
  }

  // ---- EvalHost --------------------------------------------------------

  Value read_variable(std::string_view name, const std::optional<Value>& index) override {
    if (index) {
      if (const Value* v = scope_.element(name, *index)) return *v;
      throw ScriptError(ErrorCode::UnsetVariable, std::string(name) + "[" + *index + "]");
    }
    if (const Value* v = scope_.scalar(name)) return *v;
    throw ScriptError(ErrorCode::UnsetVariable, name);
  }

  Value call_function(std::string_view name, std::vector<Value> args) override {
    auto [value, o] = invoke_named(name, std::move(args));
    if (!o.ok) throw ScriptError(o.error.value_or(""));
    return value;
  }

  void assign(std::string_view name, const Value& value) override { scope_.set(name, value); }

  bool exists(std::string_view name) override { return scope_.exists(name); }

  std::string execute_command(std::string_view command) override {
    ExecOutcome o;
    try {
      o = run_minimal(command);
    } catch (const CompileError& e) {
      return compile_error_text(e);
    }
    if (o.is_special()) throw ScriptError(*o.error);
    return o.is_error() ? *o.error : std::string();
  }

  Options options_;
  std::shared_ptr<Clock> clock_;
  Reservoir reservoir_;
  std::map<std::string, Context, std::less<>> contexts_;
  std::map<std::string, ConstantBinding, std::less<>> constants_;
  const Context* context_ = nullptr;
  Scope scope_;
  std::unordered_map<std::string, std::shared_ptr<const FunctionDef>> functions_;
  std::map<std::string, EventEntry> events_;
  std::map<std::string, ModuleEntry, std::less<>> modules_;
  TimerTable timers_;
  OutputSink out_;
  ErrorSink err_;
  std::size_t reported_errors_ = 0;
  std::mt19937_64 rng_;
  Evaluator evaluator_;
  std::vector<const CommandInvocation*> active_;
  std::unordered_map<std::string, std::shared_ptr<const Segment>> parse_cache_;

  mutable std::mutex hook_mutex_;
  std::shared_ptr<DebugHook> hook_;
  mutable std::mutex park_mutex_;
  std::condition_variable park_cv_;
  bool parked_ = false;
};

inline ExecOutcome CommandCall::run_block(std::size_t i) { return vm_.run_sequence(inv_.blocks.at(i)); }
inline Value CommandCall::interpolate(std::string_view raw) { return vm_.interpolate(raw); }
inline const Context& CommandCall::context() const { return vm_.current_context(); }
inline Scope& CommandCall::scope() { return vm_.scope(); }
inline void CommandCall::output(std::string_view line) { vm_.output(line); }

}  // namespace t2script
