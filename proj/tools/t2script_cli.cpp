// t2s: run .tsc scripts, evaluate single commands, or start a REPL.
//
//   t2s run a.tsc b.tsc       load, run top-level code, trigger on_load
//   t2s -e "textout hi"       one single command (repeatable)
//   t2s repl                  read commands from standard input

#include <unistd.h>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "t2script/t2script.hpp"

namespace {

using namespace t2script;

enum Exit { ok = 0, failed = 1, compile = 2 };

struct Settings {
  std::vector<std::string> scripts;
  std::vector<std::string> evals;
  std::string script_root = ".";
  std::vector<std::string> disabled;
  std::vector<std::string> envrs_allow;
  std::uint64_t seed = Options{}.seed;
  bool trace = false;
  std::string time_format = Options{}.time_format;
  std::string date_format = Options{}.date_format;
  bool lint = false;
};

std::unique_ptr<Interpreter> make_vm(const Settings& s) {
  Configuration cfg;
  cfg.options.script_root = s.script_root;
  cfg.options.seed = s.seed;
  cfg.options.envrs_allow = s.envrs_allow;
  cfg.options.time_format = s.time_format;
  cfg.options.date_format = s.date_format;
  cfg.disabled = s.disabled;
  auto vm = configure(std::move(cfg));
  vm->set_output([](std::string_view line) { std::cout << line << '\n' << std::flush; });
  vm->set_error_sink([](std::string_view msg) { std::cerr << "error: " << msg << '\n'; });
  vm->define_host_event("on_load", EventType::multi);
  if (s.trace) {
    vm->attach_debugger([](const DebugEvent& ev, Interpreter&) {
      std::cerr << "trace: " << std::string(ev.depth * 2, ' ') << ev.command;
      for (const auto& p : ev.raw_params) std::cerr << ' ' << p;
      if (!ev.span.file.empty()) std::cerr << "  (" << describe(ev.span) << ')';
      std::cerr << '\n';
      return StepDecision::proceed;
    });
  }
  return vm;
}

/// Fires wall-clock timers until none are left.
void drain_timers(Interpreter& vm) {
  while (auto due = vm.next_timer_due()) {
    auto wait = *due - vm.clock().now_ms();
    if (wait > 0) std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    vm.run_due_timers();
  }
}

int report(Interpreter& vm, const ExecOutcome& o) {
  if (o.ok) return ok;
  vm.report_error(o.error.value_or(""));
  return failed;
}

int single(Interpreter& vm, const std::string& text) {
  SubmitResult r = vm.submit(text);
  std::cout << r.output << std::flush;
  if (r.outcome.ok) return ok;
  vm.report_error(r.outcome.error.value_or(""));
  return r.compile_error ? compile : failed;
}

int lint(const Settings& s) {
  int status = ok;
  for (const auto& path : s.scripts) {
    std::ifstream in(std::filesystem::path(s.script_root) / path, std::ios::binary);
    if (!in) {
      std::cerr << "error: " << error_text(ErrorCode::FileNotFound, path) << '\n';
      status = compile;
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      SourceUnit unit = read_source(decode_source(ss.str()), SourceOrigin::script_file, path);
      for (const auto& note : unit.notes) std::cerr << "lint: " << describe(note.span) << ": " << note.message << '\n';
      auto vm = make_vm(s);
      compile_script(unit, vm->reservoir(), std::filesystem::path(path).stem().string());
    } catch (const CompileError& e) {
      std::cerr << "error: " << e.what() << " (" << describe(e.span()) << ")\n";
      status = compile;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      status = compile;
    }
  }
  return status;
}

int run(const Settings& s) {
  auto vm = make_vm(s);
  std::size_t errors_before = 0;
  for (const auto& path : s.scripts) {
    try {
      auto prog = vm->load_for_run(path);
      ExecOutcome o = vm->run_top_level(prog->instructions, vm->default_context(), {}, prog->module_name);
      if (!o.ok && !o.is_function_return() && !o.is_special()) return report(*vm, o);
    } catch (const CompileError& e) {
      std::cerr << "error: " << e.what() << " (" << describe(e.span()) << ")\n";
      return compile;
    } catch (const ReadError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return compile;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return e.code() == ErrorCode::FileNotFound ? compile : failed;
    }
  }
  for (const auto& text : s.evals) {
    if (int status = single(*vm, text); status != ok) return status;
  }
  EventResult r = vm->trigger_event("on_load");
  if (!r.outcome.ok) return report(*vm, r.outcome);
  drain_timers(*vm);
  return vm->reported_errors() > errors_before ? failed : ok;
}

int eval_only(const Settings& s) {
  auto vm = make_vm(s);
  for (const auto& text : s.evals) {
    if (int status = single(*vm, text); status != ok) return status;
  }
  drain_timers(*vm);
  return vm->reported_errors() > 0 ? failed : ok;
}

int repl(const Settings& s) {
  auto vm = make_vm(s);
  bool tty = isatty(STDIN_FILENO);
  std::string line;
  while (true) {
    if (tty) std::cout << "t2> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::string_view cmd = text::trim(line);
    if (cmd == ":quit") break;
    if (cmd.empty()) continue;
    SubmitResult r = vm->submit(cmd);
    std::cout << r.output << std::flush;
    if (!r.outcome.ok) std::cerr << "error: " << r.outcome.error.value_or("") << '\n';
    vm->run_due_timers();
  }
  drain_timers(*vm);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"T2Script interpreter"};
  app.require_subcommand(0, 1);
  app.add_option("-e,--eval", s.evals, "execute one single command (repeatable)");
  app.add_option("--script-root", s.script_root, "directory for relative script paths");
  app.add_option("--disable", s.disabled, "commands to disable")->delimiter(',');
  app.add_option("--envrs-allow", s.envrs_allow, "interpreters envrs may start")->delimiter(',');
  app.add_option("--seed", s.seed, "seed for single() event dispatch");
  app.add_flag("--trace", s.trace, "print every command before it runs");
  app.add_option("--time-format", s.time_format, "strftime format of $_time");
  app.add_option("--date-format", s.date_format, "strftime format of $_date");

  auto* run_cmd = app.add_subcommand("run", "load scripts and trigger on_load");
  run_cmd->add_option("files", s.scripts, "script files")->required();
  run_cmd->add_flag("--lint", s.lint, "check the scripts without running them");
  auto* repl_cmd = app.add_subcommand("repl", "interactive single commands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? ok : compile;
  }

  try {
    if (run_cmd->parsed()) return s.lint ? lint(s) : run(s);
    if (repl_cmd->parsed()) return repl(s);
    if (!s.evals.empty()) return eval_only(s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failed;
  }
  std::cerr << app.help();
  return compile;
}
