#pragma once

// Internal commands: control flow, variables, arrays, functions, events,
// timers, eval-type commands, modules and envrs.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/interpreter.hpp"
#include "t2script/subprocess.hpp"

namespace t2script {

namespace builtins {

using O = ExecOutcome;

inline std::int64_t count_param(std::string_view what, std::string_view v) {
  auto n = number::parse_int64(v);
  if (!n) throw ScriptError(ErrorCode::NonNumericArgument, std::string(what) + " '" + std::string(v) + "'");
  if (*n < 0) throw ScriptError(ErrorCode::ValueOutOfRange, std::string(what) + " '" + std::string(v) + "'");
  return *n;
}

/// Splits at `sep` outside `[...]`.
inline std::vector<std::string> split_commands(std::string_view text, std::string_view sep) {
  std::vector<std::string> out;
  if (sep.empty()) {
    out.emplace_back(text);
    return out;
  }
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '[') ++depth;
    else if (c == ']' && depth > 0) --depth;
    if (depth == 0 && text.substr(i, sep.size()) == sep) {
      out.emplace_back(text.substr(start, i - start));
      i += sep.size();
      start = i;
      continue;
    }
    ++i;
  }
  out.emplace_back(text.substr(start));
  return out;
}

/// Loop bookkeeping shared by the loop commands.
enum class Step { next, stop, propagate };

inline Step loop_step(const O& o) {
  if (o.ok || o.is_continue()) return Step::next;
  if (o.is_break()) return Step::stop;
  return Step::propagate;
}

inline O run_pieces(CommandCall& c, std::string_view raw, std::string_view sep) {
  for (const auto& piece : split_commands(raw, sep)) {
    if (text::trim(piece).empty()) continue;
    Value command = c.interpolate(piece);
    O o = c.vm().run_minimal(command);
    if (!o.ok) return o;
  }
  return O::success();
}

inline CommandSpec spec(std::string name, Arity arity, CommandHandler h, BlockShape blocks = BlockShape::none,
                        std::string keyword = {}, bool inline_form = false, ExprMode mode = ExprMode::automatic) {
  CommandSpec s;
  s.name = std::move(name);
  s.arity = arity;
  s.handler = std::move(h);
  s.blocks = blocks;
  s.keyword = std::move(keyword);
  s.inline_form = inline_form;
  s.expr_mode = mode;
  return s;
}

inline Frame& function_frame(CommandCall& c, std::string_view cmd) {
  Frame* f = c.scope().current();
  if (!f || f->top_level) throw ScriptError(ErrorCode::ArgsOutsideFunction, std::string(cmd) + " outside a function");
  return *f;
}

inline std::vector<CommandSpec> control_commands() {
  std::vector<CommandSpec> v;

  v.push_back(spec("if", Arity::exactly(1, true), [](CommandCall& c) {
    if (truthy(c.param(0))) return c.run_block(0);
    if (c.block_count() > 1) return c.run_block(1);
    return O::success();
  }, BlockShape::two_optional, "else", true));

  v.push_back(spec("repeat", Arity::exactly(1, true), [](CommandCall& c) {
    std::int64_t n = count_param("repeat count", c.param(0));
    for (std::int64_t i = 0; i < n; ++i) {
      O o = c.run_block(0);
      Step s = loop_step(o);
      if (s == Step::stop) break;
      if (s == Step::propagate) return o;
    }
    return O::success();
  }, BlockShape::one, {}, true));

  v.push_back(spec("while", Arity::exactly(1, true), [](CommandCall& c) {
    const std::string& cond = c.param(0);
    bool first = true;
    while (truthy(c.interpolate(cond))) {
      first = false;
      O o = c.run_block(0);
      Step s = loop_step(o);
      if (s == Step::stop) break;
      if (s == Step::propagate) return o;
    }
    if (first && c.block_count() > 1) return c.run_block(1);
    return O::success();
  }, BlockShape::two_optional, "else", true, ExprMode::on_demand));

  v.push_back(spec("for", Arity::exactly(3, true), [](CommandCall& c) {
    Value var = c.interpolate(c.param(0));
    c.scope().set(var, c.interpolate(c.param(1)));
    const std::string& cond = c.param(2);
    while (truthy(c.interpolate(cond))) {
      O o = c.run_block(0);
      Step s = loop_step(o);
      if (s == Step::propagate) return o;
      if (c.block_count() > 1) {
        O e = c.run_block(1);
        Step es = loop_step(e);
        if (es == Step::propagate) return e;
        if (es == Step::stop) break;
      }
      if (s == Step::stop) break;
    }
    return O::success();
  }, BlockShape::two_optional, "every", false, ExprMode::on_demand));

  v.push_back(spec("foreach", Arity::exactly(3), [](CommandCall& c) {
    if (!text::iequals(c.param(1), "in")) {
      throw ScriptError(ErrorCode::MalformedForeach, "expected 'foreach VAR in ARRAY', got '" + c.param(1) + "'");
    }
    const Array* a = c.scope().array(c.param(2));
    if (!a) throw ScriptError(ErrorCode::NotAnArray, c.param(2));
    auto items = a->items();
    for (auto& [key, value] : items) {
      c.scope().set(c.param(0), std::move(value));
      O o = c.run_block(0);
      Step s = loop_step(o);
      if (s == Step::stop) break;
      if (s == Step::propagate) return o;
    }
    return O::success();
  }, BlockShape::one, {}, true));

  v.push_back(spec("break", Arity::none(), [](CommandCall&) { return O::failure(std::string(kBreakCode)); }));
  v.push_back(spec("continue", Arity::none(), [](CommandCall&) { return O::failure(std::string(kContinueCode)); }));

  v.push_back(spec("throw", Arity::exactly(1), [](CommandCall& c) {
    const Value* v = c.scope().scalar(c.param(0));
    if (!v) throw ScriptError(ErrorCode::UnsetVariable, c.param(0));
    return O::failure(*v);
  }));

  v.push_back(spec("catch", Arity::range(0, 1), [](CommandCall& c) {
    O o = c.run_block(0);
    if (!o.is_error()) return o;
    if (c.has_param(0)) c.scope().set(c.param(0), *o.error);
    return O::success();
  }, BlockShape::one));

  v.push_back(spec("null", Arity::none(), [](CommandCall&) { return O::success(); }));
  return v;
}

inline std::vector<CommandSpec> eval_commands() {
  std::vector<CommandSpec> v;
  v.push_back(spec("mechanize", Arity::exactly(1, true), [](CommandCall& c) {
    return c.vm().run_minimal(c.interpolate(c.param(0)));
  }, BlockShape::none, {}, false, ExprMode::on_demand));

  v.push_back(spec("mlc", Arity::exactly(1, true), [](CommandCall& c) {
    return run_pieces(c, c.param(0), "||");
  }, BlockShape::none, {}, false, ExprMode::on_demand));

  v.push_back(spec("mlcext", Arity::exactly(2, true), [](CommandCall& c) {
    return run_pieces(c, c.param(1), c.interpolate(c.param(0)));
  }, BlockShape::none, {}, false, ExprMode::on_demand));

  v.push_back(spec("expr", Arity::exactly(1, true), [](CommandCall&) { return O::success(); }));

  v.push_back(spec("envrs", Arity::exactly(3, true), [](CommandCall& c) {
    Interpreter& vm = c.vm();
    const std::string& program = c.param(0);
    const auto& allow = vm.options().envrs_allow;
    if (!allow.empty() && std::find(allow.begin(), allow.end(), program) == allow.end()) {
      throw ScriptError(ErrorCode::EnvrsNotAllowed, program);
    }
    std::string out = run_process(program, split_command_args(c.param(1)), c.param(2), vm.options().envrs_timeout);
    SourceUnit unit = read_source(out, SourceOrigin::meta_generated, "<envrs>");
    for (const auto& line : unit.lines) {
      if (line.kind == LineKind::hash_directive) {
        throw ScriptError(ErrorCode::MinimalCompileError, "generated code defines '" + line.text + "'");
      }
    }
    Program prog = compile_single(unit, vm.reservoir());
    return vm.run_top_level(prog.instructions, vm.default_context());
  }));
  return v;
}

inline std::vector<CommandSpec> variable_commands() {
  std::vector<CommandSpec> v;
  v.push_back(spec("setvar", Arity::exactly(2, true), [](CommandCall& c) {
    c.scope().set(c.param(0), c.has_param(1) ? c.param(1) : Value());
    return O::success();
  }));
  v.back().arity = Arity::range(1, 2, true);

  v.push_back(spec("delvar", Arity::at_least(1), [](CommandCall& c) {
    for (const auto& n : c.params()) c.scope().erase(n);
    return O::success();
  }));

  v.push_back(spec("isset", Arity::exactly(2), [](CommandCall& c) {
    c.scope().set(c.param(1), number::format_bool(c.scope().exists(c.param(0))));
    return O::success();
  }));

  v.push_back(spec("isnumeric", Arity::exactly(2), [](CommandCall& c) {
    const Value* val = c.scope().scalar(c.param(0));
    c.scope().set(c.param(1), number::format_bool(val && number::is_decimal_text(*val)));
    return O::success();
  }));

  v.push_back(spec("setarray", Arity::exactly(3, true), [](CommandCall& c) {
    c.scope().set_element(c.param(0), c.param(1), c.has_param(2) ? c.param(2) : Value());
    return O::success();
  }));
  v.back().arity = Arity::range(2, 3, true);

  v.push_back(spec("delarray", Arity::exactly(1), [](CommandCall& c) {
    c.scope().erase_array(c.param(0));
    return O::success();
  }));

  v.push_back(spec("arraysize", Arity::exactly(2), [](CommandCall& c) {
    const Array* a = c.scope().array(c.param(0));
    if (!a) throw ScriptError(ErrorCode::NotAnArray, c.param(0));
    c.scope().set(c.param(1), std::to_string(a->size()));
    return O::success();
  }));

  v.push_back(spec("isarray", Arity::exactly(2), [](CommandCall& c) {
    c.scope().set(c.param(1), number::format_bool(c.scope().array(c.param(0)) != nullptr));
    return O::success();
  }));

  v.push_back(spec("inc", Arity::exactly(1), [](CommandCall& c) {
    const Value* val = c.scope().scalar(c.param(0));
    if (!val) throw ScriptError(ErrorCode::UnsetVariable, c.param(0));
    auto n = number::parse_integer(*val);
    if (!n) throw ScriptError(ErrorCode::NonNumericVariable, c.param(0) + " = '" + *val + "'");
    c.scope().set(c.param(0), number::format_integer(*n + 1));
    return O::success();
  }));

  v.push_back(spec("textout", Arity::range(0, 1, true), [](CommandCall& c) {
    c.output(c.has_param(0) ? c.param(0) : std::string());
    return O::success();
  }));
  return v;
}

inline std::vector<CommandSpec> function_commands() {
  std::vector<CommandSpec> v;
  v.push_back(spec("function", Arity::range(1, 2, true), [](CommandCall& c) {
    std::vector<Value> args = c.has_param(1) ? text::split_words(c.param(1)) : std::vector<Value>{};
    auto [value, o] = c.vm().invoke_named(c.param(0), std::move(args));
    if (!o.ok) return o;
    if (!value.empty()) c.output(value);
    return O::success();
  }));

  v.push_back(spec("functiondel", Arity::exactly(1), [](CommandCall& c) {
    c.vm().delete_function(c.param(0));
    return O::success();
  }));

  v.push_back(spec("put", Arity::exactly(3, true), [](CommandCall& c) {
    std::string local = c.param(1);
    if (!local.empty() && local.front() == '@') local.erase(0, 1);
    if (local.empty()) throw ScriptError(ErrorCode::EmptyName, "put needs a local name");
    c.scope().pending_puts[c.param(0)].emplace_back(std::move(local), c.has_param(2) ? c.param(2) : Value());
    return O::success();
  }));
  v.back().arity = Arity::range(2, 3, true);

  v.push_back(spec("return", Arity::range(0, 1, true), [](CommandCall& c) {
    if (Frame* f = c.scope().current(); f && c.has_param(0)) f->result = c.param(0);
    return O::function_return();
  }));

  v.push_back(spec("result", Arity::exactly(1, true), [](CommandCall& c) {
    if (Frame* f = c.scope().current()) f->result = c.param(0);
    return O::success();
  }));

  v.push_back(spec("args", Arity::at_least(0), [](CommandCall& c) {
    Frame& f = function_frame(c, "args");
    if (f.args_bound) throw ScriptError(ErrorCode::ArgsAlreadyBound, f.function_name);
    const Array* arg = c.scope().array("@arg");
    std::size_t have = arg ? arg->size() : 0;
    if (have < c.param_count()) {
      throw ScriptError(ErrorCode::TooFewArguments, f.function_name + " expects " + std::to_string(c.param_count()) +
                                                        " argument(s), got " + std::to_string(have));
    }
    for (std::size_t i = 0; i < c.param_count(); ++i) {
      std::string name = c.param(i);
      if (!name.empty() && name.front() == '@') name.erase(0, 1);
      f.locals.scalars[name] = *arg->get(std::to_string(i));
    }
    f.args_bound = true;
    return O::success();
  }));

  v.push_back(spec("trigger", Arity::range(0, 1), [](CommandCall& c) {
    std::optional<std::string> target;
    if (c.has_param(0)) target = c.param(0);
    return c.vm().trigger_current(target);
  }));

  v.push_back(spec("whitelist", Arity::at_least(2), [](CommandCall& c) {
    const Value* val = c.scope().scalar(c.param(0));
    if (!val) throw ScriptError(ErrorCode::UnsetVariable, c.param(0));
    for (std::size_t i = 1; i < c.param_count(); ++i) {
      if (c.param(i) == *val) return O::success();
    }
    return O::function_return();
  }));
  return v;
}

inline std::vector<CommandSpec> module_commands() {
  std::vector<CommandSpec> v;
  v.push_back(spec("load", Arity::exactly(2, true), [](CommandCall& c) {
    c.vm().load_module(c.param(1), c.param(0));
    return O::success();
  }));

  auto run = [](CommandCall& c, const std::string& path, std::vector<Value> args) {
    Interpreter& vm = c.vm();
    auto prog = vm.load_for_run(path);
    VariableTable locals;
    Array& arg = locals.arrays["arg"];
    for (std::size_t i = 0; i < args.size(); ++i) arg.set(std::to_string(i), args[i]);
    return vm.run_top_level(prog->instructions, vm.default_context(), std::move(locals), prog->module_name);
  };
  v.push_back(spec("runscript", Arity::range(1, 2, true), [run](CommandCall& c) {
    std::vector<Value> args = c.has_param(1) ? text::split_words(c.param(1)) : std::vector<Value>{};
    O o = run(c, c.param(0), std::move(args));
    return o.is_function_return() ? O::success() : o;
  }));
  v.push_back(spec("runfile", Arity::exactly(1, true), [run](CommandCall& c) {
    O o = run(c, c.param(0), {});
    return o.is_function_return() ? O::success() : o;
  }));
  return v;
}

inline std::vector<CommandSpec> timer_commands() {
  std::vector<CommandSpec> v;
  v.push_back(spec("settimer", Arity::exactly(3), [](CommandCall& c) {
    auto interval = number::parse_int64(c.param(1));
    auto iterations = number::parse_int64(c.param(2));
    if (!interval) throw ScriptError(ErrorCode::NonNumericArgument, "timer interval '" + c.param(1) + "'");
    if (!iterations) throw ScriptError(ErrorCode::NonNumericArgument, "timer iterations '" + c.param(2) + "'");
    c.vm().create_timer(c.param(0), *interval, *iterations, c.block(0));
    return O::success();
  }, BlockShape::one));

  v.push_back(spec("killtimer", Arity::exactly(1), [](CommandCall& c) {
    c.vm().cancel_timer(c.param(0));
    return O::success();
  }));

  v.push_back(spec("timerlist", Arity::exactly(1), [](CommandCall& c) {
    c.scope().erase_array(c.param(0));
    Array& a = c.scope().make_array(c.param(0));
    std::size_t i = 0;
    for (const auto& t : c.vm().timer_list()) {
      a.set(std::to_string(i++),
            t.name + " " + std::to_string(t.interval_ms) + " " + std::to_string(t.remaining));
    }
    return O::success();
  }));
  return v;
}

}  // namespace builtins

/// Registers every internal command. Names in `disabled` are registered
/// but start disabled.
inline void register_builtins(Interpreter& vm, const std::vector<std::string>& disabled = {}) {
  for (auto group : {builtins::control_commands(), builtins::eval_commands(), builtins::variable_commands(),
                     builtins::function_commands(), builtins::module_commands(), builtins::timer_commands()}) {
    for (auto& s : group) vm.add_command(std::move(s));
  }
  for (const auto& name : disabled) vm.disable_command(name);
}

}  // namespace t2script
