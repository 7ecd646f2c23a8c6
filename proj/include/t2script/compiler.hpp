#pragma once

// Logical lines -> resolved command invocations, function and event tables.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/error.hpp"
#include "t2script/reader.hpp"
#include "t2script/reservoir.hpp"
#include "t2script/text.hpp"

namespace t2script {

struct CommandInvocation {
  CommandRef command;
  std::string name;  // folded
  std::vector<std::string> raw_params;
  std::vector<std::vector<CommandInvocation>> blocks;
  bool separation_keyword_present = false;
  bool inline_form = false;
  std::string keyword;  // separation keyword, when a second block is present
  SourceSpan span;
};

using Sequence = std::vector<CommandInvocation>;

enum class FunctionType { private_fn, public_fn, operator_fn };
enum class EventType { single, multi };

struct FunctionDef {
  std::string name;
  FunctionType type = FunctionType::private_fn;
  std::optional<std::string> event_binding;
  Sequence body;
  SourceSpan span;
  std::string module;
};

struct EventDef {
  std::string name;
  EventType type = EventType::multi;
  Sequence body;
  std::vector<std::string> declared_arg_names;
  SourceSpan span;
  std::string module;
};

struct Program {
  Sequence instructions;
  std::vector<FunctionDef> functions;  // definition order
  std::vector<EventDef> events;
  std::string module_name;
};

/// Splits the text after a command name. Tokens are separated by runs of
/// white space outside `[...]`; with a tail arity the last parameter keeps
/// the rest of the line verbatim.
inline std::vector<std::string> split_params(std::string_view line, const Arity& arity, const SourceSpan& span = {}) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (true) {
    while (i < n && text::is_white(line[i])) ++i;
    if (i == n) break;
    if (arity.tail && arity.max && out.size() + 1 == *arity.max) {
      out.emplace_back(text::rtrim(line.substr(i)));
      break;
    }
    std::size_t start = i;
    int depth = 0;
    while (i < n) {
      char c = line[i];
      if (c == '[') ++depth;
      else if (c == ']' && depth > 0) --depth;
      else if (depth == 0 && text::is_white(c)) break;
      ++i;
    }
    out.emplace_back(line.substr(start, i - start));
  }
  if (out.size() < arity.min) {
    throw CompileError(ErrorCode::ArityMismatch,
                       "expected at least " + std::to_string(arity.min) + " parameter(s), got " +
                           std::to_string(out.size()),
                       span);
  }
  if (arity.max && out.size() > *arity.max) {
    throw CompileError(ErrorCode::ArityMismatch,
                       "expected at most " + std::to_string(*arity.max) + " parameter(s), got " +
                           std::to_string(out.size()),
                       span);
  }
  return out;
}

/// Canonical script text of an invocation (blocks rendered with braces).
inline std::string render(const CommandInvocation& inv, int indent = 0) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::string out = pad + inv.name;
  for (const auto& p : inv.raw_params) out += " " + p;
  if (inv.inline_form && inv.blocks.size() == 1 && inv.blocks[0].size() == 1) {
    std::string sub = render(inv.blocks[0][0]);
    return out + " " + sub;
  }
  if (inv.blocks.empty()) return out + ";";
  for (std::size_t b = 0; b < inv.blocks.size(); ++b) {
    out += " {\n";
    for (const auto& c : inv.blocks[b]) out += render(c, indent + 1) + "\n";
    out += pad + "}";
    if (b + 1 < inv.blocks.size()) out += " " + inv.keyword;
  }
  return out;
}

namespace detail {

class Compiler {
 public:
  Compiler(const SourceUnit& unit, const Reservoir& reservoir) : unit_(unit), reservoir_(reservoir) {}

  Program script(std::string module) {
    Program prog;
    prog.module_name = module;
    while (cursor_ < unit_.lines.size()) {
      const LogicalLine& line = unit_.lines[cursor_];
      switch (line.kind) {
        case LineKind::hash_directive:
          ++cursor_;
          definition(line, prog, module);
          break;
        case LineKind::block_close:
          throw CompileError(ErrorCode::UnexpectedBlockClose, "'}' without an open block", line.span);
        default:
          prog.instructions.push_back(invocation(true));
      }
    }
    return prog;
  }

  Program single() {
    Program prog;
    for (const auto& line : unit_.lines) {
      if (line.kind == LineKind::hash_directive) {
        throw CompileError(ErrorCode::FunctionDefInMinimal, "definitions are not allowed here: " + line.text,
                           line.span);
      }
      if (unit_.origin == SourceOrigin::single_command && line.kind != LineKind::command) {
        throw CompileError(ErrorCode::BlockInSingleCommand, "block-commands are only allowed in script files",
                           line.span);
      }
    }
    while (cursor_ < unit_.lines.size()) {
      const LogicalLine& line = unit_.lines[cursor_];
      if (line.kind == LineKind::block_close) {
        throw CompileError(ErrorCode::UnexpectedBlockClose, "'}' without an open block", line.span);
      }
      prog.instructions.push_back(invocation(unit_.origin != SourceOrigin::single_command));
    }
    return prog;
  }

  /// One command from free text; used for the embedded command of inline forms.
  CommandInvocation command_text(std::string_view text, const SourceSpan& span) {
    return parse(text, LineKind::command, span, false);
  }

 private:
  CommandInvocation invocation(bool allow_blocks) {
    const LogicalLine& line = unit_.lines[cursor_++];
    return parse(line.text, line.kind, line.span, allow_blocks);
  }

  CommandInvocation parse(std::string_view text, LineKind kind, const SourceSpan& span, bool allow_blocks) {
    text = text::trim(text);
    std::size_t cut = 0;
    while (cut < text.size() && !text::is_white(text[cut])) ++cut;
    std::string_view name = text.substr(0, cut);
    std::string_view rest = text.substr(cut);
    if (!validate_command_name(name)) {
      throw CompileError(ErrorCode::InvalidName, "'" + std::string(name) + "' is not a valid command name", span);
    }
    auto ref = reservoir_.resolve(name);
    if (!ref) throw CompileError(ErrorCode::UnknownCommand, std::string(name), span);
    const CommandSpec& spec = reservoir_.entry(*ref).spec;

    CommandInvocation inv;
    inv.command = *ref;
    inv.name = spec.name;
    inv.span = span;

    if (kind == LineKind::block_open) {
      if (spec.blocks == BlockShape::none) {
        throw CompileError(ErrorCode::UnexpectedBlock, "'" + spec.name + "' takes no block", span);
      }
      if (!allow_blocks) {
        throw CompileError(ErrorCode::BlockInSingleCommand, "block-commands are only allowed in script files", span);
      }
      inv.raw_params = split_params(rest, spec.arity, span);
      const LogicalLine* close = nullptr;
      inv.blocks.push_back(block(span, close));
      bool two = spec.blocks == BlockShape::two_required || spec.blocks == BlockShape::two_optional;
      if (!close->keyword.empty()) {
        if (!two || !text::iequals(close->keyword, spec.keyword)) {
          throw CompileError(ErrorCode::UnexpectedSeparationKeyword,
                             "'" + close->keyword + "' does not belong to '" + spec.name + "'", close->span);
        }
        inv.blocks.push_back(block(close->span, close));
      } else if (two && cursor_ < unit_.lines.size() && unit_.lines[cursor_].kind == LineKind::block_open &&
                 text::iequals(text::trim(unit_.lines[cursor_].text), spec.keyword)) {
        const SourceSpan& kw_span = unit_.lines[cursor_].span;
        ++cursor_;
        inv.blocks.push_back(block(kw_span, close));
      } else if (spec.blocks == BlockShape::two_required) {
        throw CompileError(ErrorCode::MissingRequiredBlock, "'" + spec.name + "' needs a '" + spec.keyword + "' block",
                           span);
      }
      if (inv.blocks.size() == 2) {
        inv.separation_keyword_present = true;
        inv.keyword = spec.keyword;
        if (!close->keyword.empty()) {
          throw CompileError(ErrorCode::UnexpectedSeparationKeyword, "unexpected '" + close->keyword + "'",
                             close->span);
        }
      }
      return inv;
    }

    if (spec.blocks != BlockShape::none) {
      if (!spec.inline_form) {
        throw CompileError(ErrorCode::MissingRequiredBlock, "'" + spec.name + "' needs a block", span);
      }
      std::size_t fixed = spec.arity.max.value_or(spec.arity.min);
      auto params = split_params(rest, Arity::exactly(fixed + 1, true), span);
      std::string sub = std::move(params.back());
      params.pop_back();
      inv.raw_params = std::move(params);
      inv.blocks.push_back(Sequence{command_text(sub, span)});
      inv.inline_form = true;
      return inv;
    }

    inv.raw_params = split_params(rest, spec.arity, span);
    return inv;
  }

  /// Commands up to the matching `}`; `close` receives that line.
  Sequence block(const SourceSpan& opened, const LogicalLine*& close) {
    Sequence seq;
    while (cursor_ < unit_.lines.size()) {
      const LogicalLine& line = unit_.lines[cursor_];
      if (line.kind == LineKind::block_close) {
        ++cursor_;
        close = &line;
        return seq;
      }
      if (line.kind == LineKind::hash_directive) {
        throw CompileError(ErrorCode::UnterminatedBlock, "block opened at " + describe(opened) + " is not closed",
                           line.span);
      }
      seq.push_back(invocation(true));
    }
    throw CompileError(ErrorCode::UnterminatedBlock, "block opened at " + describe(opened) + " is not closed",
                       opened);
  }

  void definition(const LogicalLine& line, Program& prog, const std::string& module) {
    auto words = text::split_words(line.text);
    std::string head = text::lowercase(words[0]);
    auto malformed = [&](const std::string& why) {
      throw CompileError(ErrorCode::MalformedDirective, why + ": " + line.text, line.span);
    };
    if (head == "#function") {
      if (words.size() < 3) malformed("expected '#function NAME TYPE()'");
      std::string type = text::lowercase(words[2]);
      FunctionDef def;
      def.name = words[1];
      def.span = line.span;
      def.module = module;
      if (type == "private()") def.type = FunctionType::private_fn;
      else if (type == "public()") def.type = FunctionType::public_fn;
      else if (type == "operator()") def.type = FunctionType::operator_fn;
      else malformed("unknown function type '" + words[2] + "'");
      if (def.type == FunctionType::public_fn) {
        if (words.size() != 5 || words[3] != "<<") malformed("public() functions need '<< EVENT'");
        def.event_binding = words[4];
      } else if (words.size() != 3) {
        malformed("unexpected text after the function type");
      }
      check_unique(prog, def.name, line.span);
      def.body = body(def.name, line.span);
      def.span.last_line = cursor_ > 0 ? unit_.lines[cursor_ - 1].span.last_line : line.span.last_line;
      prog.functions.push_back(std::move(def));
    } else if (head == "#event") {
      if (words.size() != 3) malformed("expected '#event NAME single()|multi()'");
      EventDef def;
      def.name = words[1];
      def.span = line.span;
      def.module = module;
      std::string type = text::lowercase(words[2]);
      if (type == "single()") def.type = EventType::single;
      else if (type == "multi()") def.type = EventType::multi;
      else malformed("unknown event type '" + words[2] + "'");
      check_unique(prog, def.name, line.span);
      def.body = body(def.name, line.span);
      for (const auto& inv : def.body) {
        if (inv.name == "args") {
          def.declared_arg_names = inv.raw_params;
          break;
        }
      }
      prog.events.push_back(std::move(def));
    } else if (head == "#end") {
      malformed("'#end' without an open definition");
    } else {
      malformed("unknown directive");
    }
  }

  static void check_unique(const Program& prog, const std::string& name, const SourceSpan& span) {
    for (const auto& f : prog.functions) {
      if (f.name == name) throw CompileError(ErrorCode::RedefinedFunction, name, span);
    }
    for (const auto& e : prog.events) {
      if (e.name == name) throw CompileError(ErrorCode::RedefinedFunction, name, span);
    }
  }

  Sequence body(const std::string& name, const SourceSpan& opened) {
    Sequence seq;
    while (cursor_ < unit_.lines.size()) {
      const LogicalLine& line = unit_.lines[cursor_];
      if (line.kind == LineKind::hash_directive) {
        auto words = text::split_words(line.text);
        if (text::lowercase(words[0]) != "#end") {
          throw CompileError(ErrorCode::UnterminatedDefinition, "'" + name + "' has no '#end' before the next directive",
                             line.span);
        }
        if (words.size() != 2) {
          throw CompileError(ErrorCode::MalformedDirective, "expected '#end NAME': " + line.text, line.span);
        }
        if (words[1] != name) {
          throw CompileError(ErrorCode::EndNameMismatch, "'#end " + words[1] + "' closes '" + name + "'", line.span);
        }
        ++cursor_;
        return seq;
      }
      if (line.kind == LineKind::block_close) {
        throw CompileError(ErrorCode::UnexpectedBlockClose, "'}' without an open block", line.span);
      }
      seq.push_back(invocation(true));
    }
    throw CompileError(ErrorCode::UnterminatedDefinition, "'" + name + "' has no '#end'", opened);
  }

  const SourceUnit& unit_;
  const Reservoir& reservoir_;
  std::size_t cursor_ = 0;
};

}  // namespace detail

inline Program compile_script(const SourceUnit& unit, const Reservoir& reservoir, std::string module_name = {}) {
  return detail::Compiler(unit, reservoir).script(std::move(module_name));
}

/// Single commands and minimal-compiled (generated) text.
inline Program compile_single(const SourceUnit& unit, const Reservoir& reservoir) {
  return detail::Compiler(unit, reservoir).single();
}

}  // namespace t2script
