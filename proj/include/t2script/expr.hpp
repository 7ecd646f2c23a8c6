#pragma once

// Expressions inside parameter text.
//
//   $name  $@name  $_name  $=name[args]  $?[op arg arg ...]
//
// A name runs up to `[`, `]` or `.`; it may hold balanced parentheses. It
// also ends, without consuming anything, at white space, `;`, `{`, `}`, an
// unmatched `)` or the end of text. An index in brackets follows the name;
// a `.` right after the name or index is the terminator and is consumed.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/error.hpp"
#include "t2script/text.hpp"

namespace t2script {

enum class Modifier { none, local, constant, call, complex };

struct ExpressionNode;
struct OperatorCall;

struct Piece {
  std::string literal;
  std::shared_ptr<const ExpressionNode> expr;  // set for expression pieces
};

struct Segment {
  std::vector<Piece> pieces;

  bool has_expressions() const {
    for (const auto& p : pieces) {
      if (p.expr) return true;
    }
    return false;
  }
};

struct ExpressionNode {
  Modifier modifier = Modifier::none;
  std::string name;
  std::shared_ptr<const Segment> index;      // variables, constants, calls
  std::shared_ptr<const OperatorCall> call;  // complex expressions
  bool had_terminator = false;
};

/// Argument of an operator: a nested call in parentheses or a text segment.
struct Argument {
  std::shared_ptr<const OperatorCall> nested;
  Segment text;
};

struct OperatorCall {
  Argument op;
  std::vector<Argument> args;
};

inline bool is_modifier(char c) { return c == '@' || c == '_' || c == '=' || c == '?'; }

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view src) : s_(src) {}

  Segment whole() {
    Segment seg = segment(false);
    return seg;
  }

  /// Parses one expression at `pos_` (which holds `$`).
  std::shared_ptr<const ExpressionNode> expression() {
    auto node = std::make_shared<ExpressionNode>();
    ++pos_;  // '$'
    if (pos_ < s_.size() && is_modifier(s_[pos_])) {
      char m = s_[pos_++];
      node->modifier = m == '@' ? Modifier::local
                       : m == '_' ? Modifier::constant
                       : m == '=' ? Modifier::call
                                  : Modifier::complex;
      if (pos_ < s_.size() && is_modifier(s_[pos_]) && node->modifier != Modifier::complex) {
        fail(ErrorCode::MalformedExpression, "a name must not start with a modifier character");
      }
    }
    if (node->modifier == Modifier::complex) {
      if (pos_ >= s_.size() || s_[pos_] != '[') fail(ErrorCode::MalformedExpression, "'$?' needs an index");
      ++pos_;
      node->call = operator_call(']');
      expect_close(']');
    } else {
      node->name = name();
      if (node->name.empty()) fail(ErrorCode::EmptyName, "expression without a name");
      if (pos_ < s_.size() && s_[pos_] == '[') {
        ++pos_;
        node->index = std::make_shared<const Segment>(segment(true));
        expect_close(']');
      }
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      node->had_terminator = true;
    }
    return node;
  }

  std::size_t position() const { return pos_; }

 private:
  [[noreturn]] void fail(ErrorCode code, std::string_view why) const {
    throw ScriptError(code, std::string(why) + " in '" + std::string(s_) + "'");
  }

  void expect_close(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(ErrorCode::UnbalancedIndex, "missing ']'");
    ++pos_;
  }

  std::string name() {
    std::size_t start = pos_;
    int parens = 0;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '[' || c == ']' || c == '.') break;
      if (c == '(') {
        ++parens;
      } else if (c == ')') {
        if (parens == 0) break;
        --parens;
      } else if (parens == 0 && (text::is_white(c) || c == ';' || c == '{' || c == '}')) {
        break;
      }
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  /// Text with embedded expressions; inside an index it stops at the
  /// matching `]` (literal brackets must balance).
  Segment segment(bool in_index) {
    Segment seg;
    std::string lit;
    int depth = 0;
    auto flush = [&] {
      if (!lit.empty()) seg.pieces.push_back({std::move(lit), nullptr});
      lit.clear();
    };
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '$') {
        flush();
        seg.pieces.push_back({{}, expression()});
        continue;
      }
      if (in_index) {
        if (c == '[') ++depth;
        else if (c == ']') {
          if (depth == 0) break;
          --depth;
        }
      }
      lit += c;
      ++pos_;
    }
    flush();
    return seg;
  }

  void skip_white() {
    while (pos_ < s_.size() && text::is_white(s_[pos_])) ++pos_;
  }

  Argument argument() {
    Argument arg;
    if (s_[pos_] == '(') {
      ++pos_;
      arg.nested = operator_call(')');
      if (pos_ >= s_.size() || s_[pos_] != ')') fail(ErrorCode::MalformedExpression, "missing ')'");
      ++pos_;
      return arg;
    }
    std::string lit;
    int parens = 0;
    int brackets = 0;
    auto flush = [&] {
      if (!lit.empty()) arg.text.pieces.push_back({std::move(lit), nullptr});
      lit.clear();
    };
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '$') {
        flush();
        arg.text.pieces.push_back({{}, expression()});
        continue;
      }
      if (text::is_white(c) && parens == 0 && brackets == 0) break;
      if (c == '(') ++parens;
      else if (c == ')') {
        if (parens == 0) break;
        --parens;
      } else if (c == '[') ++brackets;
      else if (c == ']') {
        if (brackets == 0) break;
        --brackets;
      }
      lit += c;
      ++pos_;
    }
    flush();
    return arg;
  }

  std::shared_ptr<const OperatorCall> operator_call(char closer) {
    auto call = std::make_shared<OperatorCall>();
    skip_white();
    if (pos_ >= s_.size() || s_[pos_] == closer) fail(ErrorCode::MalformedExpression, "empty operator call");
    call->op = argument();
    while (true) {
      skip_white();
      if (pos_ >= s_.size() || s_[pos_] == closer) break;
      if (s_[pos_] == ']' || s_[pos_] == ')') fail(ErrorCode::MalformedExpression, "unbalanced parentheses");
      call->args.push_back(argument());
    }
    return call;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a whole parameter text into literal and expression pieces.
inline Segment parse_segment(std::string_view text) {
  detail::ExpressionParser p(text);
  return p.whole();
}

/// Parses the single expression starting at `start` (which must hold `$`).
inline std::pair<std::shared_ptr<const ExpressionNode>, std::size_t> parse_expression(std::string_view text,
                                                                                      std::size_t start) {
  detail::ExpressionParser p(text.substr(start));
  auto node = p.expression();
  return {node, start + p.position()};
}

/// What the evaluator needs from the VM.
class EvalHost {
 public:
  virtual ~EvalHost() = default;
  /// `name` carries a leading `@` for locals.
  virtual Value read_variable(std::string_view name, const std::optional<Value>& index) = 0;
  virtual Value read_constant(std::string_view name) = 0;
  virtual bool has_function(std::string_view name) = 0;
  virtual Value call_function(std::string_view name, std::vector<Value> args) = 0;
  virtual void assign(std::string_view name, const Value& value) = 0;
  virtual bool exists(std::string_view name) = 0;
  /// Runs `command` as a single command; returns its error text, empty on success.
  virtual std::string execute_command(std::string_view command) = 0;
};

}  // namespace t2script
