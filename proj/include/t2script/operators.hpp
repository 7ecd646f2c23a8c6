#pragma once

// The built-in operator library used by complex expressions.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/regex.hpp>

#include "t2script/error.hpp"
#include "t2script/expr.hpp"
#include "t2script/number.hpp"
#include "t2script/text.hpp"

namespace t2script {

using Args = std::span<const Value>;
using OperatorFn = std::function<Value(Args, EvalHost*)>;

namespace ops {

inline void need(std::string_view op, Args a, std::size_t lo, std::size_t hi) {
  if (a.size() >= lo && a.size() <= hi) return;
  std::string want = lo == hi ? std::to_string(lo)
                     : hi == std::numeric_limits<std::size_t>::max() ? "at least " + std::to_string(lo)
                                                                      : std::to_string(lo) + ".." + std::to_string(hi);
  throw ScriptError(ErrorCode::WrongArgumentCount,
                    "'" + std::string(op) + "' takes " + want + " argument(s), got " + std::to_string(a.size()));
}

inline constexpr std::size_t kMany = std::numeric_limits<std::size_t>::max();

inline std::string fmt(const BigInt& v) { return number::format_integer(v); }
inline std::string fmt(double v) { return number::format_float(v); }
inline std::string fmt_bool(bool b) { return number::format_bool(b); }

inline BigInt to_int(std::string_view s) { return number::require_integer(s); }
inline double to_dec(std::string_view s) { return number::require_decimal(s); }

inline std::int64_t to_small(std::string_view s, std::int64_t lo, std::int64_t hi) {
  auto v = number::parse_int64(s);
  if (!v) {
    if (number::is_integer_text(s)) throw ScriptError(ErrorCode::ValueOutOfRange, std::string(s));
    throw ScriptError(ErrorCode::NonNumericArgument, "'" + std::string(s) + "' is not an integer");
  }
  if (*v < lo || *v > hi) throw ScriptError(ErrorCode::ValueOutOfRange, std::string(s));
  return *v;
}

template <class F>
Value int_fold(std::string_view op, Args a, F f) {
  need(op, a, 2, kMany);
  BigInt acc = to_int(a[0]);
  for (std::size_t i = 1; i < a.size(); ++i) acc = f(acc, to_int(a[i]));
  return fmt(acc);
}

template <class F>
Value dec_fold(std::string_view op, Args a, F f) {
  need(op, a, 2, kMany);
  double acc = to_dec(a[0]);
  for (std::size_t i = 1; i < a.size(); ++i) acc = f(acc, to_dec(a[i]));
  return fmt(acc);
}

inline void nonzero(const BigInt& v) {
  if (v == 0) throw ScriptError(ErrorCode::DivisionByZero, "division by zero");
}

/// Three-way comparison: numerically when both sides are numbers,
/// otherwise by bytes.
inline int compare(std::string_view a, std::string_view b) {
  if (number::is_integer_text(a) && number::is_integer_text(b)) {
    BigInt x = *number::parse_integer(a), y = *number::parse_integer(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (number::is_decimal_text(a) && number::is_decimal_text(b)) {
    double x = to_dec(a), y = to_dec(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

inline int compare_ic(std::string_view a, std::string_view b) {
  if (number::is_decimal_text(a) && number::is_decimal_text(b)) return compare(a, b);
  return compare(text::lowercase(a), text::lowercase(b));
}

inline boost::regex make_regex(const std::string& pattern) {
  try {
    return boost::regex(pattern, boost::regex::perl | boost::regex::no_mod_s);
  } catch (const boost::regex_error& e) {
    throw ScriptError(ErrorCode::BadRegex, "'" + pattern + "': " + e.what());
  }
}

inline std::size_t index_arg(std::string_view s) {
  return static_cast<std::size_t>(to_small(s, 0, std::numeric_limits<std::int64_t>::max()));
}

inline Value round_like(Args a, double (*f)(double)) {
  if (number::is_integer_text(a[0])) return fmt(to_int(a[0]));
  return fmt(f(to_dec(a[0])));
}

inline Value power(Args a) {
  if (number::is_integer_text(a[0]) && number::is_integer_text(a[1]) && a[1].front() != '-') {
    BigInt base = to_int(a[0]);
    std::int64_t e = to_small(a[1], 0, 1'000'000);
    // refuse results beyond roughly a million bits
    if (base != 0 && base != 1 && base != -1) {
      auto bits = static_cast<double>(boost::multiprecision::msb(abs(base)) + 1) * static_cast<double>(e);
      if (bits > 1'000'000) throw ScriptError(ErrorCode::ValueOutOfRange, "power result too large");
    }
    return fmt(boost::multiprecision::pow(base, static_cast<unsigned>(e)));
  }
  double b = to_dec(a[0]), e = to_dec(a[1]);
  if (b == 0 && e < 0) throw ScriptError(ErrorCode::DivisionByZero, "zero to a negative power");
  double r = std::pow(b, e);
  if (std::isnan(r)) throw ScriptError(ErrorCode::DomainError, "'** " + a[0] + " " + a[1] + "' is undefined");
  return fmt(r);
}

inline Value to_hex(const BigInt& v) {
  if (v == 0) return "0";
  BigInt m = v < 0 ? BigInt(-v) : v;
  std::string out;
  static constexpr char digits[] = "0123456789abcdef";
  while (m > 0) {
    out += digits[static_cast<int>(m & 15)];
    m >>= 4;
  }
  if (v < 0) out += '-';
  return std::string(out.rbegin(), out.rend());
}

inline std::int64_t shift_count(std::string_view s) { return to_small(s, 0, 1 << 20); }

inline Value min_max(std::string_view op, Args a, bool want_max) {
  need(op, a, 1, kMany);
  std::size_t best = 0;
  to_dec(a[0]);
  for (std::size_t i = 1; i < a.size(); ++i) {
    to_dec(a[i]);
    int c = compare(a[i], a[best]);
    if (want_max ? c > 0 : c < 0) best = i;
  }
  return a[best];
}

inline std::unordered_map<std::string, OperatorFn> build_table() {
  std::unordered_map<std::string, OperatorFn> t;
  auto alias = [&](std::initializer_list<const char*> names, OperatorFn f) {
    for (const char* n : names) t.emplace(n, f);
  };

  // 1. basic arithmetic
  t["+"] = [](Args a, EvalHost*) { return int_fold("+", a, [](const BigInt& x, const BigInt& y) { return BigInt(x + y); }); };
  t["*"] = [](Args a, EvalHost*) { return int_fold("*", a, [](const BigInt& x, const BigInt& y) { return BigInt(x * y); }); };
  t["-"] = [](Args a, EvalHost*) {
    need("-", a, 2, 2);
    return fmt(BigInt(to_int(a[0]) - to_int(a[1])));
  };
  t["/"] = [](Args a, EvalHost*) {
    need("/", a, 2, 2);
    BigInt d = to_int(a[1]);
    nonzero(d);
    return fmt(BigInt(to_int(a[0]) / d));
  };
  t["+."] = [](Args a, EvalHost*) { return dec_fold("+.", a, [](double x, double y) { return x + y; }); };
  t["*."] = [](Args a, EvalHost*) { return dec_fold("*.", a, [](double x, double y) { return x * y; }); };
  t["-."] = [](Args a, EvalHost*) {
    need("-.", a, 2, 2);
    return fmt(to_dec(a[0]) - to_dec(a[1]));
  };
  t["/."] = [](Args a, EvalHost*) {
    need("/.", a, 2, 2);
    double d = to_dec(a[1]);
    if (d == 0) throw ScriptError(ErrorCode::DivisionByZero, "division by zero");
    return fmt(to_dec(a[0]) / d);
  };

  // 2. other arithmetic
  t["%"] = [](Args a, EvalHost*) {
    need("%", a, 2, 2);
    BigInt d = to_int(a[1]);
    nonzero(d);
    return fmt(BigInt(to_int(a[0]) % d));
  };
  t["**"] = [](Args a, EvalHost*) {
    need("**", a, 2, 2);
    return power(a);
  };
  t["sqrt"] = [](Args a, EvalHost*) {
    need("sqrt", a, 1, 1);
    double x = to_dec(a[0]);
    if (x < 0) throw ScriptError(ErrorCode::DomainError, "sqrt of a negative number");
    return fmt(std::sqrt(x));
  };
  t["ln"] = [](Args a, EvalHost*) {
    need("ln", a, 1, 1);
    double x = to_dec(a[0]);
    if (x <= 0) throw ScriptError(ErrorCode::DomainError, "ln of a non-positive number");
    return fmt(std::log(x));
  };
  t["logn"] = [](Args a, EvalHost*) {
    need("logn", a, 2, 2);
    double base = to_dec(a[0]), x = to_dec(a[1]);
    if (base <= 0 || base == 1 || x <= 0) throw ScriptError(ErrorCode::DomainError, "logn " + a[0] + " " + a[1]);
    return fmt(std::log(x) / std::log(base));
  };
  t["exp"] = [](Args a, EvalHost*) {
    need("exp", a, 1, 1);
    return fmt(std::exp(to_dec(a[0])));
  };
  t["abs"] = [](Args a, EvalHost*) {
    need("abs", a, 1, 1);
    if (number::is_integer_text(a[0])) return fmt(BigInt(abs(to_int(a[0]))));
    return fmt(std::fabs(to_dec(a[0])));
  };
  t["min"] = [](Args a, EvalHost*) { return min_max("min", a, false); };
  t["max"] = [](Args a, EvalHost*) { return min_max("max", a, true); };
  t["tohex"] = [](Args a, EvalHost*) {
    need("tohex", a, 1, 1);
    return to_hex(to_int(a[0]));
  };

  // 3. bitwise
  t["~"] = [](Args a, EvalHost*) {
    need("~", a, 1, 1);
    return fmt(BigInt(~to_int(a[0])));
  };
  t["&"] = [](Args a, EvalHost*) { return int_fold("&", a, [](const BigInt& x, const BigInt& y) { return BigInt(x & y); }); };
  t["|"] = [](Args a, EvalHost*) { return int_fold("|", a, [](const BigInt& x, const BigInt& y) { return BigInt(x | y); }); };
  t["^"] = [](Args a, EvalHost*) { return int_fold("^", a, [](const BigInt& x, const BigInt& y) { return BigInt(x ^ y); }); };
  t["<<"] = [](Args a, EvalHost*) {
    need("<<", a, 2, 2);
    return fmt(BigInt(to_int(a[0]) << static_cast<unsigned>(shift_count(a[1]))));
  };
  t[">>"] = [](Args a, EvalHost*) {
    need(">>", a, 2, 2);
    return fmt(BigInt(to_int(a[0]) >> static_cast<unsigned>(shift_count(a[1]))));
  };

  // 4. rounding
  t["round"] = [](Args a, EvalHost*) {
    need("round", a, 1, 1);
    return round_like(a, [](double x) { return std::round(x); });
  };
  t["ceil"] = [](Args a, EvalHost*) {
    need("ceil", a, 1, 1);
    return round_like(a, [](double x) { return std::ceil(x); });
  };
  t["floor"] = [](Args a, EvalHost*) {
    need("floor", a, 1, 1);
    return round_like(a, [](double x) { return std::floor(x); });
  };
  t["roundto"] = [](Args a, EvalHost*) {
    need("roundto", a, 2, 2);
    auto places = static_cast<int>(to_small(a[0], -15, 15));
    double x = to_dec(a[1]);
    double scale = std::pow(10.0, places);
    return fmt(std::round(x * scale) / scale);
  };

  // 5. logical
  alias({"!", "not"}, [](Args a, EvalHost*) {
    need("not", a, 1, 1);
    return fmt_bool(!truthy(a[0]));
  });
  alias({"?|", "or"}, [](Args a, EvalHost*) {
    need("or", a, 1, kMany);
    bool r = false;
    for (const auto& v : a) r = r || truthy(v);
    return fmt_bool(r);
  });
  alias({"?&", "and"}, [](Args a, EvalHost*) {
    need("and", a, 1, kMany);
    bool r = true;
    for (const auto& v : a) r = r && truthy(v);
    return fmt_bool(r);
  });

  // 6. relational
  auto rel = [&](std::initializer_list<const char*> names, bool (*pred)(int), bool ic) {
    std::string label = *names.begin();
    alias(names, [pred, ic, label](Args a, EvalHost*) {
      need(label, a, 2, 2);
      return fmt_bool(pred(ic ? compare_ic(a[0], a[1]) : compare(a[0], a[1])));
    });
  };
  rel({"==", "eq"}, [](int c) { return c == 0; }, false);
  rel({"!=", "ne"}, [](int c) { return c != 0; }, false);
  rel({"<=", "le"}, [](int c) { return c <= 0; }, false);
  rel({">=", "ge"}, [](int c) { return c >= 0; }, false);
  rel({"<", "lt"}, [](int c) { return c < 0; }, false);
  rel({">", "gt"}, [](int c) { return c > 0; }, false);
  rel({":==", "eqic"}, [](int c) { return c == 0; }, true);
  rel({":!=", "neic"}, [](int c) { return c != 0; }, true);
  t["comp"] = [](Args a, EvalHost*) {
    need("comp", a, 2, 2);
    return std::to_string(compare(a[0], a[1]));
  };
  t["=~"] = [](Args a, EvalHost*) {
    need("=~", a, 2, 2);
    return fmt_bool(boost::regex_search(a[1], make_regex(a[0])));
  };
  t["=~~"] = [](Args a, EvalHost*) {
    need("=~~", a, 2, 2);
    boost::smatch m;
    if (boost::regex_search(a[1], m, make_regex(a[0]))) return Value(m[0].str());
    return Value();
  };

  // 7. strings
  alias({":+", "concat"}, [](Args a, EvalHost*) {
    need("concat", a, 1, kMany);
    Value out;
    for (const auto& v : a) out += v;
    return out;
  });
  t["empty?"] = [](Args a, EvalHost*) {
    need("empty?", a, 1, 1);
    return fmt_bool(a[0].empty());
  };
  t["len"] = [](Args a, EvalHost*) {
    need("len", a, 1, 1);
    return std::to_string(text::length(a[0]));
  };
  t["num?"] = [](Args a, EvalHost*) {
    need("num?", a, 1, 1);
    return fmt_bool(number::is_integer_text(a[0]));
  };
  t["float?"] = [](Args a, EvalHost*) {
    need("float?", a, 1, 1);
    return fmt_bool(number::is_decimal_text(a[0]));
  };
  t["substr"] = [](Args a, EvalHost*) {
    need("substr", a, 2, 3);
    std::u32string s = text::to_u32(a[0]);
    std::size_t start = index_arg(a[1]);
    if (start > s.size()) throw ScriptError(ErrorCode::IndexOutOfRange, "substr start " + a[1]);
    std::size_t len = a.size() == 3 ? index_arg(a[2]) : s.size();
    return text::to_utf8(std::u32string_view(s).substr(start, len));
  };
  auto find = [](Args a, bool ic) {
    std::u32string needle = text::to_u32(ic ? text::lowercase(a[0]) : a[0]);
    std::u32string hay = text::to_u32(ic ? text::lowercase(a[1]) : a[1]);
    auto pos = hay.find(needle);
    return pos == std::u32string::npos ? std::string("-1") : std::to_string(pos);
  };
  t["strpos"] = [find](Args a, EvalHost*) {
    need("strpos", a, 2, 2);
    return find(a, false);
  };
  t["strposic"] = [find](Args a, EvalHost*) {
    need("strposic", a, 2, 2);
    return find(a, true);
  };
  t["word"] = [](Args a, EvalHost*) {
    need("word", a, 2, 2);
    std::size_t n = index_arg(a[0]);
    auto words = text::split_words(a[1]);
    if (n >= words.size()) throw ScriptError(ErrorCode::IndexOutOfRange, "word " + a[0]);
    return words[n];
  };
  t["char"] = [](Args a, EvalHost*) {
    need("char", a, 2, 2);
    std::size_t n = index_arg(a[0]);
    std::u32string s = text::to_u32(a[1]);
    if (n >= s.size()) throw ScriptError(ErrorCode::IndexOutOfRange, "char " + a[0]);
    return text::to_utf8(std::u32string(1, s[n]));
  };
  t["upcase"] = [](Args a, EvalHost*) {
    need("upcase", a, 1, 1);
    return text::uppercase(a[0]);
  };
  t["downcase"] = [](Args a, EvalHost*) {
    need("downcase", a, 1, 1);
    return text::lowercase(a[0]);
  };

  // 8. advanced
  t["="] = [](Args a, EvalHost* host) {
    need("=", a, 2, 2);
    if (a[0].empty() || a[0] == "@") throw ScriptError(ErrorCode::EmptyName, "'=' needs a variable name");
    if (host) host->assign(a[0], a[1]);
    return a[1];
  };
  t["exists?"] = [](Args a, EvalHost* host) {
    need("exists?", a, 1, 1);
    return fmt_bool(host && host->exists(a[0]));
  };
  t["!!"] = [](Args a, EvalHost* host) {
    need("!!", a, 1, kMany);
    std::string command;
    for (const auto& v : a) {
      if (!command.empty()) command += ' ';
      command += v;
    }
    return host ? host->execute_command(command) : Value();
  };
  for (const char* name : {"@@", "??"}) {
    std::string n = name;
    t[n] = [n](Args, EvalHost*) -> Value {
      throw ScriptError(ErrorCode::UnimplementedOperator, "'" + n + "' has no defined semantics");
    };
  }
  return t;
}

}  // namespace ops

inline const OperatorFn* find_operator(std::string_view name) {
  static const auto table = ops::build_table();
  auto it = table.find(std::string(name));
  return it == table.end() ? nullptr : &it->second;
}

/// Built-in operators only; nullopt when `name` is not one of them.
inline std::optional<Value> apply_operator(std::string_view name, Args args, EvalHost* host = nullptr) {
  if (const OperatorFn* f = find_operator(name)) return (*f)(args, host);
  return std::nullopt;
}

/// Evaluates parsed expressions against a host.
class Evaluator {
 public:
  explicit Evaluator(EvalHost& host) : host_(host) {}

  Value interpolate(std::string_view raw) {
    if (raw.find('$') == std::string_view::npos) return Value(raw);
    return evaluate(parse_segment(raw));
  }

  Value evaluate(const Segment& seg) {
    Value out;
    for (const auto& p : seg.pieces) out += p.expr ? evaluate(*p.expr) : p.literal;
    return out;
  }

  Value evaluate(const ExpressionNode& node) {
    std::optional<Value> index;
    if (node.index) index = evaluate(*node.index);
    switch (node.modifier) {
      case Modifier::none:
        return host_.read_variable(node.name, index);
      case Modifier::local:
        return host_.read_variable("@" + node.name, index);
      case Modifier::constant:
        return host_.read_constant(node.name);
      case Modifier::call: {
        std::vector<Value> args;
        if (index) args = text::split_words(*index);
        return host_.call_function(node.name, std::move(args));
      }
      case Modifier::complex:
        return evaluate(*node.call);
    }
    return {};
  }

  Value evaluate(const OperatorCall& call) {
    Value op = evaluate(call.op);
    std::vector<Value> args;
    args.reserve(call.args.size());
    for (const auto& a : call.args) args.push_back(evaluate(a));
    if (const OperatorFn* f = find_operator(op)) return (*f)(args, &host_);
    if (host_.has_function(op)) return host_.call_function(op, std::move(args));
    throw ScriptError(ErrorCode::UnknownOperator, op);
  }

  Value evaluate(const Argument& arg) { return arg.nested ? evaluate(*arg.nested) : evaluate(arg.text); }

 private:
  EvalHost& host_;
};

}  // namespace t2script
