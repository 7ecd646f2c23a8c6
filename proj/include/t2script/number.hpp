#pragma once

// Numeric interpretation of text values.
//
// Integers are arbitrary precision: `[+-]?[0-9]+`.
// Decimals are IEEE doubles written `[+-]?(d+[.d*]|.d+)([eE][+-]?d+)?` and
// rendered with at most 15 significant digits, no trailing zeros, and
// positional notation for decimal exponents in [-7, 21).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "t2script/error.hpp"
#include "t2script/text.hpp"

namespace t2script {

using BigInt = boost::multiprecision::cpp_int;

namespace number {

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

inline bool is_integer_text(std::string_view s) noexcept {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_digit(c)) return false;
  }
  return true;
}

inline bool is_decimal_text(std::string_view s) noexcept {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t int_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

inline std::optional<BigInt> parse_integer(std::string_view s) {
  if (!is_integer_text(s)) return std::nullopt;
  bool negative = s.front() == '-';
  if (s.front() == '+' || s.front() == '-') s.remove_prefix(1);
  BigInt value(std::string{s});
  return negative ? BigInt(-value) : value;
}

inline std::optional<std::int64_t> parse_int64(std::string_view s) {
  if (!is_integer_text(s)) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_decimal(std::string_view s) {
  if (!is_decimal_text(s)) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  // from_chars rejects a bare leading '.', so pad it.
  std::string buf;
  if (s.front() == '.' || (s.size() > 1 && s.front() == '-' && s[1] == '.')) {
    buf = std::string(s);
    buf.insert(buf.front() == '-' ? 1 : 0, "0");
    s = buf;
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) {
    throw ScriptError(ErrorCode::ValueOutOfRange, s);
  }
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline BigInt require_integer(std::string_view s) {
  if (auto v = parse_integer(s)) return *v;
  throw ScriptError(ErrorCode::NonNumericArgument, "'" + std::string(s) + "' is not an integer");
}

inline double require_decimal(std::string_view s) {
  if (auto v = parse_decimal(s)) return *v;
  throw ScriptError(ErrorCode::NonNumericArgument, "'" + std::string(s) + "' is not a number");
}

inline std::string format_integer(const BigInt& v) { return v.str(); }

inline std::string format_float(double v) {
  if (!std::isfinite(v)) throw ScriptError(ErrorCode::ValueOutOfRange, "result is not finite");
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", v);
  std::string_view rep(buf);
  bool negative = rep.front() == '-';
  if (negative) rep.remove_prefix(1);
  std::string digits;
  digits += rep[0];
  std::size_t epos = rep.find('e');
  digits += std::string(rep.substr(2, epos - 2));
  int exponent = std::stoi(std::string(rep.substr(epos + 1)));
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out;
  if (negative) out += '-';
  if (exponent >= 21 || exponent < -7) {
    out += digits[0];
    if (digits.size() > 1) {
      out += '.';
      out += digits.substr(1);
    }
    out += exponent < 0 ? "e-" : "e+";
    out += std::to_string(std::abs(exponent));
  } else if (exponent < 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-exponent - 1), '0');
    out += digits;
  } else {
    auto int_len = static_cast<std::size_t>(exponent) + 1;
    if (digits.size() <= int_len) {
      out += digits;
      out.append(int_len - digits.size(), '0');
    } else {
      out += digits.substr(0, int_len);
      out += '.';
      out += digits.substr(int_len);
    }
  }
  return out;
}

inline std::string format_bool(bool b) { return b ? "1" : "0"; }

}  // namespace number

/// `0` is false; everything else, including the empty text, is true.
inline bool truthy(std::string_view v) noexcept { return !(v.size() == 1 && v[0] == '0'); }

}  // namespace t2script
