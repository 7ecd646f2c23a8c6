#pragma once

// UTF-8 handling and the small string helpers shared by the reader,
// compiler and operator library.

#include <cstdint>
#include <locale>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t2script {

/// All values are Unicode text stored as UTF-8. Meaning (number, boolean)
/// is assigned by whoever consumes the value.
using Value = std::string;

namespace text {

inline bool is_blank(char c) noexcept { return c == ' ' || c == '\t'; }
inline bool is_white(char c) noexcept { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline std::string_view ltrim(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size() && is_white(s[i])) ++i;
  return s.substr(i);
}

inline std::string_view rtrim(std::string_view s) noexcept {
  std::size_t n = s.size();
  while (n > 0 && is_white(s[n - 1])) --n;
  return s.substr(0, n);
}

inline std::string_view trim(std::string_view s) noexcept { return rtrim(ltrim(s)); }

/// Splits on runs of spaces/tabs; empty input yields no words.
inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_white(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_white(s[i])) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

inline bool valid_code_point(std::uint32_t cp) noexcept {
  return cp <= 0x10FFFF && (cp < 0xD800 || cp > 0xDFFF);
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Strict decoder; nullopt on any malformed sequence.
inline std::optional<std::u32string> decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      return std::nullopt;
    }
    if (i + len > s.size()) return std::nullopt;
    for (std::size_t k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong forms
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) {
      return std::nullopt;
    }
    if (!valid_code_point(cp)) return std::nullopt;
    out += static_cast<char32_t>(cp);
    i += len;
  }
  return out;
}

/// Lossy decoder used on values: malformed bytes map to U+FFFD.
inline std::u32string to_u32(std::string_view s) {
  if (auto ok = decode_utf8(s)) return *ok;
  std::u32string out;
  for (char c : s) {
    auto b = static_cast<unsigned char>(c);
    out += b < 0x80 ? static_cast<char32_t>(b) : U'\uFFFD';
  }
  return out;
}

inline std::string to_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append_utf8(out, static_cast<std::uint32_t>(c));
  return out;
}

namespace detail {
inline const std::ctype<wchar_t>* unicode_ctype() {
  static const std::locale loc = [] {
    try {
      return std::locale("C.UTF-8");
    } catch (const std::runtime_error&) {
      return std::locale::classic();
    }
  }();
  return &std::use_facet<std::ctype<wchar_t>>(loc);
}
}  // namespace detail

inline char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 32 : c;
  return static_cast<char32_t>(detail::unicode_ctype()->tolower(static_cast<wchar_t>(c)));
}

inline char32_t to_upper(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') ? c - 32 : c;
  return static_cast<char32_t>(detail::unicode_ctype()->toupper(static_cast<wchar_t>(c)));
}

inline std::string lowercase(std::string_view s) {
  bool ascii = true;
  for (char c : s) ascii = ascii && static_cast<unsigned char>(c) < 0x80;
  if (ascii) {
    std::string out(s);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
  }
  std::u32string u = to_u32(s);
  for (char32_t& c : u) c = to_lower(c);
  return to_utf8(u);
}

inline std::string uppercase(std::string_view s) {
  std::u32string u = to_u32(s);
  for (char32_t& c : u) c = to_upper(c);
  return to_utf8(u);
}

inline bool iequals(std::string_view a, std::string_view b) { return lowercase(a) == lowercase(b); }

inline std::size_t length(std::string_view s) { return to_u32(s).size(); }

}  // namespace text
}  // namespace t2script
