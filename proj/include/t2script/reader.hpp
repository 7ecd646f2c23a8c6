#pragma once

// Turns raw script text into logical lines.
//
// Physical lines are joined with a single space until a `;` at bracket depth
// zero ends the logical line; a trailing acute (`) suppresses the space.
// Lines whose first non-white characters are `//` are dropped. Lines starting
// with `#` are directives and must not end with `;`. A `{` followed by white
// space or the line end opens a block; a `}` at the start of a segment (or
// after white space) closes one, optionally followed by `KEYWORD {` which
// opens a second block.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/error.hpp"
#include "t2script/text.hpp"

namespace t2script {

enum class LineKind { command, hash_directive, block_open, block_close };

enum class SourceOrigin { script_file, single_command, meta_generated };

struct LogicalLine {
  std::string text;
  LineKind kind = LineKind::command;
  SourceSpan span;
  /// Separation keyword that followed a `}` on the same line (block_close only).
  std::string keyword;
};

struct LintNote {
  SourceSpan span;
  std::string message;
};

struct SourceUnit {
  SourceOrigin origin = SourceOrigin::script_file;
  std::vector<LogicalLine> lines;
  /// Style findings (command closed without `;`); never fatal.
  std::vector<LintNote> notes;
};

/// Accepts UTF-8 (BOM optional) and UTF-16 LE/BE with BOM; returns UTF-8.
inline std::string decode_source(std::string_view bytes) {
  auto starts = [&](std::string_view bom) { return bytes.substr(0, bom.size()) == bom; };
  if (starts("\xEF\xBB\xBF")) bytes.remove_prefix(3);
  else if (starts("\xFF\xFE") || starts("\xFE\xFF")) {
    bool little = bytes[0] == '\xFF';
    bytes.remove_prefix(2);
    if (bytes.size() % 2 != 0) throw ReadError(ErrorCode::InvalidEncoding, "odd UTF-16 byte count", {});
    std::string out;
    for (std::size_t i = 0; i < bytes.size(); i += 2) {
      auto lo = static_cast<unsigned char>(bytes[i]);
      auto hi = static_cast<unsigned char>(bytes[i + 1]);
      std::uint32_t unit = little ? (hi << 8 | lo) : (lo << 8 | hi);
      if (unit >= 0xD800 && unit <= 0xDBFF) {
        if (i + 3 >= bytes.size()) throw ReadError(ErrorCode::InvalidEncoding, "truncated surrogate pair", {});
        auto lo2 = static_cast<unsigned char>(bytes[i + 2]);
        auto hi2 = static_cast<unsigned char>(bytes[i + 3]);
        std::uint32_t low = little ? (hi2 << 8 | lo2) : (lo2 << 8 | hi2);
        if (low < 0xDC00 || low > 0xDFFF) throw ReadError(ErrorCode::InvalidEncoding, "unpaired surrogate", {});
        unit = 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00);
        i += 2;
      } else if (unit >= 0xDC00 && unit <= 0xDFFF) {
        throw ReadError(ErrorCode::InvalidEncoding, "unpaired surrogate", {});
      }
      text::append_utf8(out, unit);
    }
    return out;
  }
  if (!text::decode_utf8(bytes)) throw ReadError(ErrorCode::InvalidEncoding, "input is not valid UTF-8", {});
  return std::string(bytes);
}

namespace detail {

class LineAssembler {
 public:
  LineAssembler(SourceOrigin origin, std::string file) : file_(std::move(file)) {
    unit_.origin = origin;
    split_on_semicolon_ = origin != SourceOrigin::single_command;
  }

  void physical_line(std::string_view line, std::size_t number) {
    line_no_ = number;
    std::string_view body = text::ltrim(line);
    if (body.substr(0, 2) == "//") return;
    if (!body.empty() && body.front() == '#' && depth_ == 0) {
      flush_command(LineKind::command, false);
      std::string_view directive = text::rtrim(body);
      if (directive.back() == ';') {
        throw ReadError(ErrorCode::HashLineSemicolon, std::string(directive), span(number, number));
      }
      emit(std::string(directive), LineKind::hash_directive, number, number);
      return;
    }
    scan(line);
    // end of physical line: decide how the fragment joins the next one
    if (!pending_.empty()) {
      std::string_view kept = text::rtrim(pending_);
      pending_.resize(kept.size());
      if (!pending_.empty() && pending_.back() == '`') {
        pending_.pop_back();
        join_ = Join::none;
      } else {
        join_ = Join::space;
      }
    }
  }

  SourceUnit finish() {
    flush_command(LineKind::command, /*terminated=*/false);
    return std::move(unit_);
  }

 private:
  enum class Join { fresh, none, space };

  SourceSpan span(std::size_t first, std::size_t last) const { return {file_, first, last}; }

  void emit(std::string text, LineKind kind, std::size_t first, std::size_t last) {
    unit_.lines.push_back(LogicalLine{std::move(text), kind, span(first, last), {}});
  }

  void append(char c) {
    if (pending_.empty()) {
      if (text::is_white(c)) return;
      pending_first_ = line_no_;
    } else if (join_ != Join::fresh) {
      if (text::is_white(c)) return;  // leading white of a continuation line
      if (join_ == Join::space) pending_ += ' ';
      join_ = Join::fresh;
    }
    pending_ += c;
  }

  void flush_command(LineKind kind, bool terminated) {
    std::string t(text::rtrim(pending_));
    if (!t.empty()) {
      if (!terminated && kind == LineKind::command && unit_.origin == SourceOrigin::script_file) {
        unit_.notes.push_back({span(pending_first_, line_no_), "command not terminated with ';'"});
      }
      emit(std::move(t), kind, pending_first_, line_no_);
    } else if (kind == LineKind::block_open) {
      throw ReadError(ErrorCode::UnexpectedBlock, "'{' without a command", span(line_no_, line_no_));
    }
    pending_.clear();
    join_ = Join::fresh;
    depth_ = 0;
  }

  void scan(std::string_view line) {
    bool segment_start = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (segment_start && text::is_white(c)) {
        append(c);
        continue;
      }
      bool at_segment_start = segment_start;
      segment_start = false;
      if (depth_ == 0) {
        if (c == ';' && split_on_semicolon_) {
          flush_command(LineKind::command, true);
          segment_start = true;
          continue;
        }
        bool after_white = i == 0 || text::is_white(line[i - 1]);
        if (c == '{' && (i + 1 == line.size() || text::is_white(line[i + 1]))) {
          open_block();
          segment_start = true;
          continue;
        }
        if (c == '}' && (at_segment_start || after_white)) {
          flush_command(LineKind::command, false);
          emit("}", LineKind::block_close, line_no_, line_no_);
          close_line_ = line_no_;
          segment_start = true;
          continue;
        }
      }
      if (c == '[') ++depth_;
      else if (c == ']' && depth_ > 0) --depth_;
      append(c);
    }
  }

  void open_block() {
    std::string word(text::trim(pending_));
    bool keyword_after_close = !unit_.lines.empty() && unit_.lines.back().kind == LineKind::block_close &&
                               unit_.lines.back().keyword.empty() && close_line_ == line_no_ &&
                               !word.empty() && word.find_first_of(" \t") == std::string::npos;
    if (keyword_after_close) {
      unit_.lines.back().keyword = word;
      pending_.clear();
      join_ = Join::fresh;
      return;
    }
    flush_command(LineKind::block_open, true);
  }

  SourceUnit unit_;
  std::string file_;
  std::string pending_;
  std::size_t pending_first_ = 0;
  std::size_t line_no_ = 0;
  std::size_t close_line_ = 0;
  int depth_ = 0;
  Join join_ = Join::fresh;
  bool split_on_semicolon_ = true;
};

}  // namespace detail

/// `raw` must already be UTF-8 (see decode_source).
inline SourceUnit read_source(std::string_view raw, SourceOrigin origin, std::string file = "<input>") {
  if (origin == SourceOrigin::single_command) {
    // trailing separators typed at a prompt are ignored
    std::string_view t = text::rtrim(raw);
    while (!t.empty() && t.back() == ';') t = text::rtrim(t.substr(0, t.size() - 1));
    raw = t;
  }
  detail::LineAssembler assembler(origin, std::move(file));
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::string_view line = raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    assembler.physical_line(line, ++number);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return assembler.finish();
}

}  // namespace t2script
