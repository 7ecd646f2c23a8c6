#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace t2script {

enum class ErrorCode {
  // reader
  InvalidEncoding,
  HashLineSemicolon,
  UnexpectedBlock,
  // compiler
  UnknownCommand,
  InvalidName,
  ArityMismatch,
  RedefinedFunction,
  EndNameMismatch,
  MissingRequiredBlock,
  UnexpectedSeparationKeyword,
  UnexpectedBlockClose,
  UnterminatedBlock,
  UnterminatedDefinition,
  MalformedDirective,
  UnknownEventBinding,
  BlockInSingleCommand,
  FunctionDefInMinimal,
  // expressions
  UnsetVariable,
  UnknownConstant,
  MalformedExpression,
  UnbalancedIndex,
  EmptyName,
  UnknownOperator,
  UnimplementedOperator,
  WrongArgumentCount,
  NonNumericArgument,
  DivisionByZero,
  DomainError,
  ValueOutOfRange,
  IndexOutOfRange,
  BadRegex,
  // vm / builtins
  UnknownFunction,
  DisabledCommand,
  DuplicateCommand,
  DuplicateConstant,
  UnknownContext,
  TooFewArguments,
  ArgsOutsideFunction,
  ArgsAlreadyBound,
  NotAnArray,
  MalformedForeach,
  NonNumericVariable,
  TriggerOutsideEvent,
  RecursionLimit,
  FileNotFound,
  // events / timers
  DuplicateEvent,
  EventsDisabled,
  HostEventNotCallable,
  DuplicateTimerName,
  UnknownTimer,
  // embed
  UnknownModule,
  DuplicateModule,
  SpawnFailure,
  NonZeroExit,
  EnvrsTimeout,
  EnvrsNotAllowed,
  MinimalCompileError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::HashLineSemicolon: return "HashLineSemicolon";
    case ErrorCode::UnexpectedBlock: return "UnexpectedBlock";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::RedefinedFunction: return "RedefinedFunction";
    case ErrorCode::EndNameMismatch: return "EndNameMismatch";
    case ErrorCode::MissingRequiredBlock: return "MissingRequiredBlock";
    case ErrorCode::UnexpectedSeparationKeyword: return "UnexpectedSeparationKeyword";
    case ErrorCode::UnexpectedBlockClose: return "UnexpectedBlockClose";
    case ErrorCode::UnterminatedBlock: return "UnterminatedBlock";
    case ErrorCode::UnterminatedDefinition: return "UnterminatedDefinition";
    case ErrorCode::MalformedDirective: return "MalformedDirective";
    case ErrorCode::UnknownEventBinding: return "UnknownEventBinding";
    case ErrorCode::BlockInSingleCommand: return "BlockInSingleCommand";
    case ErrorCode::FunctionDefInMinimal: return "FunctionDefInMinimal";
    case ErrorCode::UnsetVariable: return "UnsetVariable";
    case ErrorCode::UnknownConstant: return "UnknownConstant";
    case ErrorCode::MalformedExpression: return "MalformedExpression";
    case ErrorCode::UnbalancedIndex: return "UnbalancedIndex";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::UnimplementedOperator: return "UnimplementedOperator";
    case ErrorCode::WrongArgumentCount: return "WrongArgumentCount";
    case ErrorCode::NonNumericArgument: return "NonNumericArgument";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BadRegex: return "BadRegex";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::DisabledCommand: return "DisabledCommand";
    case ErrorCode::DuplicateCommand: return "DuplicateCommand";
    case ErrorCode::DuplicateConstant: return "DuplicateConstant";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::TooFewArguments: return "TooFewArguments";
    case ErrorCode::ArgsOutsideFunction: return "ArgsOutsideFunction";
    case ErrorCode::ArgsAlreadyBound: return "ArgsAlreadyBound";
    case ErrorCode::NotAnArray: return "NotAnArray";
    case ErrorCode::MalformedForeach: return "MalformedForeach";
    case ErrorCode::NonNumericVariable: return "NonNumericVariable";
    case ErrorCode::TriggerOutsideEvent: return "TriggerOutsideEvent";
    case ErrorCode::RecursionLimit: return "RecursionLimit";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::DuplicateEvent: return "DuplicateEvent";
    case ErrorCode::EventsDisabled: return "EventsDisabled";
    case ErrorCode::HostEventNotCallable: return "HostEventNotCallable";
    case ErrorCode::DuplicateTimerName: return "DuplicateTimerName";
    case ErrorCode::UnknownTimer: return "UnknownTimer";
    case ErrorCode::UnknownModule: return "UnknownModule";
    case ErrorCode::DuplicateModule: return "DuplicateModule";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::NonZeroExit: return "NonZeroExit";
    case ErrorCode::EnvrsTimeout: return "EnvrsTimeout";
    case ErrorCode::EnvrsNotAllowed: return "EnvrsNotAllowed";
    case ErrorCode::MinimalCompileError: return "MinimalCompileError";
  }
  return "Unknown";
}

/// Script-visible error text: `<Code>: <detail>`.
inline std::string error_text(ErrorCode code, std::string_view detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

struct SourceSpan {
  std::string file;
  std::size_t first_line = 0;
  std::size_t last_line = 0;
};

inline std::string describe(const SourceSpan& span) {
  if (span.first_line == 0) return span.file;
  std::string out = span.file + ":" + std::to_string(span.first_line);
  if (span.last_line != span.first_line) out += "-" + std::to_string(span.last_line);
  return out;
}

/// Base of all exceptions raised by the library outside the script-level
/// result protocol (reading, compiling, host API misuse).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(error_text(code, detail)), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

class ReadError : public Error {
 public:
  ReadError(ErrorCode code, std::string detail, SourceSpan span)
      : Error(code, std::move(detail)), span_(std::move(span)) {}
  const SourceSpan& span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

class CompileError : public Error {
 public:
  CompileError(ErrorCode code, std::string detail, SourceSpan span)
      : Error(code, std::move(detail)), span_(std::move(span)) {}
  const SourceSpan& span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

/// Raised while evaluating expressions; carries the exact error text that
/// becomes the failing command's error field.
class ScriptError : public std::exception {
 public:
  explicit ScriptError(std::string text) : text_(std::move(text)) {}
  ScriptError(ErrorCode code, std::string_view detail) : text_(error_text(code, detail)) {}
  const char* what() const noexcept override { return text_.c_str(); }
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

inline constexpr std::string_view kBreakCode = "`break";
inline constexpr std::string_view kContinueCode = "`continue";

/// The (result, error) pair every command returns.
///
///   ok            -> command succeeded
///   !ok, no error -> function return
///   !ok, "`..."   -> special control code (never displayed, never caught)
///   !ok, other    -> error propagating up to the nearest catch
struct ExecOutcome {
  bool ok = true;
  std::optional<std::string> error;

  static ExecOutcome success() { return {}; }
  static ExecOutcome function_return() { return {false, std::nullopt}; }
  static ExecOutcome failure(std::string text) { return {false, std::move(text)}; }
  static ExecOutcome failure(ErrorCode code, std::string_view detail) {
    return failure(error_text(code, detail));
  }

  bool is_function_return() const noexcept { return !ok && !error; }
  bool is_special() const noexcept { return !ok && error && !error->empty() && error->front() == '`'; }
  bool is_error() const noexcept { return !ok && error && !is_special(); }
  bool is_break() const noexcept { return !ok && error && *error == kBreakCode; }
  bool is_continue() const noexcept { return !ok && error && *error == kContinueCode; }

  friend bool operator==(const ExecOutcome&, const ExecOutcome&) = default;
};

}  // namespace t2script
