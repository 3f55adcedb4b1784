#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlc {

enum class ErrorCode {
  UnknownLabel,
  IoError,
  DuplicateEntry,
  EmptyCatalog,
  InvalidRequirement,
  DimensionMismatch,
  ZeroVector,
  ProviderError,
  DuplicateExampleId,
  CorruptRecord,
  MissingLabel,
  MissingReasoning,
  BackendUnavailable,
  ScriptMiss,
  ConfigError,
  DuplicateRequirementId,
  UnknownItem,
  AlreadyValidated,
  EmptyReasoning,
  IndivisibleDataset,
  EmptyPredictions,
  InconsistentReasoning,
};

/// Stable identifier used on the wire and in logs, e.g. "DimensionMismatch".
std::string_view to_string(ErrorCode code);

/// True for the error codes produced by output parsing.
bool is_parse_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Corrupt line in a line-oriented file; `line()` is 1-based.
class CorruptRecordError : public Error {
 public:
  CorruptRecordError(std::size_t line, const std::string& detail)
      : Error(ErrorCode::CorruptRecord,
              "corrupt record at line " + std::to_string(line) + ": " + detail),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Plain-data copy of an Error, for places where failures are collected
/// rather than thrown (batch results, item error state).
struct ErrorInfo {
  ErrorCode code;
  std::string message;

  static ErrorInfo from(const Error& e) { return {e.code(), e.what()}; }
};

}  // namespace hlc
