#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trustconv {

enum class ErrorCode {
  MissingScales,
  DuplicateId,
  MalformedRecord,
  UnknownScaleId,
  EmptyScaleText,
  EmptyAfterPreprocessing,
  EmptyInput,
  EmptySelection,
  NonPositiveCell,
  DivergenceDetected,
  InconsistentDimensions,
  MalformedRow,
  ZeroVector,
  DimensionMismatch,
  UnknownWord,
  InvalidK,
  EmptyCluster,
  MissingSlot,
  LintViolation,
  SessionClosed,
  UnknownSession,
  UnknownPromptSet,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library error. `code()` identifies the failure kind for callers that branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trustconv
