#include "trustconv/error.hpp"

namespace trustconv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingScales: return "MissingScales";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownScaleId: return "UnknownScaleId";
    case ErrorCode::EmptyScaleText: return "EmptyScaleText";
    case ErrorCode::EmptyAfterPreprocessing: return "EmptyAfterPreprocessing";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::NonPositiveCell: return "NonPositiveCell";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownWord: return "UnknownWord";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::LintViolation: return "LintViolation";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownPromptSet: return "UnknownPromptSet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace trustconv
