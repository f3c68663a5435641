#include "lexitrain/errors.hpp"

namespace lexitrain {

std::string_view api_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::UnknownPack: return "UNKNOWN_PACK";
    case ErrorCode::UnknownCategory: return "UNKNOWN_CATEGORY";
    case ErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case ErrorCode::UnknownQuestion: return "UNKNOWN_QUESTION";
    case ErrorCode::LevelLocked: return "LEVEL_LOCKED";
    case ErrorCode::InvalidModality: return "INVALID_MODALITY";
    case ErrorCode::InvalidPolicy: return "INVALID_POLICY";
    case ErrorCode::InvalidRequest: return "INVALID_REQUEST";
    case ErrorCode::SessionComplete: return "SESSION_COMPLETE";
    case ErrorCode::SessionNotComplete: return "SESSION_NOT_COMPLETE";
    case ErrorCode::OutOfOrderAnswer: return "OUT_OF_ORDER_ANSWER";
    case ErrorCode::InsufficientDistractors: return "INSUFFICIENT_DISTRACTORS";
    case ErrorCode::NothingDeferred: return "NOTHING_DEFERRED";
    case ErrorCode::OrderingViolation: return "ORDERING_VIOLATION";
    case ErrorCode::StorageFailure: return "STORAGE_FAILURE";
    case ErrorCode::CorruptStream: return "CORRUPT_STREAM";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::OutOfRangeRating: return "OUT_OF_RANGE_RATING";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::DegenerateInput: return "DEGENERATE_INPUT";
    case ErrorCode::ZeroWithinVariance: return "ZERO_WITHIN_VARIANCE";
    case ErrorCode::NonConvergence: return "NON_CONVERGENCE";
  }
  return "INTERNAL";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownPack:
    case ErrorCode::UnknownCategory:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownQuestion:
      return 404;
    case ErrorCode::LevelLocked:
    case ErrorCode::OutOfOrderAnswer:
    case ErrorCode::SessionNotComplete:
    case ErrorCode::OrderingViolation:
    case ErrorCode::NothingDeferred:
      return 409;
    case ErrorCode::SessionComplete:
      return 410;
    case ErrorCode::SyntaxError:
    case ErrorCode::InvalidRequest:
      return 400;
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidModality:
    case ErrorCode::InvalidPolicy:
    case ErrorCode::InsufficientDistractors:
    case ErrorCode::EmptyInput:
    case ErrorCode::OutOfRangeRating:
    case ErrorCode::OutOfRange:
    case ErrorCode::DegenerateInput:
    case ErrorCode::ZeroWithinVariance:
      return 422;
    case ErrorCode::StorageFailure:
    case ErrorCode::CorruptStream:
    case ErrorCode::NonConvergence:
      return 500;
  }
  return 500;
}

nlohmann::json Error::to_json() const {
  return {{"code", std::string(api_code(code_))},
          {"message", what()},
          {"detail", detail_}};
}

}  // namespace lexitrain
