#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace lexitrain {

// Closed set of failure kinds. Each maps 1:1 onto a stable API code
// (see api_code()) and an HTTP status (see http_status()).
enum class ErrorCode {
  SyntaxError,
  SchemaError,
  UnknownPack,
  UnknownCategory,
  UnknownSession,
  UnknownQuestion,
  LevelLocked,
  InvalidModality,
  InvalidPolicy,
  InvalidRequest,
  SessionComplete,
  SessionNotComplete,
  OutOfOrderAnswer,
  InsufficientDistractors,
  NothingDeferred,
  OrderingViolation,
  StorageFailure,
  CorruptStream,
  EmptyInput,
  OutOfRangeRating,
  OutOfRange,
  DegenerateInput,
  ZeroWithinVariance,
  NonConvergence,
};

std::string_view api_code(ErrorCode code);
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  // {code, message, detail}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace lexitrain
