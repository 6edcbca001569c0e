#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathdepth {

enum class ErrorCode {
  MalformedHeader,
  BodyShapeMismatch,
  NonFiniteCell,
  GeometryMismatch,
  IoFailure,
  EndpointOutOfBounds,
  EndpointOnNodata,
  StepNonPositive,
  EmptyProfile,
  SchemaMismatch,
  EmptyInput,
  MissingCityGrids,
  NonPositiveInput,
  InsufficientRows,
  EmptyTraining,
  UnknownModelKind,
  VersionMismatch,
  ModelParse,
  TooFewCities,
  EmptyErrors,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace pathdepth
