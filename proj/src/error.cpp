#include "pathdepth/error.hpp"

namespace pathdepth {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::BodyShapeMismatch: return "BodyShapeMismatch";
    case ErrorCode::NonFiniteCell: return "NonFiniteCell";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EndpointOutOfBounds: return "EndpointOutOfBounds";
    case ErrorCode::EndpointOnNodata: return "EndpointOnNodata";
    case ErrorCode::StepNonPositive: return "StepNonPositive";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingCityGrids: return "MissingCityGrids";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::EmptyTraining: return "EmptyTraining";
    case ErrorCode::UnknownModelKind: return "UnknownModelKind";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ModelParse: return "ModelParse";
    case ErrorCode::TooFewCities: return "TooFewCities";
    case ErrorCode::EmptyErrors: return "EmptyErrors";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace pathdepth
