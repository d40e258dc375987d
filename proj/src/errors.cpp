#include "furstenberg/errors.hpp"

namespace furstenberg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::DegenerateFlag: return "DegenerateFlag";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::FitIllConditioned: return "FitIllConditioned";
    case ErrorCode::TooManyDegenerate: return "TooManyDegenerate";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::AllMassesZero: return "AllMassesZero";
    case ErrorCode::WitnessNotFound: return "WitnessNotFound";
    case ErrorCode::ExactEntriesMissing: return "ExactEntriesMissing";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonInvertible:
    case ErrorCode::NonFinite:
    case ErrorCode::DegenerateImage:
    case ErrorCode::DegenerateFlag:
    case ErrorCode::DegenerateGap:
    case ErrorCode::Overflow:
    case ErrorCode::FitIllConditioned:
    case ErrorCode::TooManyDegenerate:
    case ErrorCode::AllMassesZero:
    case ErrorCode::WitnessNotFound:
      return true;
    default:
      return false;
  }
}

Error::Error(std::string_view module, ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(module) + "." + std::string(to_string(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      module_(module),
      code_(code),
      detail_(detail) {}

std::string Error::qualified_code() const {
  return module_ + "." + std::string(to_string(code_));
}

}  // namespace furstenberg
