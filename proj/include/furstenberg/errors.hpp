#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace furstenberg {

enum class ErrorCode {
  NonInvertible,
  NonFinite,
  OutOfRange,
  DimensionMismatch,
  DegenerateImage,
  DegenerateFlag,
  DegenerateGap,
  InvalidArgument,
  InvalidSpec,
  Overflow,
  FitIllConditioned,
  TooManyDegenerate,
  EmptySample,
  AllMassesZero,
  WitnessNotFound,
  ExactEntriesMissing,
  SchemaMismatch,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Numerical errors map to CLI exit code 3, everything else to 2.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(std::string_view module, ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  // e.g. "linalg.NonInvertible"
  std::string qualified_code() const;
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string module_;
  ErrorCode code_;
  std::string detail_;
};

}  // namespace furstenberg
