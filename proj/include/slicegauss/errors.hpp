#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace slicegauss {

// Compact "%g"-style rendering of a real for error messages.
inline std::string error_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

// Process exit codes used by the CLI; every error type maps onto one of them.
enum class ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kInfeasibleSlice = 2,
  kNumericalFailure = 3,
  kIoError = 4,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept { return ExitCode::kNumericalFailure; }
};

#define SLICEGAUSS_DEFINE_ERROR(Name, Code)                         \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(what) {}         \
    ExitCode exit_code() const noexcept override { return Code; }   \
  }

// Bad input shapes and invalid mathematical objects.
SLICEGAUSS_DEFINE_ERROR(InvalidArgument, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(DimensionMismatch, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(InvalidFamily, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(InvalidCovariance, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(InvalidDimensions, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(UnsupportedFamily, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(UnsupportedClosedForm, ExitCode::kInvalidConfig);
SLICEGAUSS_DEFINE_ERROR(RankTooHighForQuadrature, ExitCode::kInvalidConfig);

// The requested slice does not exist at this dimension.
SLICEGAUSS_DEFINE_ERROR(EmptySlice, ExitCode::kInfeasibleSlice);
SLICEGAUSS_DEFINE_ERROR(DegenerateFrame, ExitCode::kInfeasibleSlice);
SLICEGAUSS_DEFINE_ERROR(ZeroTruncation, ExitCode::kInfeasibleSlice);

// Numerical failures.
SLICEGAUSS_DEFINE_ERROR(DegenerateFamily, ExitCode::kNumericalFailure);
SLICEGAUSS_DEFINE_ERROR(QuadratureNonConvergent, ExitCode::kNumericalFailure);
SLICEGAUSS_DEFINE_ERROR(SeparationLost, ExitCode::kNumericalFailure);

SLICEGAUSS_DEFINE_ERROR(IoError, ExitCode::kIoError);

#undef SLICEGAUSS_DEFINE_ERROR

// Schema violation in an experiment config; carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("invalid config field '" + field + "': " + message), field_(std::move(field)) {}
  ExitCode exit_code() const noexcept override { return ExitCode::kInvalidConfig; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace slicegauss
