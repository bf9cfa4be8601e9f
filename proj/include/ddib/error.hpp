#pragma once

#include <stdexcept>
#include <string>

namespace ddib {

/// Broad classes used to pick a process exit code.
enum class ErrorKind {
  kUsage,    // bad parameters or arguments
  kData,     // malformed, mismatched or degenerate inputs
  kNumeric,  // non-finite values, divergence, non-convergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define DDIB_DEFINE_ERROR(Name, Kind)                                \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Kind, what) {}    \
  };

DDIB_DEFINE_ERROR(ParameterError, ErrorKind::kUsage)
DDIB_DEFINE_ERROR(ShapeError, ErrorKind::kData)
DDIB_DEFINE_ERROR(FormatError, ErrorKind::kData)
DDIB_DEFINE_ERROR(ParseError, ErrorKind::kData)
DDIB_DEFINE_ERROR(DegenerateDataError, ErrorKind::kData)
DDIB_DEFINE_ERROR(CapacityError, ErrorKind::kData)
DDIB_DEFINE_ERROR(CompatibilityError, ErrorKind::kData)
DDIB_DEFINE_ERROR(MissingModelError, ErrorKind::kData)
DDIB_DEFINE_ERROR(SingularityError, ErrorKind::kNumeric)
DDIB_DEFINE_ERROR(NumericError, ErrorKind::kNumeric)

#undef DDIB_DEFINE_ERROR

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, long iteration)
      : Error(ErrorKind::kNumeric, what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double violation)
      : Error(ErrorKind::kNumeric, what), violation_(violation) {}
  /// Marginal violation at the last iterate.
  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

}  // namespace ddib
