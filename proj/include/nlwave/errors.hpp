#pragma once

#include <stdexcept>
#include <string>

namespace nlwave {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NLWAVE_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

NLWAVE_DEFINE_ERROR(InvalidParams)
NLWAVE_DEFINE_ERROR(DomainTooSmall)
NLWAVE_DEFINE_ERROR(NoContraction)
NLWAVE_DEFINE_ERROR(NonConvergence)
NLWAVE_DEFINE_ERROR(PathOutsideDomain)
NLWAVE_DEFINE_ERROR(RayOutsideDomain)
NLWAVE_DEFINE_ERROR(ToleranceNotMet)
NLWAVE_DEFINE_ERROR(OutOfRange)
NLWAVE_DEFINE_ERROR(EvennessViolated)
NLWAVE_DEFINE_ERROR(ValidationError)

#undef NLWAVE_DEFINE_ERROR

/// Raised by the time stepper when a sample becomes non-finite or exceeds
/// the configured guard. For focusing runs this is an expected outcome.
class BlowUpDetected : public Error {
 public:
  BlowUpDetected(double t, std::size_t step, double max_abs)
      : Error("BlowUpDetected", "blow-up detected at t=" + std::to_string(t)),
        t_(t),
        step_(step),
        max_abs_(max_abs) {}
  double time() const noexcept { return t_; }
  std::size_t step() const noexcept { return step_; }
  double max_abs() const noexcept { return max_abs_; }

 private:
  double t_;
  std::size_t step_;
  double max_abs_;
};

/// Config parse failure with 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : Error("ParseError", "line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace nlwave
