#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evolver {

enum class ErrorKind {
  kInvalidInput,
  kInvalidMetric,
  kSingularResolvent,
  kPrecondition,
  kOrdering,
  kResourceGuard,
  kDimensionMismatch,
  kGridMismatch,
  kDivergence,
  kDegenerateFixedPoint,
  kInadmissibleRegion,
  kDegenerateZero,
  kOracleFailure,
  kConfiguration,
  kSyntax,
  kUnknownIdentifier,
  kUnboundVariable,
  kDivisionByZero,
};

/// Stable kebab-case name of an error kind, e.g. "inadmissible-region".
std::string_view to_string(ErrorKind kind);

/// The single exception type thrown by the library. `kind()` is what callers
/// dispatch on; `what()` carries the human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace evolver
