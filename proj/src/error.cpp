#include "evolver/error.hpp"

namespace evolver {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidMetric: return "invalid-metric";
    case ErrorKind::kSingularResolvent: return "singular-resolvent";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kOrdering: return "ordering";
    case ErrorKind::kResourceGuard: return "resource-guard";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kGridMismatch: return "grid-mismatch";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kDegenerateFixedPoint: return "degenerate-fixed-point";
    case ErrorKind::kInadmissibleRegion: return "inadmissible-region";
    case ErrorKind::kDegenerateZero: return "degenerate-zero";
    case ErrorKind::kOracleFailure: return "oracle-failure";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kSyntax: return "syntax";
    case ErrorKind::kUnknownIdentifier: return "unknown-identifier";
    case ErrorKind::kUnboundVariable: return "unbound-variable";
    case ErrorKind::kDivisionByZero: return "division-by-zero";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace evolver
