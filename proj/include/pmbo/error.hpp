#pragma once

#include <stdexcept>
#include <string>

namespace pmbo {

enum class ErrorKind {
  invalid_dimension,
  invalid_degree_parameter,
  insufficient_nodes,
  dimension_mismatch,
  length_mismatch,
  rank_deficient,
  underdetermined,
  factorization_failure,
  out_of_bounds,
  invalid_bounds,
  invalid_config,
  budget_exhausted_at_init,
  objective_evaluation_failure,
  unknown_id,
  io_failure,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::invalid_degree_parameter: return "invalid-degree-parameter";
    case ErrorKind::insufficient_nodes: return "insufficient-nodes";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::rank_deficient: return "rank-deficient";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::factorization_failure: return "factorization-failure";
    case ErrorKind::out_of_bounds: return "out-of-bounds";
    case ErrorKind::invalid_bounds: return "invalid-bounds";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::budget_exhausted_at_init: return "budget-exhausted-at-init";
    case ErrorKind::objective_evaluation_failure: return "objective-evaluation-failure";
    case ErrorKind::unknown_id: return "unknown-id";
    case ErrorKind::io_failure: return "io-failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pmbo
