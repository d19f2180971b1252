#pragma once

#include <stdexcept>
#include <string>

namespace honeydirac {

enum class ErrorCode {
  invalid_parameter,
  no_dirac_point,
  wrong_symmetry_sector,
  symmetry_classification_failure,
  assumption_violated,
  resolution_error,
  ill_conditioned_resolvent,
  non_commensurate_grid,
  tracking_failure,
  alpha_not_a_solution,
  time_grid_mismatch,
  solver_failure,
  blow_up,
  config_error,
  io_error,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::no_dirac_point: return "no-dirac-point";
    case ErrorCode::wrong_symmetry_sector: return "wrong-symmetry-sector";
    case ErrorCode::symmetry_classification_failure: return "symmetry-classification-failure";
    case ErrorCode::assumption_violated: return "assumption-violated";
    case ErrorCode::resolution_error: return "resolution-error";
    case ErrorCode::ill_conditioned_resolvent: return "ill-conditioned-resolvent";
    case ErrorCode::non_commensurate_grid: return "non-commensurate-grid";
    case ErrorCode::tracking_failure: return "tracking-failure";
    case ErrorCode::alpha_not_a_solution: return "alpha-not-a-solution";
    case ErrorCode::time_grid_mismatch: return "time-grid-mismatch";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::blow_up: return "blow-up";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace honeydirac
