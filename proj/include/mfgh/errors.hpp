#pragma once

#include <stdexcept>
#include <string>

namespace mfgh {

// Failure modes of the public operations. Every exception carries one of
// these codes so callers (and the CLI exit-code mapping) never have to
// string-match diagnostics.
enum class errc {
  odd_grid_size,
  grid_too_small,
  bad_dimension,
  grid_incommensurate,
  non_finite_input,
  syntax_error,
  periodicity_violation,
  dimension_error,
  non_convergence,
  non_finite_objective,
  root_find_failure,
  bracket_failure,
  not_separable,
  out_of_table_range,
  bad_config,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::odd_grid_size: return "OddGridSize";
    case errc::grid_too_small: return "GridTooSmall";
    case errc::bad_dimension: return "BadDimension";
    case errc::grid_incommensurate: return "GridIncommensurate";
    case errc::non_finite_input: return "NonFiniteInput";
    case errc::syntax_error: return "SyntaxError";
    case errc::periodicity_violation: return "PeriodicityViolation";
    case errc::dimension_error: return "DimensionError";
    case errc::non_convergence: return "NonConvergence";
    case errc::non_finite_objective: return "NonFiniteObjective";
    case errc::root_find_failure: return "RootFindFailure";
    case errc::bracket_failure: return "BracketFailure";
    case errc::not_separable: return "NotSeparable";
    case errc::out_of_table_range: return "OutOfTableRange";
    case errc::bad_config: return "BadConfig";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) {
  throw error(c, msg);
}

inline void require(bool cond, errc c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

}  // namespace mfgh
