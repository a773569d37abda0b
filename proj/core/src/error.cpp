#include "noc/error.hpp"

namespace noc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::row_sum: return "RowSumError";
    case ErrorCode::negative_probability: return "NegativeProbability";
    case ErrorCode::terminal_not_absorbing: return "TerminalNotAbsorbing";
    case ErrorCode::bad_initial_dist: return "BadInitialDist";
    case ErrorCode::bad_gamma: return "BadGamma";
    case ErrorCode::bad_shape: return "BadShape";
    case ErrorCode::terminal_state_step: return "TerminalStateStep";
    case ErrorCode::degenerate_likelihood: return "DegenerateLikelihood";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::instance_too_large: return "InstanceTooLarge";
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IoError";
    case ErrorCode::length_mismatch: return "LengthMismatch";
  }
  return "UnknownError";
}

}  // namespace noc
