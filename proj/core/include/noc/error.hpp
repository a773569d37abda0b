#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noc {

enum class ErrorCode {
  row_sum,
  negative_probability,
  terminal_not_absorbing,
  bad_initial_dist,
  bad_gamma,
  bad_shape,
  terminal_state_step,
  degenerate_likelihood,
  singular_system,
  instance_too_large,
  parse,
  config,
  io,
  length_mismatch,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace noc
