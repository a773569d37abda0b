#include "noc/checkpoint.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "noc/error.hpp"

namespace noc {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw Error(ErrorCode::parse, fmt::format("checkpoint line {}: {}", line_no, what));
}

double read_real(std::istringstream& fields, int line_no) {
  std::string token;
  if (!(fields >> token)) fail(line_no, "missing value");
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') fail(line_no, fmt::format("bad number '{}'", token));
  return value;
}

int read_int(std::istringstream& fields, int line_no) {
  long value = 0;
  if (!(fields >> value)) fail(line_no, "missing integer");
  return static_cast<int>(value);
}

void check_range(int value, int bound, int line_no, const char* name) {
  if (value < 0 || value >= bound) fail(line_no, fmt::format("{} index {} out of range", name, value));
}

}  // namespace

void write_checkpoint(std::ostream& out, const OptionParams& params, const CriticTables* critic) {
  fmt::print(out, "noc-checkpoint 1\n");
  fmt::print(out, "shape {} {} {}\n", params.num_options, params.num_features, params.num_actions);
  fmt::print(out, "epsilon {:.17g}\n", params.epsilon_over_options);
  fmt::print(out, "beta_clamp {:.17g}\n", params.beta_clamp);
  for (int o = 0; o < params.num_options; ++o) {
    for (int f = 0; f < params.num_features; ++f) {
      for (int a = 0; a < params.num_actions; ++a) {
        fmt::print(out, "theta {} {} {} {:.17g}\n", o, f, a, params.theta(params.theta_index(o, f, a)));
      }
    }
  }
  for (int o = 0; o < params.num_options; ++o) {
    for (int f = 0; f < params.num_features; ++f) {
      fmt::print(out, "vartheta {} {} {:.17g}\n", o, f, params.vartheta(params.vartheta_index(o, f)));
    }
  }
  if (critic == nullptr) return;
  fmt::print(out, "critic {} {:.17g} {:.17g} {} {}\n", critic->q_omega.rows(), critic->gamma,
             critic->learning_rate,
             critic->value_style == ValueStyle::max ? "max" : "expectation",
             critic->omega_td_form == OmegaTdForm::scaled_baseline ? "scaled_baseline" : "standard");
  for (Eigen::Index s = 0; s < critic->q_omega.rows(); ++s) {
    for (Eigen::Index o = 0; o < critic->q_omega.cols(); ++o) {
      fmt::print(out, "q_omega {} {} {:.17g}\n", s, o, critic->q_omega(s, o));
    }
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint cp;
  bool have_header = false;
  bool have_shape = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    if (!have_header) {
      if (key != "noc-checkpoint" || read_int(fields, line_no) != 1) fail(line_no, "not a version 1 checkpoint");
      have_header = true;
      continue;
    }
    if (key == "shape") {
      const int o = read_int(fields, line_no);
      const int f = read_int(fields, line_no);
      const int a = read_int(fields, line_no);
      if (o <= 0 || f <= 0 || a <= 0) fail(line_no, "shape must be positive");
      const double eps = cp.params.epsilon_over_options;
      const double clamp = cp.params.beta_clamp;
      cp.params = OptionParams::zeros(o, f, a);
      cp.params.epsilon_over_options = eps;
      cp.params.beta_clamp = clamp;
      have_shape = true;
    } else if (key == "epsilon") {
      cp.params.epsilon_over_options = read_real(fields, line_no);
    } else if (key == "beta_clamp") {
      cp.params.beta_clamp = read_real(fields, line_no);
    } else if (key == "theta") {
      if (!have_shape) fail(line_no, "theta before shape");
      const int o = read_int(fields, line_no);
      const int f = read_int(fields, line_no);
      const int a = read_int(fields, line_no);
      check_range(o, cp.params.num_options, line_no, "option");
      check_range(f, cp.params.num_features, line_no, "feature");
      check_range(a, cp.params.num_actions, line_no, "action");
      cp.params.theta(cp.params.theta_index(o, f, a)) = read_real(fields, line_no);
    } else if (key == "vartheta") {
      if (!have_shape) fail(line_no, "vartheta before shape");
      const int o = read_int(fields, line_no);
      const int f = read_int(fields, line_no);
      check_range(o, cp.params.num_options, line_no, "option");
      check_range(f, cp.params.num_features, line_no, "feature");
      cp.params.vartheta(cp.params.vartheta_index(o, f)) = read_real(fields, line_no);
    } else if (key == "critic") {
      if (!have_shape) fail(line_no, "critic before shape");
      const int states = read_int(fields, line_no);
      if (states <= 0) fail(line_no, "critic needs at least one state");
      const double gamma = read_real(fields, line_no);
      CriticTables critic = CriticTables::zeros(states, cp.params.num_options, gamma);
      critic.learning_rate = read_real(fields, line_no);
      std::string style;
      std::string form;
      if (!(fields >> style >> form)) fail(line_no, "critic needs a value style and TD form");
      if (style == "max") {
        critic.value_style = ValueStyle::max;
      } else if (style != "expectation") {
        fail(line_no, fmt::format("unknown value style '{}'", style));
      }
      if (form == "scaled_baseline") {
        critic.omega_td_form = OmegaTdForm::scaled_baseline;
      } else if (form != "standard") {
        fail(line_no, fmt::format("unknown TD form '{}'", form));
      }
      cp.critic = std::move(critic);
    } else if (key == "q_omega") {
      if (!cp.critic) fail(line_no, "q_omega before critic");
      const int s = read_int(fields, line_no);
      const int o = read_int(fields, line_no);
      check_range(s, static_cast<int>(cp.critic->q_omega.rows()), line_no, "state");
      check_range(o, static_cast<int>(cp.critic->q_omega.cols()), line_no, "option");
      cp.critic->q_omega(s, o) = read_real(fields, line_no);
    } else {
      fail(line_no, fmt::format("unknown key '{}'", key));
    }
    std::string extra;
    if (fields >> extra) fail(line_no, fmt::format("trailing token '{}'", extra));
  }
  if (!have_header) throw Error(ErrorCode::parse, "empty checkpoint");
  if (!have_shape) throw Error(ErrorCode::parse, "checkpoint has no shape line");
  if (!cp.params.is_valid()) throw Error(ErrorCode::parse, "checkpoint parameters are not valid");
  return cp;
}

}  // namespace noc
