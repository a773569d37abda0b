#include "noc/critic.hpp"

#include <fmt/format.h>

#include "noc/error.hpp"

namespace noc {

CriticTables CriticTables::zeros(int num_states, int num_options, double gamma) {
  if (num_states <= 0 || num_options <= 0) {
    throw Error(ErrorCode::bad_shape,
                fmt::format("critic shape {}x{} must be positive", num_states, num_options));
  }
  CriticTables c;
  c.q_omega = Eigen::MatrixXd::Zero(num_states, num_options);
  c.gamma = gamma;
  return c;
}

double v_of(const CriticTables& critic, const PolicyOverOptions& pi_over, int s) {
  if (critic.value_style == ValueStyle::max) return critic.q_omega.row(s).maxCoeff();
  double v = 0.0;
  for (int o = 0; o < critic.q_omega.cols(); ++o) v += pi_over.prob(s, o) * critic.q_omega(s, o);
  return v;
}

double u_of(const CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
            const PolicyOverOptions& pi_over, int o, int s_next) {
  const double beta = termination_prob(params, fmap, o, s_next);
  return (1.0 - beta) * critic.q_omega(s_next, o) + beta * v_of(critic, pi_over, s_next);
}

double td_error_u(const CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
                  const PolicyOverOptions& pi_over, int s, int o, double r, int s_next,
                  bool terminal) {
  const double boot = terminal ? 0.0 : critic.gamma * u_of(critic, params, fmap, pi_over, o, s_next);
  return r + boot - critic.q_omega(s, o);
}

double td_error_omega(const CriticTables& critic, const PolicyOverOptions& pi_over, int s,
                      double r, int s_next, bool terminal) {
  const double boot = terminal ? 0.0 : critic.gamma * v_of(critic, pi_over, s_next);
  const double here = v_of(critic, pi_over, s);
  if (critic.omega_td_form == OmegaTdForm::scaled_baseline) return r + boot - critic.gamma * here;
  return r + boot - here;
}

void q_learning_update(CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
                       const PolicyOverOptions& pi_over, int s, int o, double r, int s_next,
                       bool terminal) {
  const double delta = td_error_u(critic, params, fmap, pi_over, s, o, r, s_next, terminal);
  critic.q_omega(s, o) += critic.learning_rate * delta;
}

}  // namespace noc
