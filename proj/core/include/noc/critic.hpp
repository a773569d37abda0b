#pragma once

#include <Eigen/Core>

#include "noc/features.hpp"
#include "noc/options.hpp"

namespace noc {

enum class ValueStyle {
  epsilon_greedy_expectation,  // v(s) = sum_o pi_O(s, o) q(s, o)
  max,                         // v(s) = max_o q(s, o)
};

/// Which termination TD error the agent uses.
enum class OmegaTdForm {
  standard,         // r + gamma v(s') - v(s)
  scaled_baseline,  // r + gamma v(s') - gamma v(s)
};

/// Tabular option-value critic Q_Omega(s, o), learned by intra-option
/// Q-learning.
struct CriticTables {
  Eigen::MatrixXd q_omega;  // (state, option)
  double learning_rate = 0.5;
  double gamma = 0.99;
  ValueStyle value_style = ValueStyle::epsilon_greedy_expectation;
  OmegaTdForm omega_td_form = OmegaTdForm::standard;

  static CriticTables zeros(int num_states, int num_options, double gamma);
};

double v_of(const CriticTables& critic, const PolicyOverOptions& pi_over, int s);

/// Value of o upon arriving in s_next:
/// (1 - beta_o(s')) q(s', o) + beta_o(s') v(s').
double u_of(const CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
            const PolicyOverOptions& pi_over, int o, int s_next);

/// delta^U = r + gamma u(o, s') - q(s, o); no bootstrap into terminal s'.
double td_error_u(const CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
                  const PolicyOverOptions& pi_over, int s, int o, double r, int s_next,
                  bool terminal);

/// delta^Omega per critic.omega_td_form; no bootstrap into terminal s'.
double td_error_omega(const CriticTables& critic, const PolicyOverOptions& pi_over, int s,
                      double r, int s_next, bool terminal);

/// q(s, o) += learning_rate * delta^U. Touches only entry (s, o).
void q_learning_update(CriticTables& critic, const OptionParams& params, const FeatureMap& fmap,
                       const PolicyOverOptions& pi_over, int s, int o, double r, int s_next,
                       bool terminal);

}  // namespace noc
