#pragma once

#include <cmath>

#include <Eigen/Core>

#include "noc/features.hpp"
#include "noc/rng.hpp"

namespace noc {

/// Parameters of a set of options: a linear-softmax intra-option policy and a
/// linear-sigmoid termination per option. Both are stacked per option, so the
/// gradient of one option's log-probability is zero outside its own block.
///
///   theta    index ((o * num_features) + f) * num_actions + a
///   vartheta index  (o * num_features) + f
struct OptionParams {
  int num_options = 0;
  int num_features = 0;
  int num_actions = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd vartheta;
  double epsilon_over_options = 0.05;
  double beta_clamp = 1e-6;

  static OptionParams zeros(int num_options, int num_features, int num_actions);

  Eigen::Index theta_size() const { return theta.size(); }
  Eigen::Index vartheta_size() const { return vartheta.size(); }

  Eigen::Index theta_index(int o, int f, int a) const {
    return (static_cast<Eigen::Index>(o) * num_features + f) * num_actions + a;
  }
  Eigen::Index vartheta_index(int o, int f) const {
    return static_cast<Eigen::Index>(o) * num_features + f;
  }

  Eigen::Index theta_block_size() const {
    return static_cast<Eigen::Index>(num_features) * num_actions;
  }
  auto theta_block(int o) { return theta.segment(o * theta_block_size(), theta_block_size()); }
  auto theta_block(int o) const {
    return theta.segment(o * theta_block_size(), theta_block_size());
  }

  /// True when every entry is finite and the clamp lies in (0, 0.5).
  bool is_valid() const;
};

/// pi_O(s, o). Either a frozen explicit table, or a live epsilon-greedy view
/// over an option-value table owned elsewhere (the agent's critic).
class PolicyOverOptions {
 public:
  static PolicyOverOptions table(Eigen::MatrixXd probs);
  static PolicyOverOptions epsilon_greedy(const Eigen::MatrixXd& q_omega, double epsilon);

  bool is_table() const { return q_omega_ == nullptr; }
  int num_states() const;
  int num_options() const;

  double prob(int s, int o) const;
  Eigen::VectorXd row(int s) const;

  /// Explicit (s, o) table; a copy of the live view when not a table.
  Eigen::MatrixXd materialize() const;

 private:
  PolicyOverOptions() = default;

  Eigen::MatrixXd probs_;
  const Eigen::MatrixXd* q_omega_ = nullptr;
  double epsilon_ = 0.0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Lowest-index argmax of row s.
int greedy_option(const Eigen::MatrixXd& q_omega, int s);

Eigen::VectorXd action_logits(const OptionParams& params, const FeatureMap& fmap, int o, int s);

/// pi_o(. | s): softmax of features(s)^T theta_o.
Eigen::VectorXd intra_option_probs(const OptionParams& params, const FeatureMap& fmap, int o,
                                   int s);

/// d ln pi_o(a | s) / d theta over the full stacked theta.
Eigen::VectorXd grad_log_intra_option(const OptionParams& params, const FeatureMap& fmap, int o,
                                      int s, int a);

double termination_logit(const OptionParams& params, const FeatureMap& fmap, int o, int s);

/// beta_o(s) clamped to [beta_clamp, 1 - beta_clamp].
double termination_prob(const OptionParams& params, const FeatureMap& fmap, int o, int s);

/// d ln beta_o(s) / d vartheta from the unclamped sigmoid: (1 - beta) x(s).
Eigen::VectorXd grad_log_termination(const OptionParams& params, const FeatureMap& fmap, int o,
                                     int s);

/// d beta_o(s) / d vartheta from the unclamped sigmoid: beta (1 - beta) x(s).
Eigen::VectorXd grad_termination(const OptionParams& params, const FeatureMap& fmap, int o,
                                 int s);

/// beta'_o(s') = 1 - beta + beta pi_O(s', o): probability o stays active
/// while leaving s' given it was active on arrival.
double continuation_prob(const OptionParams& params, const FeatureMap& fmap,
                         const PolicyOverOptions& pi_over, int o, int s_next);

/// d ln beta'_o(s') / d vartheta. Zero when pi_O(s', o) = 1.
Eigen::VectorXd grad_log_continuation(const OptionParams& params, const FeatureMap& fmap,
                                      const PolicyOverOptions& pi_over, int o, int s_next);

/// L = beta' / (1 - beta'). Throws degenerate_likelihood when
/// 1 - beta' < 1e-12.
double likelihood_ratio(const OptionParams& params, const FeatureMap& fmap,
                        const PolicyOverOptions& pi_over, int o, int s_next);

/// Epsilon-greedy draw over options at state s.
int select_option(const Eigen::MatrixXd& q_omega, int s, double epsilon, Rng& rng);

/// pi_O(s, o) = epsilon / |O| + (1 - epsilon) 1[o = argmax_o q(s, o)].
PolicyOverOptions explicit_policy_over_options(const Eigen::MatrixXd& q_omega, double epsilon);

}  // namespace noc
