#include "noc/options.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "noc/error.hpp"

namespace noc {

OptionParams OptionParams::zeros(int num_options, int num_features, int num_actions) {
  if (num_options <= 0 || num_features <= 0 || num_actions <= 0) {
    throw Error(ErrorCode::bad_shape, fmt::format("option parameter shape {}x{}x{}", num_options,
                                                  num_features, num_actions));
  }
  OptionParams p;
  p.num_options = num_options;
  p.num_features = num_features;
  p.num_actions = num_actions;
  p.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_options) * num_features * num_actions);
  p.vartheta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_options) * num_features);
  return p;
}

bool OptionParams::is_valid() const {
  return theta.size() == static_cast<Eigen::Index>(num_options) * num_features * num_actions &&
         vartheta.size() == static_cast<Eigen::Index>(num_options) * num_features &&
         theta.allFinite() && vartheta.allFinite() && beta_clamp > 0.0 && beta_clamp < 0.5 &&
         epsilon_over_options >= 0.0 && epsilon_over_options <= 1.0;
}

// ------------------------------------------------------------ policy over options

PolicyOverOptions PolicyOverOptions::table(Eigen::MatrixXd probs) {
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    if ((probs.row(s).array() < 0.0).any() || std::abs(probs.row(s).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::row_sum, fmt::format("policy-over-options row {} is not a distribution", s));
    }
  }
  PolicyOverOptions pi;
  pi.probs_ = std::move(probs);
  return pi;
}

PolicyOverOptions PolicyOverOptions::epsilon_greedy(const Eigen::MatrixXd& q_omega, double epsilon) {
  PolicyOverOptions pi;
  pi.q_omega_ = &q_omega;
  pi.epsilon_ = epsilon;
  return pi;
}

int PolicyOverOptions::num_states() const {
  return static_cast<int>(is_table() ? probs_.rows() : q_omega_->rows());
}

int PolicyOverOptions::num_options() const {
  return static_cast<int>(is_table() ? probs_.cols() : q_omega_->cols());
}

double PolicyOverOptions::prob(int s, int o) const {
  if (is_table()) return probs_(s, o);
  const double base = epsilon_ / static_cast<double>(q_omega_->cols());
  return greedy_option(*q_omega_, s) == o ? base + (1.0 - epsilon_) : base;
}

Eigen::VectorXd PolicyOverOptions::row(int s) const {
  if (is_table()) return probs_.row(s).transpose();
  const auto n = q_omega_->cols();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, epsilon_ / static_cast<double>(n));
  out(greedy_option(*q_omega_, s)) += 1.0 - epsilon_;
  return out;
}

Eigen::MatrixXd PolicyOverOptions::materialize() const {
  if (is_table()) return probs_;
  Eigen::MatrixXd out(q_omega_->rows(), q_omega_->cols());
  for (Eigen::Index s = 0; s < out.rows(); ++s) out.row(s) = row(static_cast<int>(s)).transpose();
  return out;
}

int greedy_option(const Eigen::MatrixXd& q_omega, int s) {
  int best = 0;
  for (int o = 1; o < q_omega.cols(); ++o) {
    if (q_omega(s, o) > q_omega(s, best)) best = o;
  }
  return best;
}

// ------------------------------------------------------------ intra-option policies

Eigen::VectorXd action_logits(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  const auto x = fmap.evaluate(s);
  const auto block = params.theta_block(o);
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(params.num_actions);
  for (int f = 0; f < params.num_features; ++f) {
    if (x(f) == 0.0) continue;
    logits += x(f) * block.segment(static_cast<Eigen::Index>(f) * params.num_actions, params.num_actions);
  }
  return logits;
}

Eigen::VectorXd intra_option_probs(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  Eigen::VectorXd z = action_logits(params, fmap, o, s);
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

Eigen::VectorXd grad_log_intra_option(const OptionParams& params, const FeatureMap& fmap, int o,
                                      int s, int a) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.theta_size());
  Eigen::VectorXd centered = -intra_option_probs(params, fmap, o, s);
  centered(a) += 1.0;
  const auto x = fmap.evaluate(s);
  for (int f = 0; f < params.num_features; ++f) {
    if (x(f) == 0.0) continue;
    g.segment(params.theta_index(o, f, 0), params.num_actions) = x(f) * centered;
  }
  return g;
}

// ------------------------------------------------------------ terminations

double termination_logit(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  return fmap.evaluate(s).dot(params.vartheta.segment(params.vartheta_index(o, 0), params.num_features));
}

double termination_prob(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  const double beta = sigmoid(termination_logit(params, fmap, o, s));
  return std::clamp(beta, params.beta_clamp, 1.0 - params.beta_clamp);
}

Eigen::VectorXd grad_log_termination(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  const double beta = sigmoid(termination_logit(params, fmap, o, s));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.vartheta_size());
  g.segment(params.vartheta_index(o, 0), params.num_features) = (1.0 - beta) * fmap.evaluate(s);
  return g;
}

Eigen::VectorXd grad_termination(const OptionParams& params, const FeatureMap& fmap, int o, int s) {
  const double beta = sigmoid(termination_logit(params, fmap, o, s));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.vartheta_size());
  g.segment(params.vartheta_index(o, 0), params.num_features) = beta * (1.0 - beta) * fmap.evaluate(s);
  return g;
}

double continuation_prob(const OptionParams& params, const FeatureMap& fmap,
                         const PolicyOverOptions& pi_over, int o, int s_next) {
  const double beta = termination_prob(params, fmap, o, s_next);
  return 1.0 - beta + beta * pi_over.prob(s_next, o);
}

Eigen::VectorXd grad_log_continuation(const OptionParams& params, const FeatureMap& fmap,
                                      const PolicyOverOptions& pi_over, int o, int s_next) {
  // ln beta' = ln(1 - beta (1 - pi_O)), so d ln beta' = -(1 - pi_O) d beta / beta'.
  const double keep = continuation_prob(params, fmap, pi_over, o, s_next);
  const double scale = -(1.0 - pi_over.prob(s_next, o)) / keep;
  return scale * grad_termination(params, fmap, o, s_next);
}

double likelihood_ratio(const OptionParams& params, const FeatureMap& fmap,
                        const PolicyOverOptions& pi_over, int o, int s_next) {
  const double keep = continuation_prob(params, fmap, pi_over, o, s_next);
  if (1.0 - keep < 1e-12) {
    throw Error(ErrorCode::degenerate_likelihood,
                fmt::format("option {} cannot stop at state {} (1 - beta' = {:.3g})", o, s_next, 1.0 - keep));
  }
  return keep / (1.0 - keep);
}

// ------------------------------------------------------------ selection

int select_option(const Eigen::MatrixXd& q_omega, int s, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return rng.uniform_int(static_cast<int>(q_omega.cols()));
  }
  return greedy_option(q_omega, s);
}

PolicyOverOptions explicit_policy_over_options(const Eigen::MatrixXd& q_omega, double epsilon) {
  return PolicyOverOptions::table(PolicyOverOptions::epsilon_greedy(q_omega, epsilon).materialize());
}

}  // namespace noc
