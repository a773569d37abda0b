#include "noc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "noc/error.hpp"

namespace noc::oracle {

namespace {

struct Frozen {
  int S = 0;
  int O = 0;
  int A = 0;
  int F = 0;
  Eigen::MatrixXd pi_over;          // (s, o)
  std::vector<Eigen::VectorXd> pi;  // pair -> pi_o(. | s)
  Eigen::MatrixXd beta;             // (s, o), clamped
  Eigen::MatrixXd sigma;            // (s, o), unclamped sigmoid
  std::vector<std::vector<int>> support;  // s -> nonzero feature indices

  int pair(int s, int o) const { return s * O + o; }
};

void check_shapes(const TabularMdp& mdp, const OptionParams& params, const FeatureMap& fmap,
                  const PolicyOverOptions& pi_over) {
  const long pairs = static_cast<long>(mdp.num_states) * params.num_options;
  if (pairs > kMaxPairs) {
    throw Error(ErrorCode::instance_too_large,
                fmt::format("{} states x {} options = {} pairs exceeds the oracle cap of {}",
                            mdp.num_states, params.num_options, pairs, kMaxPairs));
  }
  if (fmap.num_states() != mdp.num_states || fmap.dimension() != params.num_features ||
      params.num_actions != mdp.num_actions || pi_over.num_states() != mdp.num_states ||
      pi_over.num_options() != params.num_options || !params.is_valid()) {
    throw Error(ErrorCode::bad_shape, "mdp, features, option parameters and pi_O disagree in shape");
  }
}

Frozen freeze(const TabularMdp& mdp, const OptionParams& params, const FeatureMap& fmap,
              const PolicyOverOptions& pi_over) {
  check_shapes(mdp, params, fmap, pi_over);
  Frozen fz;
  fz.S = mdp.num_states;
  fz.O = params.num_options;
  fz.A = mdp.num_actions;
  fz.F = params.num_features;
  fz.pi_over = pi_over.materialize();
  fz.pi.resize(static_cast<std::size_t>(fz.S * fz.O));
  fz.beta.resize(fz.S, fz.O);
  fz.sigma.resize(fz.S, fz.O);
  fz.support.resize(static_cast<std::size_t>(fz.S));
  for (int s = 0; s < fz.S; ++s) {
    const auto x = fmap.evaluate(s);
    for (int f = 0; f < fz.F; ++f) {
      if (x(f) != 0.0) fz.support[static_cast<std::size_t>(s)].push_back(f);
    }
    for (int o = 0; o < fz.O; ++o) {
      fz.pi[static_cast<std::size_t>(fz.pair(s, o))] = intra_option_probs(params, fmap, o, s);
      fz.beta(s, o) = termination_prob(params, fmap, o, s);
      fz.sigma(s, o) = sigmoid(termination_logit(params, fmap, o, s));
    }
  }
  return fz;
}

std::vector<int> live_pairs(const AugmentedChain& chain) {
  std::vector<int> out;
  for (int p = 0; p < chain.num_pairs(); ++p) {
    if (chain.live[static_cast<std::size_t>(p)]) out.push_back(p);
  }
  return out;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& k, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = k(idx[i], idx[j]);
  }
  return out;
}

Eigen::FullPivLU<Eigen::MatrixXd> factor(const Eigen::MatrixXd& k_live, double gamma) {
  const auto n = k_live.rows();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) - gamma * k_live);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::singular_system,
                fmt::format("I - gamma K is singular on {} live pairs (gamma = {})", n, gamma));
  }
  return lu;
}

// Row vector x (over all pairs) times (I - gamma K_live)^{-1}, zero off the live set.
Eigen::VectorXd solve_left(const Eigen::MatrixXd& k, const std::vector<int>& idx, double gamma,
                           const Eigen::VectorXd& x) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  if (n == 0) return out;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = x(idx[i]);
  const Eigen::MatrixXd kt = restrict(k, idx).transpose();
  const Eigen::VectorXd y = factor(kt, gamma).solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) out(idx[i]) = y(i);
  return out;
}

Eigen::VectorXd mask_live(Eigen::VectorXd v, const AugmentedChain& chain) {
  for (int p = 0; p < chain.num_pairs(); ++p) {
    if (!chain.live[static_cast<std::size_t>(p)]) v(p) = 0.0;
  }
  return v;
}

double total(const Eigen::VectorXd& v, Normalization norm) {
  if (norm == Normalization::unnormalized) return 1.0;
  const double sum = v.sum();
  return sum > 0.0 ? sum : 1.0;
}

// 1 - beta' = beta (1 - pi_O); the continuation probability uses the clamped beta.
double keep_prob(const Frozen& fz, int s, int o) {
  return 1.0 - fz.beta(s, o) * (1.0 - fz.pi_over(s, o));
}

}  // namespace

// ---------------------------------------------------------------- chain

ChainStart ChainStart::pair(Kind kind, int s, int o, int num_states, int num_options) {
  if (s < 0 || s >= num_states || o < 0 || o >= num_options) {
    throw Error(ErrorCode::bad_shape, fmt::format("start pair ({}, {}) out of range", s, o));
  }
  ChainStart c;
  c.kind = kind;
  c.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_states) * num_options);
  c.weights(s * num_options + o) = 1.0;
  return c;
}

ChainStart ChainStart::from_initial(const TabularMdp& mdp, const PolicyOverOptions& pi_over,
                                    Kind kind) {
  const int num_options = pi_over.num_options();
  ChainStart c;
  c.kind = kind;
  c.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mdp.num_states) * num_options);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int o = 0; o < num_options; ++o) {
      c.weights(s * num_options + o) = mdp.initial_dist[static_cast<std::size_t>(s)] * pi_over.prob(s, o);
    }
  }
  return c;
}

AugmentedChain build_chain(const TabularMdp& mdp, const OptionParams& params,
                           const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                           const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const int n = fz.S * fz.O;
  if (start.weights.size() != n) {
    throw Error(ErrorCode::bad_shape,
                fmt::format("start has {} weights, chain has {} pairs", start.weights.size(), n));
  }
  AugmentedChain chain;
  chain.num_states = fz.S;
  chain.num_options = fz.O;
  chain.start = start;
  chain.live.assign(static_cast<std::size_t>(n), true);
  chain.move = Eigen::MatrixXd::Zero(n, n);
  chain.continuation = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < fz.S; ++s) {
    const bool terminal = mdp.is_terminal(s);
    for (int o = 0; o < fz.O; ++o) {
      const int p = fz.pair(s, o);
      if (terminal) {
        chain.live[static_cast<std::size_t>(p)] = false;
        chain.move(p, p) = 1.0;
        chain.continuation(p, p) = 1.0;
        continue;
      }
      const Eigen::VectorXd& pi = fz.pi[static_cast<std::size_t>(p)];
      for (int a = 0; a < fz.A; ++a) {
        for (int sn = 0; sn < fz.S; ++sn) chain.move(p, fz.pair(sn, o)) += pi(a) * mdp.p(s, a, sn);
      }
      const double beta = fz.beta(s, o);
      for (int on = 0; on < fz.O; ++on) {
        chain.continuation(p, fz.pair(s, on)) = beta * fz.pi_over(s, on) + (on == o ? 1.0 - beta : 0.0);
      }
    }
  }
  chain.transition = chain.move * chain.continuation;
  chain.arrival = chain.continuation * chain.move;
  return chain;
}

Weighting exact_mu(const AugmentedChain& chain, double gamma) {
  const std::vector<int> idx = live_pairs(chain);
  Weighting w;
  if (chain.start.kind == ChainStart::Kind::active) {
    w.mu = solve_left(chain.transition, idx, gamma, mask_live(chain.start.weights, chain));
    w.mu_shifted = mask_live(gamma * (chain.move.transpose() * w.mu), chain);
  } else {
    const Eigen::VectorXd entry = chain.continuation.transpose() * chain.start.weights;
    w.mu = solve_left(chain.transition, idx, gamma, mask_live(entry, chain));
    w.mu_shifted = mask_live(chain.start.weights + gamma * (chain.move.transpose() * w.mu), chain);
  }
  return w;
}

Eigen::VectorXd exact_mu_shifted_direct(const AugmentedChain& chain, double gamma) {
  const std::vector<int> idx = live_pairs(chain);
  Eigen::VectorXd first = chain.start.weights;
  if (chain.start.kind == ChainStart::Kind::active) {
    first = gamma * (chain.move.transpose() * mask_live(chain.start.weights, chain));
  }
  return solve_left(chain.arrival, idx, gamma, mask_live(first, chain));
}

// ---------------------------------------------------------------- values

ExactSolution exact_values(const TabularMdp& mdp, const OptionParams& params,
                           const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                           const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const AugmentedChain chain = build_chain(mdp, params, fmap, pi_over, start);
  const std::vector<int> idx = live_pairs(chain);
  const double gamma = mdp.gamma;
  const int n = chain.num_pairs();

  ExactSolution sol;
  sol.weighting = exact_mu(chain, gamma);

  Eigen::VectorXd rbar = Eigen::VectorXd::Zero(n);
  for (int p : idx) {
    const int s = p / fz.O;
    for (int a = 0; a < fz.A; ++a) rbar(p) += fz.pi[static_cast<std::size_t>(p)](a) * mdp.expected_reward(s, a);
  }
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  if (!idx.empty()) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd r_live(m);
    for (Eigen::Index i = 0; i < m; ++i) r_live(i) = rbar(idx[i]);
    const Eigen::VectorXd q_live = factor(restrict(chain.transition, idx), gamma).solve(r_live);
    for (Eigen::Index i = 0; i < m; ++i) q(idx[i]) = q_live(i);
  }
  const Eigen::VectorXd u = mask_live(chain.continuation * q, chain);

  sol.q_omega.resize(fz.S, fz.O);
  sol.u.resize(fz.S, fz.O);
  sol.v = Eigen::VectorXd::Zero(fz.S);
  for (int s = 0; s < fz.S; ++s) {
    for (int o = 0; o < fz.O; ++o) {
      sol.q_omega(s, o) = q(fz.pair(s, o));
      sol.u(s, o) = u(fz.pair(s, o));
      sol.v(s) += fz.pi_over(s, o) * q(fz.pair(s, o));
    }
  }
  sol.a_omega = sol.q_omega.colwise() - sol.v;
  sol.a_omega_continued = sol.u - sol.q_omega;

  sol.q_u = Eigen::MatrixXd::Zero(n, fz.A);
  sol.a_u = Eigen::MatrixXd::Zero(n, fz.A);
  double residual = 0.0;
  for (int p : idx) {
    const int s = p / fz.O;
    const int o = p % fz.O;
    for (int a = 0; a < fz.A; ++a) {
      double value = 0.0;
      for (int sn = 0; sn < fz.S; ++sn) {
        const double prob = mdp.p(s, a, sn);
        if (prob == 0.0) continue;
        const double boot = mdp.is_terminal(sn) ? 0.0 : gamma * sol.u(sn, o);
        value += prob * (mdp.r(s, a, sn) + boot);
      }
      sol.q_u(p, a) = value;
      sol.a_u(p, a) = value - q(p);
    }
    const double via_actions = fz.pi[static_cast<std::size_t>(p)].dot(sol.q_u.row(p).transpose());
    residual = std::max(residual, std::abs(via_actions - q(p)));
    residual = std::max(residual, std::abs(rbar(p) + gamma * chain.transition.row(p).dot(q) - q(p)));
    const double beta = fz.beta(s, o);
    residual = std::max(residual, std::abs((1.0 - beta) * q(p) + beta * sol.v(s) - u(p)));
  }
  sol.max_bellman_residual = residual;

  sol.j_value = start.kind == ChainStart::Kind::active ? start.weights.dot(q) : start.weights.dot(u);
  return sol;
}

double j_value(const TabularMdp& mdp, const OptionParams& params, const FeatureMap& fmap,
               const PolicyOverOptions& pi_over, const ChainStart& start) {
  return exact_values(mdp, params, fmap, pi_over, start).j_value;
}

// ---------------------------------------------------------------- gradients

Eigen::VectorXd exact_policy_gradient(const TabularMdp& mdp, const OptionParams& params,
                                      const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                      const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.theta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto x = fmap.evaluate(s);
    for (int o = 0; o < fz.O; ++o) {
      const int p = fz.pair(s, o);
      const double w = sol.weighting.mu(p);
      if (w == 0.0) continue;
      const Eigen::VectorXd& pi = fz.pi[static_cast<std::size_t>(p)];
      // sum_a d pi_a q_U(a) = sum_a pi_a q_U(a) (e_a - pi) for each feature.
      const Eigen::VectorXd c = pi.cwiseProduct(sol.q_u.row(p).transpose());
      const Eigen::VectorXd dir = c - pi * c.sum();
      for (int f : fz.support[static_cast<std::size_t>(s)]) {
        grad.segment(params.theta_index(o, f, 0), fz.A) += w * x(f) * dir;
      }
    }
  }
  return grad;
}

Eigen::VectorXd exact_termination_gradient(const TabularMdp& mdp, const OptionParams& params,
                                           const FeatureMap& fmap,
                                           const PolicyOverOptions& pi_over,
                                           const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.vartheta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const double w = sol.weighting.mu_shifted(fz.pair(s, o));
      if (w == 0.0) continue;
      grad -= w * sol.a_omega(s, o) * grad_termination(params, fmap, o, s);
    }
  }
  return grad;
}

// ---------------------------------------------------------------- Fisher matrices

Eigen::MatrixXd exact_fim_theta(const TabularMdp& mdp, const OptionParams& params,
                                const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                const ChainStart& start, Normalization norm) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const AugmentedChain chain = build_chain(mdp, params, fmap, pi_over, start);
  const Eigen::VectorXd mu = exact_mu(chain, mdp.gamma).mu;
  const double scale = 1.0 / total(mu, norm);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(params.theta_size(), params.theta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto x = fmap.evaluate(s);
    const auto& support = fz.support[static_cast<std::size_t>(s)];
    for (int o = 0; o < fz.O; ++o) {
      const int p = fz.pair(s, o);
      const double w = mu(p) * scale;
      if (w == 0.0) continue;
      const Eigen::VectorXd& pi = fz.pi[static_cast<std::size_t>(p)];
      const Eigen::MatrixXd cat = Eigen::MatrixXd(pi.asDiagonal()) - pi * pi.transpose();
      for (int f1 : support) {
        for (int f2 : support) {
          g.block(params.theta_index(o, f1, 0), params.theta_index(o, f2, 0), fz.A, fz.A) +=
              (w * x(f1) * x(f2)) * cat;
        }
      }
    }
  }
  return g;
}

Eigen::MatrixXd exact_fim_vartheta(const TabularMdp& mdp, const OptionParams& params,
                                   const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                   const ChainStart& start, Normalization norm) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const AugmentedChain chain = build_chain(mdp, params, fmap, pi_over, start);
  const Eigen::VectorXd mu = exact_mu(chain, mdp.gamma).mu_shifted;
  const double scale = 1.0 / total(mu, norm);
  const PolicyOverOptions table = PolicyOverOptions::table(fz.pi_over);
  const auto nf = static_cast<Eigen::Index>(fz.F);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(params.vartheta_size(), params.vartheta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const double w = mu(fz.pair(s, o)) * scale;
      if (w == 0.0) continue;
      const auto off = params.vartheta_index(o, 0);
      const Eigen::VectorXd h = grad_log_termination(params, fmap, o, s).segment(off, nf);
      const Eigen::VectorXd hc = grad_log_continuation(params, fmap, table, o, s).segment(off, nf);
      g.block(off, off, nf, nf) -= w * h * hc.transpose();
    }
  }
  return g;
}

Eigen::MatrixXd exact_fim_vartheta_symmetric_form(const TabularMdp& mdp,
                                                  const OptionParams& params,
                                                  const FeatureMap& fmap,
                                                  const PolicyOverOptions& pi_over,
                                                  const ChainStart& start, Normalization norm) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const AugmentedChain chain = build_chain(mdp, params, fmap, pi_over, start);
  const Eigen::VectorXd mu = exact_mu(chain, mdp.gamma).mu_shifted;
  const double scale = 1.0 / total(mu, norm);
  const auto nf = static_cast<Eigen::Index>(fz.F);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(params.vartheta_size(), params.vartheta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const double w = mu(fz.pair(s, o)) * scale;
      if (w == 0.0) continue;
      const auto off = params.vartheta_index(o, 0);
      const Eigen::VectorXd db = grad_termination(params, fmap, o, s).segment(off, nf);
      const double c = (1.0 - fz.pi_over(s, o)) / (fz.sigma(s, o) * keep_prob(fz, s, o));
      g.block(off, off, nf, nf) += (w * c) * db * db.transpose();
    }
  }
  return g;
}

Eigen::MatrixXd mc_fim_estimate(const TabularMdp& mdp, const OptionParams& params,
                                const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                const ChainStart& start, Manifold manifold, int horizon,
                                int num_paths, Rng& rng) {
  if (horizon < 1 || num_paths < 1) {
    throw Error(ErrorCode::config, "Monte-Carlo FIM needs horizon >= 1 and at least one path");
  }
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const AugmentedChain chain = build_chain(mdp, params, fmap, pi_over, start);
  const PolicyOverOptions table = PolicyOverOptions::table(fz.pi_over);
  const int n = chain.num_pairs();
  const bool theta = manifold == Manifold::theta;
  const Eigen::Index dim = theta ? params.theta_size() : params.vartheta_size();

  // Scores per (pair, action) for theta; per pair (switch, continue) for vartheta.
  std::vector<Eigen::VectorXd> score_action;
  std::vector<Eigen::VectorXd> score_switch;
  std::vector<Eigen::VectorXd> score_continue;
  for (int p = 0; p < n; ++p) {
    const int s = p / fz.O;
    const int o = p % fz.O;
    if (theta) {
      for (int a = 0; a < fz.A; ++a) score_action.push_back(grad_log_intra_option(params, fmap, o, s, a));
    } else {
      score_switch.push_back(grad_log_termination(params, fmap, o, s));
      score_continue.push_back(grad_log_continuation(params, fmap, table, o, s));
    }
  }
  std::vector<double> cont_row(static_cast<std::size_t>(fz.O));
  const std::span<const double> start_w(chain.start.weights.data(), static_cast<std::size_t>(n));
  const bool arrival_start = chain.start.kind == ChainStart::Kind::arrival;
  const long step_cap = 1000L * horizon;

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd sum(dim);
  int used = 0;
  for (int path = 0; path < num_paths; ++path) {
    sum.setZero();
    int count = 0;
    int s = 0;
    int o = 0;
    // Draws the option at an arrival pair (s, o) and scores it.
    auto arrive = [&](int sa, int oa) {
      for (int on = 0; on < fz.O; ++on) cont_row[static_cast<std::size_t>(on)] = chain.continuation(fz.pair(sa, oa), fz.pair(sa, on));
      const int on = rng.categorical(cont_row);
      if (!theta) {
        const int p = fz.pair(sa, oa);
        sum += on == oa ? score_continue[static_cast<std::size_t>(p)] : score_switch[static_cast<std::size_t>(p)];
        ++count;
      }
      s = sa;
      o = on;
    };
    auto restart = [&]() {
      const int p = rng.categorical(start_w);
      if (arrival_start) {
        arrive(p / fz.O, p % fz.O);
      } else {
        s = p / fz.O;
        o = p % fz.O;
      }
    };
    restart();
    for (long step = 0; step < step_cap && count < horizon; ++step) {
      const int p = fz.pair(s, o);
      const Eigen::VectorXd& pi = fz.pi[static_cast<std::size_t>(p)];
      const int a = rng.categorical({pi.data(), static_cast<std::size_t>(pi.size())});
      if (theta) {
        sum += score_action[static_cast<std::size_t>(p * fz.A + a)];
        ++count;
      }
      const int sn = rng.categorical(mdp.transition_row(s, a));
      if (count >= horizon) break;
      if (mdp.is_terminal(sn) || !rng.bernoulli(mdp.gamma)) {
        restart();
      } else {
        arrive(sn, o);
      }
    }
    if (count == 0) continue;
    acc.noalias() += (sum / static_cast<double>(count)) * sum.transpose();
    ++used;
  }
  if (used > 0) acc /= static_cast<double>(used);
  return acc;
}

// ---------------------------------------------------------------- compatible approximation

Eigen::VectorXd least_squares_eta(const TabularMdp& mdp, const OptionParams& params,
                                  const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                  const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> targets;
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const int p = fz.pair(s, o);
      for (int a = 0; a < fz.A; ++a) {
        const double w = sol.weighting.mu(p) * fz.pi[static_cast<std::size_t>(p)](a);
        if (w <= 0.0) continue;
        const double root = std::sqrt(w);
        rows.push_back(root * grad_log_intra_option(params, fmap, o, s, a));
        targets.push_back(root * sol.a_u(p, a));
      }
    }
  }
  if (rows.empty()) return Eigen::VectorXd::Zero(params.theta_size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), params.theta_size());
  Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    target(static_cast<Eigen::Index>(i)) = targets[i];
  }
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(design).solve(target);
}

Eigen::VectorXd least_squares_phi(const TabularMdp& mdp, const OptionParams& params,
                                  const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                  const ChainStart& start) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  const PolicyOverOptions table = PolicyOverOptions::table(fz.pi_over);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> targets;
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const double w = sol.weighting.mu_shifted(fz.pair(s, o));
      if (w <= 0.0) continue;
      const double keep = keep_prob(fz, s, o);
      if (1.0 - keep < 1e-9) {
        throw Error(ErrorCode::degenerate_likelihood,
                    fmt::format("option {} cannot stop at state {} (1 - beta' = {:.3g})", o, s, 1.0 - keep));
      }
      const double root = std::sqrt(w * keep / (1.0 - keep));
      rows.push_back(root * grad_log_continuation(params, fmap, table, o, s));
      targets.push_back(root * sol.a_omega_continued(s, o));
    }
  }
  if (rows.empty()) return Eigen::VectorXd::Zero(params.vartheta_size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), params.vartheta_size());
  Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    target(static_cast<Eigen::Index>(i)) = targets[i];
  }
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(design).solve(target);
}

Eigen::VectorXd epsilon_eta_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     const ChainStart& start, const Eigen::VectorXd& eta) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.theta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const int p = fz.pair(s, o);
      for (int a = 0; a < fz.A; ++a) {
        const double w = sol.weighting.mu(p) * fz.pi[static_cast<std::size_t>(p)](a);
        if (w == 0.0) continue;
        const Eigen::VectorXd g = grad_log_intra_option(params, fmap, o, s, a);
        grad += w * (g.dot(eta) - sol.a_u(p, a)) * g;
      }
    }
  }
  return grad;
}

Eigen::VectorXd epsilon_phi_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     const ChainStart& start, const Eigen::VectorXd& phi) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const ExactSolution sol = exact_values(mdp, params, fmap, pi_over, start);
  const PolicyOverOptions table = PolicyOverOptions::table(fz.pi_over);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.vartheta_size());
  for (int s = 0; s < fz.S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int o = 0; o < fz.O; ++o) {
      const double w = sol.weighting.mu_shifted(fz.pair(s, o));
      if (w == 0.0) continue;
      const Eigen::VectorXd h = grad_log_termination(params, fmap, o, s);
      const Eigen::VectorXd hc = grad_log_continuation(params, fmap, table, o, s);
      grad += w * (-hc.dot(phi) - fz.beta(s, o) * sol.a_omega(s, o)) * h;
    }
  }
  return grad;
}

Eigen::VectorXd finite_diff_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     Manifold wrt, const ChainStart& start, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::config, "finite-difference step must be positive");
  const PolicyOverOptions table = PolicyOverOptions::table(pi_over.materialize());
  OptionParams probe = params;
  Eigen::VectorXd& coords = wrt == Manifold::theta ? probe.theta : probe.vartheta;
  Eigen::VectorXd grad(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    const double saved = coords(i);
    coords(i) = saved + step;
    const double up = j_value(mdp, probe, fmap, table, start);
    coords(i) = saved - step;
    const double down = j_value(mdp, probe, fmap, table, start);
    coords(i) = saved;
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

SingleStepFisher single_step_fisher(const OptionParams& params, const FeatureMap& fmap,
                                    const PolicyOverOptions& pi_over, Manifold manifold, int o,
                                    int s) {
  const auto x = fmap.evaluate(s);
  const Eigen::MatrixXd xx = x * x.transpose();
  SingleStepFisher out;
  if (manifold == Manifold::theta) {
    const Eigen::VectorXd pi = intra_option_probs(params, fmap, o, s);
    const auto n = params.theta_size();
    out.score_outer = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < params.num_actions; ++a) {
      const Eigen::VectorXd g = grad_log_intra_option(params, fmap, o, s, a);
      out.score_outer += pi(a) * g * g.transpose();
    }
    // The softmax Hessian does not depend on the sampled action.
    const Eigen::MatrixXd cat = Eigen::MatrixXd(pi.asDiagonal()) - pi * pi.transpose();
    out.negative_hessian = Eigen::MatrixXd::Zero(n, n);
    const auto block = params.theta_block_size();
    for (int f1 = 0; f1 < params.num_features; ++f1) {
      for (int f2 = 0; f2 < params.num_features; ++f2) {
        out.negative_hessian.block(o * block + static_cast<Eigen::Index>(f1) * params.num_actions,
                                   o * block + static_cast<Eigen::Index>(f2) * params.num_actions,
                                   params.num_actions, params.num_actions) = xx(f1, f2) * cat;
      }
    }
    return out;
  }

  // Next option at arrival pair (s, o): stay with probability beta', or
  // stop and switch to o' != o with probability beta pi_O(s, o').
  const double sig = sigmoid(termination_logit(params, fmap, o, s));
  const double pi_o = pi_over.prob(s, o);
  const double keep = 1.0 - sig * (1.0 - pi_o);
  const auto n = params.vartheta_size();
  const auto nf = static_cast<Eigen::Index>(params.num_features);
  const auto off = params.vartheta_index(o, 0);
  const Eigen::VectorXd h = (1.0 - sig) * x;
  const Eigen::VectorXd dkeep = -(1.0 - pi_o) * sig * (1.0 - sig) * x;
  const Eigen::VectorXd hc = dkeep / keep;
  const double p_switch = sig * (1.0 - pi_o);

  out.score_outer = Eigen::MatrixXd::Zero(n, n);
  out.score_outer.block(off, off, nf, nf) = keep * hc * hc.transpose() + p_switch * h * h.transpose();

  const Eigen::MatrixXd hess_switch = -sig * (1.0 - sig) * xx;
  const Eigen::MatrixXd d2keep = -(1.0 - pi_o) * sig * (1.0 - sig) * (1.0 - 2.0 * sig) * xx;
  const Eigen::MatrixXd hess_keep = d2keep / keep - dkeep * dkeep.transpose() / (keep * keep);
  out.negative_hessian = Eigen::MatrixXd::Zero(n, n);
  out.negative_hessian.block(off, off, nf, nf) = -(keep * hess_keep + p_switch * hess_switch);
  return out;
}

// ---------------------------------------------------------------- misc

CriticTables exact_critic(const ExactSolution& solution, double gamma) {
  CriticTables c = CriticTables::zeros(static_cast<int>(solution.q_omega.rows()),
                                       static_cast<int>(solution.q_omega.cols()), gamma);
  c.q_omega = solution.q_omega;
  return c;
}

namespace {

template <typename StepValue>
double backward_induction(const TabularMdp& mdp, int horizon, bool discounted, StepValue&& best) {
  const double g = discounted ? mdp.gamma : 1.0;
  Eigen::VectorXd next = Eigen::VectorXd::Zero(mdp.num_states);
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(mdp.num_states);
    Eigen::VectorXd q_a(mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
      if (mdp.is_terminal(s)) continue;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double value = 0.0;
        for (int sn = 0; sn < mdp.num_states; ++sn) {
          const double prob = mdp.p(s, a, sn);
          if (prob != 0.0) value += prob * (mdp.r(s, a, sn) + g * next(sn));
        }
        q_a(a) = value;
      }
      cur(s) = best(s, q_a);
    }
    next = cur;
  }
  double out = 0.0;
  for (int s = 0; s < mdp.num_states; ++s) out += mdp.initial_dist[static_cast<std::size_t>(s)] * next(s);
  return out;
}

}  // namespace

double optimal_finite_horizon_return(const TabularMdp& mdp, int horizon, bool discounted) {
  return backward_induction(mdp, horizon, discounted,
                            [](int, const Eigen::VectorXd& q_a) { return q_a.maxCoeff(); });
}

double option_level_optimum(const TabularMdp& mdp, const OptionParams& params,
                            const FeatureMap& fmap, int horizon, bool discounted) {
  std::vector<Eigen::VectorXd> pi;
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int o = 0; o < params.num_options; ++o) pi.push_back(intra_option_probs(params, fmap, o, s));
  }
  return backward_induction(mdp, horizon, discounted, [&](int s, const Eigen::VectorXd& q_a) {
    double best = -std::numeric_limits<double>::infinity();
    for (int o = 0; o < params.num_options; ++o) {
      best = std::max(best, pi[static_cast<std::size_t>(s * params.num_options + o)].dot(q_a));
    }
    return best;
  });
}

// ---------------------------------------------------------------- TD consistency

namespace {

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double standard_error() const {
    return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
};

}  // namespace

TdConsistency td_consistency(const TabularMdp& mdp, const OptionParams& params,
                             const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                             OmegaTdForm omega_form, long num_steps, Rng& rng) {
  const Frozen fz = freeze(mdp, params, fmap, pi_over);
  const PolicyOverOptions table = PolicyOverOptions::table(fz.pi_over);
  const ExactSolution sol =
      exact_values(mdp, params, fmap, table, ChainStart::from_initial(mdp, table));
  const double gamma = mdp.gamma;
  const int cap = mdp.max_episode_steps.value_or(1000);

  std::vector<Welford> du(static_cast<std::size_t>(fz.S * fz.O * fz.A));
  std::vector<Welford> dw(static_cast<std::size_t>(fz.S * fz.O));
  std::vector<double> row(static_cast<std::size_t>(fz.O));

  auto draw_option = [&](int s) {
    for (int o = 0; o < fz.O; ++o) row[static_cast<std::size_t>(o)] = fz.pi_over(s, o);
    return rng.categorical(row);
  };

  int s = sample_initial(mdp, rng);
  int o = draw_option(s);
  int o_prev = -1;
  int steps_in_episode = 0;
  for (long step = 0; step < num_steps; ++step) {
    const int p = fz.pair(s, o);
    const Eigen::VectorXd& pi = fz.pi[static_cast<std::size_t>(p)];
    const int a = rng.categorical({pi.data(), static_cast<std::size_t>(pi.size())});
    const Transition tr = sample_transition(mdp, s, a, rng);
    const bool terminal = mdp.is_terminal(tr.next_state);
    const double u_next = terminal ? 0.0 : sol.u(tr.next_state, o);
    const double v_next = terminal ? 0.0 : sol.v(tr.next_state);
    du[static_cast<std::size_t>(p * fz.A + a)].add(tr.reward + gamma * u_next - sol.q_omega(s, o));
    if (o_prev == o) {
      const double here = omega_form == OmegaTdForm::scaled_baseline ? gamma * sol.v(s) : sol.v(s);
      dw[static_cast<std::size_t>(p)].add(tr.reward + gamma * v_next - here);
    }
    ++steps_in_episode;
    if (terminal || steps_in_episode >= cap) {
      s = sample_initial(mdp, rng);
      o = draw_option(s);
      o_prev = -1;
      steps_in_episode = 0;
      continue;
    }
    o_prev = o;
    s = tr.next_state;
    if (rng.bernoulli(fz.beta(s, o))) o = draw_option(s);
  }

  TdConsistency out;
  for (int s2 = 0; s2 < fz.S; ++s2) {
    for (int o2 = 0; o2 < fz.O; ++o2) {
      const int p = fz.pair(s2, o2);
      for (int a = 0; a < fz.A; ++a) {
        const Welford& w = du[static_cast<std::size_t>(p * fz.A + a)];
        out.delta_u.push_back({s2, o2, a, w.n, w.mean, w.standard_error(), sol.a_u(p, a)});
      }
      const Welford& w = dw[static_cast<std::size_t>(p)];
      out.delta_omega.push_back({s2, o2, -1, w.n, w.mean, w.standard_error(), sol.a_omega(s2, o2)});
    }
  }
  return out;
}

// ---------------------------------------------------------------- random instances

RandomInstance random_instance(int num_states, int num_actions, int num_options, double gamma,
                               Rng& rng, double p_min) {
  TabularMdp mdp = TabularMdp::make(num_states, num_actions);
  mdp.gamma = gamma;
  // Mix a random simplex point with the uniform floor so every entry is at least `floor`.
  auto draw_simplex = [&](int n, double* out) {
    const double floor = std::min(p_min, 0.5 / n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = rng.uniform() + 1e-3;
      sum += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] = floor + (1.0 - n * floor) * out[i] / sum;
  };
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      draw_simplex(num_states, mdp.transition.data() + mdp.index(s, a, 0));
      for (int sn = 0; sn < num_states; ++sn) mdp.reward[mdp.index(s, a, sn)] = 2.0 * rng.uniform() - 1.0;
    }
  }
  draw_simplex(num_states, mdp.initial_dist.data());

  OptionParams params = OptionParams::zeros(num_options, num_states, num_actions);
  for (Eigen::Index i = 0; i < params.theta.size(); ++i) params.theta(i) = 2.0 * rng.uniform() - 1.0;
  for (Eigen::Index i = 0; i < params.vartheta.size(); ++i) params.vartheta(i) = 4.0 * rng.uniform() - 2.0;

  Eigen::MatrixXd pi_o(num_states, num_options);
  std::vector<double> buf(static_cast<std::size_t>(num_options));
  for (int s = 0; s < num_states; ++s) {
    draw_simplex(num_options, buf.data());
    for (int o = 0; o < num_options; ++o) pi_o(s, o) = buf[static_cast<std::size_t>(o)];
  }
  ensure_valid(mdp);
  return RandomInstance{std::move(mdp), std::move(params), FeatureMap::one_hot(num_states),
                        PolicyOverOptions::table(std::move(pi_o))};
}

}  // namespace noc::oracle
