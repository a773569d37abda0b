#pragma once

// Exact linear-algebra solutions for small option MDPs, used as ground truth
// for the learners and for the natural-gradient identities.
//
// State-option pairs are flattened as s * num_options + o. Two Markov chains
// over pairs are used:
//
//   active chain   (s, o) : o is active while acting in s
//                  K((s,o) -> (s',o')) = sum_a pi_o(a|s) P(s'|s,a) C(o'|s',o)
//   arrival chain  (s', o): o was active when s' was entered
//                  K'((s',o) -> (s'',o')) = C(o'|s',o) sum_a pi_o'(a|s') P(s''|s',a)
//
// with C(o'|s',o) = (1 - beta_o(s')) 1[o' = o] + beta_o(s') pi_O(s', o').
// Terminal states end the process: their pairs carry no weight and no value.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "noc/critic.hpp"
#include "noc/features.hpp"
#include "noc/mdp.hpp"
#include "noc/options.hpp"
#include "noc/rng.hpp"

namespace noc::oracle {

inline constexpr int kMaxPairs = 500;

/// Initial condition of the objective. An active start (s0, o0) gives the
/// objective sum x0(s,o) q(s,o); an arrival start (s1, o0) gives
/// sum a0(s,o) u(o,s).
struct ChainStart {
  enum class Kind { active, arrival };

  Kind kind = Kind::active;
  Eigen::VectorXd weights;  // over flattened pairs, sums to 1

  static ChainStart pair(Kind kind, int s, int o, int num_states, int num_options);
  /// d0(s) pi_O(s, o).
  static ChainStart from_initial(const TabularMdp& mdp, const PolicyOverOptions& pi_over,
                                 Kind kind = Kind::active);
};

struct AugmentedChain {
  int num_states = 0;
  int num_options = 0;
  Eigen::MatrixXd transition;    // K, active chain; terminal rows are self loops
  Eigen::MatrixXd arrival;       // K', arrival chain; terminal rows are self loops
  Eigen::MatrixXd move;          // (s,o) -> (s',o): sum_a pi_o(a|s) P(s'|s,a)
  Eigen::MatrixXd continuation;  // (s,o) -> (s,o'): C(o'|s,o)
  std::vector<bool> live;        // pair's state is non-terminal
  ChainStart start;

  int pair(int s, int o) const { return s * num_options + o; }
  int num_pairs() const { return num_states * num_options; }
};

/// pi_O is frozen into an explicit table for the chain.
AugmentedChain build_chain(const TabularMdp& mdp, const OptionParams& params,
                           const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                           const ChainStart& start);

struct Weighting {
  /// sum_t gamma^t Pr(S_t = s, O_t = o), over active pairs.
  Eigen::VectorXd mu;
  /// Discounted weighting of arrival pairs (S_{t+1} = s', O_t = o) for which
  /// the termination gradient is d J / d vartheta = -sum mu_shifted dbeta a_O.
  /// Arrival start: a0 (I - gamma K')^{-1}. Active start: gamma mu M, since
  /// the first arrival is already one discount step away.
  Eigen::VectorXd mu_shifted;
};

/// Throws singular_system when I - gamma K is not invertible on live pairs.
Weighting exact_mu(const AugmentedChain& chain, double gamma);

/// Shifted weighting through the arrival chain directly; must equal
/// exact_mu(...).mu_shifted. Exposed for cross-checking the two routes.
Eigen::VectorXd exact_mu_shifted_direct(const AugmentedChain& chain, double gamma);

struct ExactSolution {
  Weighting weighting;
  Eigen::MatrixXd q_u;                 // (pair, action)
  Eigen::MatrixXd q_omega;             // (state, option)
  Eigen::VectorXd v;                   // state
  Eigen::MatrixXd u;                   // (state, option): u(o, s)
  Eigen::MatrixXd a_u;                 // (pair, action)
  Eigen::MatrixXd a_omega;             // (state, option)
  Eigen::MatrixXd a_omega_continued;   // (state, option): u - q_omega
  double j_value = 0.0;

  /// Largest Bellman residual over q_omega, q_u, v, u.
  double max_bellman_residual = 0.0;
};

ExactSolution exact_values(const TabularMdp& mdp, const OptionParams& params,
                           const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                           const ChainStart& start);

double j_value(const TabularMdp& mdp, const OptionParams& params, const FeatureMap& fmap,
               const PolicyOverOptions& pi_over, const ChainStart& start);

/// sum_{s,o} mu(s,o) sum_a d pi_o(s,a)/d theta q_U(s,o,a).
Eigen::VectorXd exact_policy_gradient(const TabularMdp& mdp, const OptionParams& params,
                                      const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                      const ChainStart& start);

/// -sum_{s',o} mu_shifted(s',o) d beta_o(s')/d vartheta a_O(s',o).
Eigen::VectorXd exact_termination_gradient(const TabularMdp& mdp, const OptionParams& params,
                                           const FeatureMap& fmap,
                                           const PolicyOverOptions& pi_over,
                                           const ChainStart& start);

enum class Normalization { normalized, unnormalized };

/// sum mu(s,o) pi_o(s,a) (d ln pi)(d ln pi)^T; normalized uses mu / sum(mu).
Eigen::MatrixXd exact_fim_theta(const TabularMdp& mdp, const OptionParams& params,
                                const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                const ChainStart& start,
                                Normalization norm = Normalization::normalized);

/// -sum mu_shifted(s',o) (d ln beta)(d ln beta')^T.
Eigen::MatrixXd exact_fim_vartheta(const TabularMdp& mdp, const OptionParams& params,
                                   const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                   const ChainStart& start,
                                   Normalization norm = Normalization::normalized);

/// Same matrix as sum mu_shifted (1 - pi_O)/(beta beta') (d beta)(d beta)^T.
Eigen::MatrixXd exact_fim_vartheta_symmetric_form(const TabularMdp& mdp,
                                                  const OptionParams& params,
                                                  const FeatureMap& fmap,
                                                  const PolicyOverOptions& pi_over,
                                                  const ChainStart& start,
                                                  Normalization norm = Normalization::normalized);

enum class Manifold { theta, vartheta };

/// (1/T) E[(sum_t score_t)(sum_t score_t)^T] over T-step paths. Discounting
/// is realized as a restart from `start` with probability 1 - gamma per step
/// (and on entering a terminal state). The theta manifold scores actions;
/// the vartheta manifold scores option continuations along arrival paths.
Eigen::MatrixXd mc_fim_estimate(const TabularMdp& mdp, const OptionParams& params,
                                const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                const ChainStart& start, Manifold manifold, int horizon,
                                int num_paths, Rng& rng);

/// Minimizer of sum mu pi (eta^T d ln pi - a_U)^2 (minimum-norm solution).
Eigen::VectorXd least_squares_eta(const TabularMdp& mdp, const OptionParams& params,
                                  const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                  const ChainStart& start);

/// Minimizer of sum mu_shifted L (phi^T d ln beta' - a'_O)^2. Throws
/// degenerate_likelihood when 1 - beta' < 1e-9 on a weighted pair.
Eigen::VectorXd least_squares_phi(const TabularMdp& mdp, const OptionParams& params,
                                  const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                  const ChainStart& start);

/// Per-sample-summed gradients of the two squared errors, in the form the
/// coefficient learners descend (no factor 2):
///   d eps/d eta = sum mu pi [ g g^T eta - a_U g ],           g = d ln pi
///   d eps/d phi = sum mu' [ -h h'^T phi - beta a_O h ],      h = d ln beta,
///                                                             h' = d ln beta'
Eigen::VectorXd epsilon_eta_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     const ChainStart& start, const Eigen::VectorXd& eta);
Eigen::VectorXd epsilon_phi_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     const ChainStart& start, const Eigen::VectorXd& phi);

/// Central differences of j_value, one coordinate at a time.
Eigen::VectorXd finite_diff_gradient(const TabularMdp& mdp, const OptionParams& params,
                                     const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                                     Manifold wrt, const ChainStart& start, double step);

/// Single-step Fisher matrices in both forms: the expected score outer
/// product and minus the expected Hessian of the log-likelihood. For theta the
/// random variable is the action drawn by pi_o at s; for vartheta it is the
/// next option drawn by the continuation kernel at arrival pair (s, o).
struct SingleStepFisher {
  Eigen::MatrixXd score_outer;
  Eigen::MatrixXd negative_hessian;
};
SingleStepFisher single_step_fisher(const OptionParams& params, const FeatureMap& fmap,
                                    const PolicyOverOptions& pi_over, Manifold manifold, int o,
                                    int s);

/// Critic whose table equals the exact option values, with pi_O frozen.
CriticTables exact_critic(const ExactSolution& solution, double gamma);

/// Best expected return over `horizon` steps from d0 using primitive actions.
double optimal_finite_horizon_return(const TabularMdp& mdp, int horizon, bool discounted);

/// Best expected return over `horizon` steps from d0 when each step must be
/// taken by one of the given intra-option policies (the option may be chosen
/// freely every step). This is the ceiling for agents whose intra-option
/// policies are frozen.
double option_level_optimum(const TabularMdp& mdp, const OptionParams& params,
                            const FeatureMap& fmap, int horizon, bool discounted);

/// Monte-Carlo check of the TD-error consistency statements: conditional
/// means of delta^U per (s, o, a) and of delta^Omega per (s, o) on steps with
/// o_t == o_{t-1}, with the critic replaced by exact tables.
struct CellStat {
  int s = 0;
  int o = 0;
  int a = -1;  // -1 for delta^Omega cells
  long count = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double expected = 0.0;
};

struct TdConsistency {
  std::vector<CellStat> delta_u;
  std::vector<CellStat> delta_omega;
};

TdConsistency td_consistency(const TabularMdp& mdp, const OptionParams& params,
                             const FeatureMap& fmap, const PolicyOverOptions& pi_over,
                             OmegaTdForm omega_form, long num_steps, Rng& rng);

/// Random dense instance: every transition, reward, pi_o, beta_o and pi_O
/// entry drawn so that probabilities lie in [p_min, 1 - p_min].
struct RandomInstance {
  TabularMdp mdp;
  OptionParams params;
  FeatureMap fmap;
  PolicyOverOptions pi_over;
};

RandomInstance random_instance(int num_states, int num_actions, int num_options, double gamma,
                               Rng& rng, double p_min = 0.05);

}  // namespace noc::oracle
