#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "noc/critic.hpp"
#include "noc/features.hpp"
#include "noc/mdp.hpp"
#include "noc/options.hpp"
#include "noc/rng.hpp"

namespace noc {

enum class AgentMode {
  inoc,          // natural option-critic, termination coefficients as printed
  inoc_derived,  // natural option-critic, termination coefficients from d eps / d phi
  vanilla_oc,    // option-critic with plain stochastic gradients
};

std::string_view to_string(AgentMode mode);
std::optional<AgentMode> parse_agent_mode(std::string_view text);

struct LearningRates {
  double alpha_theta = 0.0025;
  double alpha_vartheta = 0.0025;
  double alpha_eta = 0.5;
  double alpha_phi = 0.75;
  double lambda = 0.5;
};

/// Compatible-approximation coefficients and their eligibility traces.
struct NaturalGradientState {
  Eigen::VectorXd eta;        // |theta|
  Eigen::VectorXd phi;        // |vartheta|
  Eigen::VectorXd trace_eta;  // |theta|
  Eigen::VectorXd trace_phi;  // |vartheta|
  LearningRates rates;

  static NaturalGradientState zeros(const OptionParams& params, const LearningRates& rates);

  void reset();
};

/// One environment step as seen by the learners. `o` chose `a` in `s`;
/// `o_prev` is the option active at the previous step of the same episode.
struct TransitionRecord {
  int s = 0;
  int o = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
  bool terminal = false;
  std::optional<int> o_prev;
};

/// Normalized actor steps are skipped below this coefficient norm.
inline constexpr double kMinCoefficientNorm = 1e-12;

/// Natural option-critic update for one transition. Rank-one corrections are
/// applied as dot products, so time and memory stay linear in |theta| + |vartheta|.
/// Returns true when the termination branch (o == o_prev) ran.
bool inoc_step(NaturalGradientState& state, const CriticTables& critic, OptionParams& params,
               const FeatureMap& fmap, const PolicyOverOptions& pi_over,
               const TransitionRecord& rec, AgentMode mode = AgentMode::inoc);

/// Clears coefficients and traces; called whenever the active option ends.
void on_option_termination(NaturalGradientState& state);

/// Option-critic update: theta along delta^U d ln pi, vartheta against
/// d beta(s') * (q(s', o) - v(s')).
void vanilla_oc_step(const CriticTables& critic, OptionParams& params, const FeatureMap& fmap,
                     const PolicyOverOptions& pi_over, const TransitionRecord& rec,
                     const LearningRates& rates);

struct EpisodeRecord {
  int episode = 0;
  double return_discounted = 0.0;
  double return_undiscounted = 0.0;
  int steps = 0;
  /// Fraction of steps with o_t == o_{t-1}, i.e. steps that update vartheta.
  double termination_update_fraction = 0.0;
  bool step_limit_hit = false;
  double wall_seconds = 0.0;
};

struct EpisodeLimits {
  /// Truncation; falls back to the MDP's max_episode_steps when unset.
  std::optional<int> max_steps;
};

/// Everything one learning run mutates.
struct AgentState {
  AgentMode mode = AgentMode::inoc;
  OptionParams params;
  CriticTables critic;
  NaturalGradientState natural;
};

/// Simulates one episode from d0, learning online: the critic by intra-option
/// Q-learning and the actor per `agent.mode`.
EpisodeRecord run_episode(AgentState& agent, const TabularMdp& mdp, const FeatureMap& fmap,
                          Rng& rng, const EpisodeLimits& limits = {});

}  // namespace noc
