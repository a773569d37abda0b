#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noc/error.hpp"
#include "noc/rng.hpp"

namespace noc {

/// Finite MDP with per-(s, a, s') rewards. Dense storage, row-major in
/// (s, a, s'). Terminal states are absorbing with zero reward.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> transition;  // P(s' | s, a)
  std::vector<double> reward;      // R(s, a, s')
  std::vector<double> initial_dist;
  double gamma = 1.0;
  std::vector<bool> terminal;
  std::optional<int> max_episode_steps;

  /// Zero-initialized MDP of the given shape; d0 is left all-zero.
  static TabularMdp make(int num_states, int num_actions);

  std::size_t index(int s, int a, int s_next) const {
    return (static_cast<std::size_t>(s) * num_actions + a) * num_states + s_next;
  }

  double p(int s, int a, int s_next) const { return transition[index(s, a, s_next)]; }
  double r(int s, int a, int s_next) const { return reward[index(s, a, s_next)]; }

  std::span<const double> transition_row(int s, int a) const {
    return {transition.data() + index(s, a, 0), static_cast<std::size_t>(num_states)};
  }

  /// R(s, a) = sum_s' P(s' | s, a) R(s, a, s').
  double expected_reward(int s, int a) const;

  /// Turns `s` into an absorbing zero-reward state and marks it terminal.
  void make_absorbing(int s);

  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)]; }
};

struct Violation {
  ErrorCode code;
  std::string message;
};

/// Every invariant violation of `mdp`; empty when the MDP is valid.
std::vector<Violation> validate(const TabularMdp& mdp);

/// Throws Error(code of the first violation) listing all violations.
void ensure_valid(const TabularMdp& mdp);

int sample_initial(const TabularMdp& mdp, Rng& rng);

struct Transition {
  int next_state;
  double reward;
};

/// One environment step. Throws terminal_state_step from a terminal state.
Transition sample_transition(const TabularMdp& mdp, int s, int a, Rng& rng);

}  // namespace noc
