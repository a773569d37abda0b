#include "noc/mdp.hpp"

#include <cmath>

#include <fmt/format.h>

namespace noc {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

TabularMdp TabularMdp::make(int num_states, int num_actions) {
  if (num_states <= 0 || num_actions <= 0) {
    throw Error(ErrorCode::bad_shape,
                fmt::format("need at least one state and action, got {}x{}", num_states,
                            num_actions));
  }
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  const auto n = static_cast<std::size_t>(num_states) * num_actions * num_states;
  mdp.transition.assign(n, 0.0);
  mdp.reward.assign(n, 0.0);
  mdp.initial_dist.assign(static_cast<std::size_t>(num_states), 0.0);
  mdp.terminal.assign(static_cast<std::size_t>(num_states), false);
  return mdp;
}

double TabularMdp::expected_reward(int s, int a) const {
  double total = 0.0;
  for (int sn = 0; sn < num_states; ++sn) total += p(s, a, sn) * r(s, a, sn);
  return total;
}

void TabularMdp::make_absorbing(int s) {
  terminal[static_cast<std::size_t>(s)] = true;
  for (int a = 0; a < num_actions; ++a) {
    for (int sn = 0; sn < num_states; ++sn) {
      transition[index(s, a, sn)] = sn == s ? 1.0 : 0.0;
      reward[index(s, a, sn)] = 0.0;
    }
  }
}

std::vector<Violation> validate(const TabularMdp& mdp) {
  std::vector<Violation> out;
  if (mdp.num_states <= 0 || mdp.num_actions <= 0) {
    out.push_back({ErrorCode::bad_shape, "empty state or action set"});
    return out;
  }
  const auto n = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions * mdp.num_states;
  if (mdp.transition.size() != n || mdp.reward.size() != n ||
      mdp.initial_dist.size() != static_cast<std::size_t>(mdp.num_states) ||
      mdp.terminal.size() != static_cast<std::size_t>(mdp.num_states)) {
    out.push_back({ErrorCode::bad_shape, "array sizes do not match num_states/num_actions"});
    return out;
  }

  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      double sum = 0.0;
      for (int sn = 0; sn < mdp.num_states; ++sn) {
        const double p = mdp.p(s, a, sn);
        if (!(p >= 0.0)) {
          out.push_back({ErrorCode::negative_probability,
                         fmt::format("P({} | {}, {}) = {}", sn, s, a, p)});
        }
        sum += p;
      }
      if (!(std::abs(sum - 1.0) <= kSumTolerance)) {
        out.push_back({ErrorCode::row_sum,
                       fmt::format("transition row (s={}, a={}) sums to {:.17g}", s, a, sum)});
      }
      if (mdp.is_terminal(s)) {
        bool absorbing = mdp.p(s, a, s) == 1.0;
        for (int sn = 0; sn < mdp.num_states; ++sn) {
          if (mdp.r(s, a, sn) != 0.0) absorbing = false;
        }
        if (!absorbing) {
          out.push_back({ErrorCode::terminal_not_absorbing,
                         fmt::format("terminal state {} is not an absorbing zero-reward "
                                     "self loop under action {}",
                                     s, a)});
        }
      }
    }
  }

  double d0_sum = 0.0;
  for (int s = 0; s < mdp.num_states; ++s) {
    const double p = mdp.initial_dist[static_cast<std::size_t>(s)];
    if (!(p >= 0.0)) {
      out.push_back({ErrorCode::bad_initial_dist, fmt::format("d0({}) = {}", s, p)});
    }
    if (mdp.is_terminal(s) && p != 0.0) {
      out.push_back({ErrorCode::bad_initial_dist,
                     fmt::format("d0 puts mass {} on terminal state {}", p, s)});
    }
    d0_sum += p;
  }
  if (!(std::abs(d0_sum - 1.0) <= kSumTolerance)) {
    out.push_back({ErrorCode::bad_initial_dist, fmt::format("d0 sums to {:.17g}", d0_sum)});
  }
  if (!(mdp.gamma >= 0.0 && mdp.gamma <= 1.0)) {
    out.push_back({ErrorCode::bad_gamma, fmt::format("gamma = {} outside [0, 1]", mdp.gamma)});
  }
  if (mdp.max_episode_steps && *mdp.max_episode_steps <= 0) {
    out.push_back({ErrorCode::bad_shape, "max_episode_steps must be positive"});
  }
  return out;
}

void ensure_valid(const TabularMdp& mdp) {
  const auto violations = validate(mdp);
  if (violations.empty()) return;
  std::string message = fmt::format("{} violation(s):", violations.size());
  for (const auto& v : violations) message += fmt::format("\n  {}: {}", to_string(v.code), v.message);
  throw Error(violations.front().code, message);
}

int sample_initial(const TabularMdp& mdp, Rng& rng) { return rng.categorical(mdp.initial_dist); }

Transition sample_transition(const TabularMdp& mdp, int s, int a, Rng& rng) {
  if (mdp.is_terminal(s)) {
    throw Error(ErrorCode::terminal_state_step, fmt::format("step from terminal state {}", s));
  }
  const int next = rng.categorical(mdp.transition_row(s, a));
  return {next, mdp.r(s, a, next)};
}

}  // namespace noc
