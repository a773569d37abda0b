#include "noc/agent.hpp"

#include <chrono>

namespace noc {

std::string_view to_string(AgentMode mode) {
  switch (mode) {
    case AgentMode::inoc: return "inoc";
    case AgentMode::inoc_derived: return "inoc_derived";
    case AgentMode::vanilla_oc: return "vanilla_oc";
  }
  return "unknown";
}

std::optional<AgentMode> parse_agent_mode(std::string_view text) {
  if (text == "inoc" || text == "INOC") return AgentMode::inoc;
  if (text == "inoc_derived" || text == "INOC-derived") return AgentMode::inoc_derived;
  if (text == "vanilla_oc" || text == "VanillaOC" || text == "oc") return AgentMode::vanilla_oc;
  return std::nullopt;
}

NaturalGradientState NaturalGradientState::zeros(const OptionParams& params,
                                                 const LearningRates& rates) {
  NaturalGradientState st;
  st.eta = Eigen::VectorXd::Zero(params.theta_size());
  st.phi = Eigen::VectorXd::Zero(params.vartheta_size());
  st.trace_eta = Eigen::VectorXd::Zero(params.theta_size());
  st.trace_phi = Eigen::VectorXd::Zero(params.vartheta_size());
  st.rates = rates;
  return st;
}

void NaturalGradientState::reset() {
  eta.setZero();
  phi.setZero();
  trace_eta.setZero();
  trace_phi.setZero();
}

void on_option_termination(NaturalGradientState& state) { state.reset(); }

bool inoc_step(NaturalGradientState& state, const CriticTables& critic, OptionParams& params,
               const FeatureMap& fmap, const PolicyOverOptions& pi_over,
               const TransitionRecord& rec, AgentMode mode) {
  const LearningRates& k = state.rates;

  const Eigen::VectorXd g = grad_log_intra_option(params, fmap, rec.o, rec.s, rec.a);
  state.trace_eta = k.lambda * state.trace_eta + g;
  const double delta_u =
      td_error_u(critic, params, fmap, pi_over, rec.s, rec.o, rec.r, rec.s_next, rec.terminal);
  const double g_eta = g.dot(state.eta);
  state.eta += k.alpha_eta * delta_u * state.trace_eta - (k.alpha_eta * g_eta) * g;
  const double eta_norm = state.eta.norm();
  if (eta_norm >= kMinCoefficientNorm) params.theta += (k.alpha_theta / eta_norm) * state.eta;

  if (!rec.o_prev || *rec.o_prev != rec.o) return false;

  const Eigen::VectorXd h = grad_log_termination(params, fmap, rec.o, rec.s);
  state.trace_phi = k.lambda * state.trace_phi + h;
  const double delta_o = td_error_omega(critic, pi_over, rec.s, rec.r, rec.s_next, rec.terminal);
  const double beta = termination_prob(params, fmap, rec.o, rec.s);
  double rank_one = 0.0;
  if (mode == AgentMode::inoc_derived) {
    rank_one = grad_log_continuation(params, fmap, pi_over, rec.o, rec.s).dot(state.phi);
  } else {
    rank_one = h.dot(state.phi);
  }
  state.phi += k.alpha_phi * beta * delta_o * state.trace_phi + (k.alpha_phi * rank_one) * h;
  const double phi_norm = state.phi.norm();
  if (phi_norm >= kMinCoefficientNorm) params.vartheta -= (k.alpha_vartheta / phi_norm) * state.phi;
  return true;
}

void vanilla_oc_step(const CriticTables& critic, OptionParams& params, const FeatureMap& fmap,
                     const PolicyOverOptions& pi_over, const TransitionRecord& rec,
                     const LearningRates& rates) {
  // Both gradients live in the active option's block and on the nonzero
  // features only, so the update touches those coordinates alone.
  const double delta_u =
      td_error_u(critic, params, fmap, pi_over, rec.s, rec.o, rec.r, rec.s_next, rec.terminal);
  if (delta_u != 0.0) {
    Eigen::VectorXd centered = -intra_option_probs(params, fmap, rec.o, rec.s);
    centered(rec.a) += 1.0;
    const auto x = fmap.evaluate(rec.s);
    const double scale = rates.alpha_theta * delta_u;
    for (int f = 0; f < params.num_features; ++f) {
      if (x(f) == 0.0) continue;
      params.theta.segment(params.theta_index(rec.o, f, 0), params.num_actions) += scale * x(f) * centered;
    }
  }
  if (rec.terminal) return;
  const double advantage = critic.q_omega(rec.s_next, rec.o) - v_of(critic, pi_over, rec.s_next);
  if (advantage == 0.0) return;
  const double beta = sigmoid(termination_logit(params, fmap, rec.o, rec.s_next));
  const double scale = rates.alpha_vartheta * advantage * beta * (1.0 - beta);
  const auto x = fmap.evaluate(rec.s_next);
  for (int f = 0; f < params.num_features; ++f) {
    if (x(f) != 0.0) params.vartheta(params.vartheta_index(rec.o, f)) -= scale * x(f);
  }
}

EpisodeRecord run_episode(AgentState& agent, const TabularMdp& mdp, const FeatureMap& fmap,
                          Rng& rng, const EpisodeLimits& limits) {
  const auto started = std::chrono::steady_clock::now();
  EpisodeRecord out;
  const std::optional<int> cap = limits.max_steps ? limits.max_steps : mdp.max_episode_steps;
  const double eps = agent.params.epsilon_over_options;
  const PolicyOverOptions pi_over = PolicyOverOptions::epsilon_greedy(agent.critic.q_omega, eps);

  agent.natural.reset();
  int s = sample_initial(mdp, rng);
  if (mdp.is_terminal(s)) {
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
  }
  int o = select_option(agent.critic.q_omega, s, eps, rng);
  std::optional<int> o_prev;
  double discount = 1.0;
  int continued = 0;

  while (true) {
    if (cap && out.steps >= *cap) {
      out.step_limit_hit = true;
      break;
    }
    const Eigen::VectorXd probs = intra_option_probs(agent.params, fmap, o, s);
    const int a = rng.categorical({probs.data(), static_cast<std::size_t>(probs.size())});
    const Transition tr = sample_transition(mdp, s, a, rng);
    const bool terminal = mdp.is_terminal(tr.next_state);
    const TransitionRecord rec{s, o, a, tr.reward, tr.next_state, terminal, o_prev};

    out.return_discounted += discount * tr.reward;
    out.return_undiscounted += tr.reward;
    discount *= agent.critic.gamma;
    ++out.steps;
    if (o_prev && *o_prev == o) ++continued;

    if (agent.mode == AgentMode::vanilla_oc) {
      vanilla_oc_step(agent.critic, agent.params, fmap, pi_over, rec, agent.natural.rates);
    } else {
      inoc_step(agent.natural, agent.critic, agent.params, fmap, pi_over, rec, agent.mode);
    }
    q_learning_update(agent.critic, agent.params, fmap, pi_over, s, o, tr.reward, tr.next_state,
                      terminal);
    if (terminal) break;

    o_prev = o;
    s = tr.next_state;
    if (rng.bernoulli(termination_prob(agent.params, fmap, o, s))) {
      on_option_termination(agent.natural);
      o = select_option(agent.critic.q_omega, s, eps, rng);
    }
  }

  agent.natural.reset();
  out.termination_update_fraction =
      out.steps > 0 ? static_cast<double>(continued) / static_cast<double>(out.steps) : 0.0;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace noc
