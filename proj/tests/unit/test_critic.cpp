#include <gtest/gtest.h>

#include <cmath>

#include "noc/critic.hpp"
#include "noc/envs.hpp"
#include "noc/oracle.hpp"
#include "noc/rng.hpp"
#include "test_support.hpp"

namespace noc {
namespace {

PolicyOverOptions half_half(int states) {
  return PolicyOverOptions::table(Eigen::MatrixXd::Constant(states, 2, 0.5));
}

TEST(VOf, SingleOption) {
  CriticTables c = CriticTables::zeros(2, 1, 0.9);
  c.q_omega(1, 0) = 4.5;
  const auto pi = PolicyOverOptions::table(Eigen::MatrixXd::Ones(2, 1));
  EXPECT_EQ(v_of(c, pi, 1), 4.5);
}

TEST(VOf, ExpectationAndMax) {
  CriticTables c = CriticTables::zeros(1, 2, 0.9);
  c.q_omega << 2.0, 4.0;
  EXPECT_DOUBLE_EQ(v_of(c, half_half(1), 0), 3.0);
  c.value_style = ValueStyle::max;
  EXPECT_DOUBLE_EQ(v_of(c, half_half(1), 0), 4.0);
}

TEST(VOf, GreedyExpectationEqualsMax) {
  CriticTables c = CriticTables::zeros(1, 3, 0.9);
  c.q_omega << 1.0, -2.0, 7.0;
  const auto greedy = PolicyOverOptions::epsilon_greedy(c.q_omega, 0.0);
  const double expectation = v_of(c, greedy, 0);
  c.value_style = ValueStyle::max;
  EXPECT_DOUBLE_EQ(expectation, v_of(c, greedy, 0));
}

TEST(UOf, ClosedForm) {
  CriticTables c = CriticTables::zeros(1, 2, 0.9);
  c.q_omega << 2.0, 10.0;  // v = 6 under (0.5, 0.5)
  OptionParams p = OptionParams::zeros(2, 1, 1);
  const FeatureMap f = FeatureMap::one_hot(1);

  p.vartheta(p.vartheta_index(0, 0)) = std::log(1.0 / 3.0);  // beta = 0.25
  EXPECT_NEAR(u_of(c, p, f, half_half(1), 0, 0), 3.0, 1e-14);

  p.vartheta(0) = -60.0;  // beta at the lower clamp
  EXPECT_NEAR(u_of(c, p, f, half_half(1), 0, 0), 2.0, 1e-5);
  p.vartheta(0) = 60.0;
  EXPECT_NEAR(u_of(c, p, f, half_half(1), 0, 0), 6.0, 1e-5);
}

TEST(TdErrorU, NoDiscountAndTerminal) {
  CriticTables c = CriticTables::zeros(2, 2, 0.0);
  c.q_omega << 1.0, 2.0, 5.0, 6.0;
  const OptionParams p = OptionParams::zeros(2, 2, 2);
  const FeatureMap f = FeatureMap::one_hot(2);
  EXPECT_DOUBLE_EQ(td_error_u(c, p, f, half_half(2), 0, 1, 3.0, 1, false), 1.0);
  c.gamma = 0.9;
  EXPECT_DOUBLE_EQ(td_error_u(c, p, f, half_half(2), 0, 1, 3.0, 1, true), 1.0);
  // beta = 0.5, v(1) = 5.5, u = 0.5 * 6 + 0.5 * 5.5.
  EXPECT_NEAR(td_error_u(c, p, f, half_half(2), 0, 1, 3.0, 1, false), 3.0 + 0.9 * 5.75 - 2.0, 1e-14);
}

TEST(TdErrorOmega, Forms) {
  CriticTables c = CriticTables::zeros(2, 2, 0.0);
  c.q_omega << 1.0, 3.0, 5.0, 7.0;  // v = 2, 6
  EXPECT_DOUBLE_EQ(td_error_omega(c, half_half(2), 0, 4.0, 1, false), 2.0);
  c.gamma = 0.5;
  EXPECT_DOUBLE_EQ(td_error_omega(c, half_half(2), 0, 4.0, 1, false), 4.0 + 3.0 - 2.0);
  EXPECT_DOUBLE_EQ(td_error_omega(c, half_half(2), 0, 4.0, 1, true), 2.0);
  c.omega_td_form = OmegaTdForm::scaled_baseline;
  EXPECT_DOUBLE_EQ(td_error_omega(c, half_half(2), 0, 4.0, 1, false), 4.0 + 3.0 - 1.0);
}

TEST(TdErrorOmega, FlatValueUndiscounted) {
  CriticTables c = CriticTables::zeros(2, 2, 1.0);
  c.q_omega << 3.0, 3.0, 3.0, 3.0;
  EXPECT_EQ(td_error_omega(c, half_half(2), 0, 0.0, 1, false), 0.0);
}

TEST(QLearning, TouchesOneEntry) {
  CriticTables c = CriticTables::zeros(3, 2, 0.9);
  c.q_omega.setRandom();
  const Eigen::MatrixXd before = c.q_omega;
  const OptionParams p = OptionParams::zeros(2, 3, 2);
  q_learning_update(c, p, FeatureMap::one_hot(3), half_half(3), 1, 1, 2.0, 2, false);
  const Eigen::MatrixXd diff = c.q_omega - before;
  int changed = 0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) changed += diff.data()[i] != 0.0;
  EXPECT_EQ(changed, 1);
  EXPECT_NE(diff(1, 1), 0.0);
}

TEST(QLearning, TerminalTargetIsReward) {
  CriticTables c = CriticTables::zeros(2, 2, 0.9);
  c.q_omega.setConstant(4.0);
  c.learning_rate = 1.0;
  const OptionParams p = OptionParams::zeros(2, 2, 1);
  q_learning_update(c, p, FeatureMap::one_hot(2), half_half(2), 0, 1, 1.5, 1, true);
  EXPECT_DOUBLE_EQ(c.q_omega(0, 1), 1.5);
}

TEST(QLearning, BanditFixedPoint) {
  CriticTables c = CriticTables::zeros(1, 1, 0.0);
  const OptionParams p = OptionParams::zeros(1, 1, 1);
  const auto pi = PolicyOverOptions::table(Eigen::MatrixXd::Ones(1, 1));
  for (int i = 0; i < 200; ++i) q_learning_update(c, p, FeatureMap::one_hot(1), pi, 0, 0, 1.0, 0, false);
  EXPECT_NEAR(c.q_omega(0, 0), 1.0, 1e-12);
}

// Intra-option Q-learning on the two-state MDP with frozen options and a
// frozen uniform policy over options converges to the exact option values.
TEST(QLearning, ConvergesToOracleOnTwoState) {
  const TabularMdp mdp = two_state_mdp();
  const TwoStateInit init = two_state_initialization(mdp.gamma, 0.5);
  const FeatureMap f = FeatureMap::one_hot(2);
  const auto pi_over = PolicyOverOptions::table(Eigen::MatrixXd::Constant(2, 2, 0.5));
  const auto start = oracle::ChainStart::from_initial(mdp, pi_over);
  const auto exact = oracle::exact_values(mdp, init.params, f, pi_over, start);

  CriticTables c = CriticTables::zeros(2, 2, mdp.gamma);
  Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(2, 2);
  Rng rng(2024);
  int s = sample_initial(mdp, rng);
  int o = rng.categorical(std::vector<double>{0.5, 0.5});
  for (long t = 0; t < 100000; ++t) {
    const Eigen::VectorXd pi = intra_option_probs(init.params, f, o, s);
    const int a = rng.categorical(std::span<const double>(pi.data(), 2));
    const Transition tr = sample_transition(mdp, s, a, rng);
    visits(s, o) += 1.0;
    c.learning_rate = 1.0 / std::pow(visits(s, o), 0.7);
    q_learning_update(c, init.params, f, pi_over, s, o, tr.reward, tr.next_state, false);
    if (rng.bernoulli(termination_prob(init.params, f, o, tr.next_state))) o = rng.uniform_int(2);
    s = tr.next_state;
  }
  EXPECT_LT((c.q_omega - exact.q_omega).cwiseAbs().maxCoeff(), 0.05)
      << "learned\n" << c.q_omega << "\nexact\n" << exact.q_omega;
}

TEST(CriticTables, Zeros) {
  const CriticTables c = CriticTables::zeros(3, 4, 0.7);
  EXPECT_EQ(c.q_omega.rows(), 3);
  EXPECT_EQ(c.q_omega.cols(), 4);
  EXPECT_EQ(c.gamma, 0.7);
  EXPECT_EQ(c.q_omega.norm(), 0.0);
}

}  // namespace
}  // namespace noc
