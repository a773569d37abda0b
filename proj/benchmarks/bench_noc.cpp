#include <benchmark/benchmark.h>

#include "noc/agent.hpp"
#include "noc/envs.hpp"
#include "noc/oracle.hpp"

namespace {

using namespace noc;

struct FourRoomsFixture {
  GridWorld world = four_rooms();
  FeatureMap fmap = FeatureMap::one_hot(world.mdp.num_states);
  OptionParams params = OptionParams::zeros(4, world.mdp.num_states, world.mdp.num_actions);
  CriticTables critic = CriticTables::zeros(world.mdp.num_states, 4, world.mdp.gamma);
  LearningRates rates;
};

TransitionRecord sample_record(const FourRoomsFixture& f, Rng& rng, int step) {
  TransitionRecord rec;
  rec.s = rng.uniform_int(f.world.mdp.num_states);
  rec.o = rng.uniform_int(4);
  rec.a = rng.uniform_int(4);
  rec.s_next = rng.uniform_int(f.world.mdp.num_states);
  rec.r = 0.0;
  if (step % 2 == 1) rec.o_prev = rec.o;
  return rec;
}

void BM_InocStep(benchmark::State& st) {
  FourRoomsFixture f;
  f.critic.q_omega.setRandom();
  const auto pi_over = PolicyOverOptions::epsilon_greedy(f.critic.q_omega, 0.05);
  auto natural = NaturalGradientState::zeros(f.params, f.rates);
  Rng rng(1);
  int step = 0;
  for (auto _ : st) {
    const auto rec = sample_record(f, rng, step++);
    benchmark::DoNotOptimize(inoc_step(natural, f.critic, f.params, f.fmap, pi_over, rec));
  }
}
BENCHMARK(BM_InocStep);

void BM_VanillaStep(benchmark::State& st) {
  FourRoomsFixture f;
  f.critic.q_omega.setRandom();
  const auto pi_over = PolicyOverOptions::epsilon_greedy(f.critic.q_omega, 0.05);
  Rng rng(1);
  int step = 0;
  for (auto _ : st) {
    const auto rec = sample_record(f, rng, step++);
    vanilla_oc_step(f.critic, f.params, f.fmap, pi_over, rec, f.rates);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_VanillaStep);

void BM_RunEpisodeFourRooms(benchmark::State& st) {
  FourRoomsFixture f;
  AgentState agent{AgentMode::inoc, f.params, f.critic, NaturalGradientState::zeros(f.params, f.rates)};
  Rng rng(3);
  for (auto _ : st) {
    benchmark::DoNotOptimize(run_episode(agent, f.world.mdp, f.fmap, rng));
  }
}
BENCHMARK(BM_RunEpisodeFourRooms)->Unit(benchmark::kMillisecond);

void BM_ExactValues(benchmark::State& st) {
  const int states = static_cast<int>(st.range(0));
  Rng rng(7);
  const auto inst = oracle::random_instance(states, 4, 4, 0.95, rng);
  const auto start = oracle::ChainStart::from_initial(inst.mdp, inst.pi_over);
  for (auto _ : st) {
    benchmark::DoNotOptimize(oracle::exact_values(inst.mdp, inst.params, inst.fmap, inst.pi_over, start));
  }
}
BENCHMARK(BM_ExactValues)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
