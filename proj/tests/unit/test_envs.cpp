#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "noc/envs.hpp"
#include "noc/mdp.hpp"

namespace noc {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int state_at(const GridWorld& w, int row, int col) {
  for (std::size_t s = 0; s < w.cells.size(); ++s) {
    if (w.cells[s] == std::make_pair(row, col)) return static_cast<int>(s);
  }
  return -1;
}

constexpr int kUp = 0, kDown = 1, kLeft = 2, kRight = 3;

TEST(TwoState, Description) {
  const TabularMdp m = two_state_mdp();
  EXPECT_TRUE(validate(m).empty());
  EXPECT_EQ(m.num_states, 2);
  EXPECT_EQ(m.num_actions, 2);
  EXPECT_EQ(m.initial_dist[0], 0.8);
  EXPECT_EQ(m.initial_dist[1], 0.2);
  EXPECT_EQ(m.r(0, 0, 0), 1.0);
  EXPECT_EQ(m.r(1, 1, 1), 2.0);
  EXPECT_EQ(m.p(0, 1, 1), 1.0);
  EXPECT_EQ(m.p(1, 0, 0), 1.0);
  EXPECT_EQ(m.max_episode_steps, 30);
}

TEST(TwoState, EmbeddedTextMatchesDataFile) {
  EXPECT_EQ(two_state_mdp_text(), read_file(std::string(NOC_DATA_DIR) + "/two_state.mdp"));
  EXPECT_EQ(four_rooms_layout_text(), read_file(std::string(NOC_DATA_DIR) + "/four_rooms.txt"));
}

TEST(TwoState, Initialization) {
  const TwoStateInit init = two_state_initialization(0.9, 0.5);
  const FeatureMap f = FeatureMap::one_hot(2);
  EXPECT_EQ(init.params.num_options, 2);
  for (int s = 0; s < 2; ++s) {
    EXPECT_NEAR(intra_option_probs(init.params, f, 0, s)(0), 0.9, 1e-9);
    EXPECT_NEAR(intra_option_probs(init.params, f, 1, s)(1), 0.9, 1e-9);
    EXPECT_NEAR(termination_prob(init.params, f, 0, s), 0.1, 1e-12);
  }
  EXPECT_GT(init.critic.q_omega(0, 0), init.critic.q_omega(0, 1));
  EXPECT_EQ(init.critic.gamma, 0.9);
  EXPECT_EQ(init.critic.learning_rate, 0.5);
}

TEST(FourRooms, Shape) {
  const GridWorld w = four_rooms();
  EXPECT_TRUE(validate(w.mdp).empty());
  EXPECT_EQ(w.mdp.num_states, 104);
  EXPECT_EQ(w.mdp.num_actions, 4);
  EXPECT_EQ(w.mdp.gamma, 0.99);
  EXPECT_EQ(w.mdp.max_episode_steps, 2000);
  EXPECT_EQ(w.cells[static_cast<std::size_t>(w.goal)], std::make_pair(7, 9));
  for (int s = 0; s < 104; ++s) {
    EXPECT_DOUBLE_EQ(w.mdp.initial_dist[static_cast<std::size_t>(s)], s == w.goal ? 0.0 : 1.0 / 103.0);
  }
}

TEST(FourRooms, WallIsNoOp) {
  const GridWorld w = four_rooms();
  const int corner = state_at(w, 1, 1);
  ASSERT_GE(corner, 0);
  EXPECT_EQ(w.mdp.p(corner, kUp, corner), 1.0);
  EXPECT_EQ(w.mdp.p(corner, kLeft, corner), 1.0);
  EXPECT_EQ(w.mdp.p(corner, kRight, state_at(w, 1, 2)), 1.0);
  EXPECT_EQ(w.mdp.p(corner, kDown, state_at(w, 2, 1)), 1.0);
  EXPECT_EQ(w.mdp.r(corner, kUp, corner), 0.0);
}

TEST(FourRooms, GoalIsTerminalWithReward) {
  const GridWorld w = four_rooms();
  EXPECT_TRUE(w.mdp.is_terminal(w.goal));
  const int below = state_at(w, 8, 9);
  const int above = state_at(w, 6, 9);
  EXPECT_EQ(w.mdp.p(below, kUp, w.goal), 1.0);
  EXPECT_EQ(w.mdp.r(below, kUp, w.goal), 1.0);
  EXPECT_EQ(w.mdp.r(above, kDown, w.goal), 1.0);
  EXPECT_EQ(w.mdp.r(below, kDown, state_at(w, 9, 9)), 0.0);
}

TEST(FourRooms, SlipMixesUniformMoves) {
  GridOptions opt;
  opt.slip = 0.2;
  const GridWorld w = four_rooms(opt);
  EXPECT_TRUE(validate(w.mdp).empty());
  const int corner = state_at(w, 1, 1);
  // Up and left both bump the wall.
  EXPECT_NEAR(w.mdp.p(corner, kRight, corner), 0.1, 1e-15);
  EXPECT_NEAR(w.mdp.p(corner, kRight, state_at(w, 1, 2)), 0.85, 1e-15);
  EXPECT_NEAR(w.mdp.p(corner, kRight, state_at(w, 2, 1)), 0.05, 1e-15);
  opt.slip = 1.5;
  EXPECT_THROW(four_rooms(opt), Error);
}

TEST(GridLayout, Errors) {
  auto code_of = [](std::string_view text) {
    try {
      parse_grid_layout_text(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;  // sentinel: no error
  };
  EXPECT_EQ(code_of("###\n#.#\n###\n"), ErrorCode::parse);           // no goal
  EXPECT_EQ(code_of("####\n#GG#\n####\n"), ErrorCode::parse);        // two goals
  EXPECT_EQ(code_of("####\n#.G#\n###\n"), ErrorCode::parse);         // ragged
  EXPECT_EQ(code_of("####\n#xG#\n####\n"), ErrorCode::parse);        // unknown cell
  EXPECT_EQ(code_of(""), ErrorCode::parse);
  EXPECT_EQ(code_of("####\n#.G#\n####\n"), ErrorCode::io);
}

TEST(GridLayout, SmallCorridor) {
  const GridWorld w = parse_grid_layout_text("#####\n#..G#\n#####\n");
  EXPECT_EQ(w.mdp.num_states, 3);
  EXPECT_EQ(w.goal, 2);
  EXPECT_EQ(w.mdp.p(0, kRight, 1), 1.0);
  EXPECT_EQ(w.mdp.r(1, kRight, 2), 1.0);
  EXPECT_EQ(w.mdp.initial_dist[0], 0.5);
}

}  // namespace
}  // namespace noc
