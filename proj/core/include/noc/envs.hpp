#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "noc/critic.hpp"
#include "noc/mdp.hpp"
#include "noc/options.hpp"

namespace noc {

/// Committed description files, compiled in verbatim.
std::string_view two_state_mdp_text();
std::string_view four_rooms_layout_text();

/// Two states, two actions, deterministic. Action 0 goes to (or stays in)
/// state 0, action 1 goes to (or stays in) state 1. d0 = (0.8, 0.2), episodes
/// truncated at 30 steps.
TabularMdp two_state_mdp();

struct TwoStateInit {
  OptionParams params;
  CriticTables critic;
};

/// Two options; option 0 prefers action 0 and option 1 prefers action 1 with
/// probability 0.9 in both states. Option 0 terminates with probability 0.1 in
/// both states and the critic starts biased toward option 0 in state 0.
TwoStateInit two_state_initialization(double gamma, double critic_lr);

struct GridOptions {
  double gamma = 0.99;
  int max_steps = 2000;
  /// Probability that the chosen move is replaced by a uniformly random one.
  double slip = 0.0;
};

/// Gridworld from a text layout: '#' wall, '.' floor, 'G' goal. States are
/// the non-wall cells in row-major order. Actions are up, down, left, right;
/// moving into a wall is a no-op. Entering the goal pays 1 and ends the
/// episode; everything else pays 0. d0 is uniform over non-goal cells.
struct GridWorld {
  TabularMdp mdp;
  int rows = 0;
  int cols = 0;
  std::vector<std::pair<int, int>> cells;  // state -> (row, col)
  int goal = -1;
};

GridWorld parse_grid_layout(std::istream& in, const GridOptions& options = {});
GridWorld parse_grid_layout_text(std::string_view text, const GridOptions& options = {});

/// Standard four-rooms layout with 104 cells and the goal in the east hallway.
GridWorld four_rooms(const GridOptions& options = {});

}  // namespace noc
