#include "noc/envs.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "noc/error.hpp"
#include "noc/mdp_io.hpp"
#include "noc_embedded_data.hpp"

namespace noc {

std::string_view two_state_mdp_text() { return embedded::kTwoStateMdp; }
std::string_view four_rooms_layout_text() { return embedded::kFourRoomsLayout; }

TabularMdp two_state_mdp() { return parse_mdp_text(two_state_mdp_text()); }

TwoStateInit two_state_initialization(double gamma, double critic_lr) {
  const int S = 2;
  const int O = 2;
  const int A = 2;
  OptionParams params = OptionParams::zeros(O, S, A);
  // pi_o(preferred) = 9 / (9 + 1) = 0.9 with the other logit at zero.
  const double prefer = std::log(9.0);
  for (int s = 0; s < S; ++s) {
    params.theta(params.theta_index(0, s, 0)) = prefer;
    params.theta(params.theta_index(1, s, 1)) = prefer;
    // beta_o1 = 0.1 everywhere; o2 starts at 0.5.
    params.vartheta(params.vartheta_index(0, s)) = -prefer;
  }
  CriticTables critic = CriticTables::zeros(S, O, gamma);
  critic.learning_rate = critic_lr;
  critic.q_omega(0, 0) = 1.0;
  return {std::move(params), std::move(critic)};
}

GridWorld parse_grid_layout(std::istream& in, const GridOptions& options) {
  std::vector<std::string> grid;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!grid.empty() && line.size() != grid.front().size()) {
      throw Error(ErrorCode::parse, fmt::format("layout row {} has width {}, expected {}",
                                                grid.size() + 1, line.size(), grid.front().size()));
    }
    for (char c : line) {
      if (c != '#' && c != '.' && c != 'G') {
        throw Error(ErrorCode::parse,
                    fmt::format("layout row {} has unknown cell '{}'", grid.size() + 1, c));
      }
    }
    grid.push_back(line);
  }
  if (grid.empty()) throw Error(ErrorCode::parse, "layout is empty");
  if (!(options.slip >= 0.0 && options.slip <= 1.0)) {
    throw Error(ErrorCode::config, fmt::format("slip {} outside [0, 1]", options.slip));
  }

  GridWorld world;
  world.rows = static_cast<int>(grid.size());
  world.cols = static_cast<int>(grid.front().size());
  std::vector<int> id(static_cast<std::size_t>(world.rows * world.cols), -1);
  for (int r = 0; r < world.rows; ++r) {
    for (int c = 0; c < world.cols; ++c) {
      const char cell = grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell == '#') continue;
      id[static_cast<std::size_t>(r * world.cols + c)] = static_cast<int>(world.cells.size());
      if (cell == 'G') {
        if (world.goal >= 0) throw Error(ErrorCode::parse, "layout has more than one goal");
        world.goal = static_cast<int>(world.cells.size());
      }
      world.cells.emplace_back(r, c);
    }
  }
  if (world.goal < 0) throw Error(ErrorCode::parse, "layout has no goal cell");

  const int n = static_cast<int>(world.cells.size());
  constexpr std::array<std::pair<int, int>, 4> moves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  auto target = [&](int s, int m) {
    const auto [r, c] = world.cells[static_cast<std::size_t>(s)];
    const int nr = r + moves[static_cast<std::size_t>(m)].first;
    const int nc = c + moves[static_cast<std::size_t>(m)].second;
    if (nr < 0 || nr >= world.rows || nc < 0 || nc >= world.cols) return s;
    const int next = id[static_cast<std::size_t>(nr * world.cols + nc)];
    return next < 0 ? s : next;
  };

  TabularMdp mdp = TabularMdp::make(n, 4);
  mdp.gamma = options.gamma;
  mdp.max_episode_steps = options.max_steps;
  for (int s = 0; s < n; ++s) {
    if (s == world.goal) continue;
    for (int a = 0; a < 4; ++a) {
      for (int m = 0; m < 4; ++m) {
        const double prob = (m == a ? 1.0 - options.slip : 0.0) + options.slip / 4.0;
        if (prob == 0.0) continue;
        const int next = target(s, m);
        mdp.transition[mdp.index(s, a, next)] += prob;
        if (next == world.goal) mdp.reward[mdp.index(s, a, next)] = 1.0;
      }
    }
  }
  mdp.make_absorbing(world.goal);
  for (int s = 0; s < n; ++s) {
    mdp.initial_dist[static_cast<std::size_t>(s)] = s == world.goal ? 0.0 : 1.0 / (n - 1);
  }
  ensure_valid(mdp);
  world.mdp = std::move(mdp);
  return world;
}

GridWorld parse_grid_layout_text(std::string_view text, const GridOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_grid_layout(in, options);
}

GridWorld four_rooms(const GridOptions& options) {
  return parse_grid_layout_text(four_rooms_layout_text(), options);
}

}  // namespace noc
