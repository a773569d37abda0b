#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "noc/mdp.hpp"

namespace noc {

// MDP description files are line based. Blank lines and text after '#' are
// ignored. Directives:
//
//   states <n>                      required, before any 't' line
//   actions <n>                     required, before any 't' line
//   gamma <x>                       default 1
//   max_steps <n>                   optional episode truncation
//   initial <p_0> ... <p_{n-1}>     d0, one entry per state
//   terminal <s> [<s> ...]          may repeat
//   t <s> <a> <s'> <prob> <reward>  one transition entry; repeats add
//
// Terminal states get an absorbing zero-reward self loop for every action;
// 't' lines may not start from a terminal state. The parsed MDP must pass
// validate(), otherwise parsing fails with the full violation list.

TabularMdp parse_mdp(std::istream& in);
TabularMdp parse_mdp_text(std::string_view text);
TabularMdp load_mdp(const std::filesystem::path& path);

/// Writes `mdp` in the grammar above, probabilities and rewards with 17
/// significant digits so that parse_mdp(write_mdp(m)) == m.
void write_mdp(std::ostream& out, const TabularMdp& mdp);

}  // namespace noc
