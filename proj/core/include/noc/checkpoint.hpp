#pragma once

#include <iosfwd>
#include <optional>

#include "noc/critic.hpp"
#include "noc/options.hpp"

namespace noc {

// Text checkpoint, one labeled coordinate per line:
//
//   noc-checkpoint 1
//   shape <options> <features> <actions>
//   epsilon <x>
//   beta_clamp <x>
//   theta <o> <f> <a> <value>
//   vartheta <o> <f> <value>
//   critic <states> <gamma> <learning_rate> <expectation|max> <standard|scaled_baseline>
//   q_omega <s> <o> <value>
//
// Reals are written with 17 significant digits and read back with strtod,
// which round-trips every finite double exactly. The critic block is
// optional.

struct Checkpoint {
  OptionParams params;
  std::optional<CriticTables> critic;
};

void write_checkpoint(std::ostream& out, const OptionParams& params,
                      const CriticTables* critic = nullptr);

Checkpoint read_checkpoint(std::istream& in);

}  // namespace noc
