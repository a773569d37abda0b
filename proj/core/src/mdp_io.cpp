#include "noc/mdp_io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace noc {

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream ss(line);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw Error(ErrorCode::parse, fmt::format("line {}: {}", line_no, what));
}

int to_int(const std::string& word, int line_no) {
  int value = 0;
  const auto* end = word.data() + word.size();
  const auto [ptr, ec] = std::from_chars(word.data(), end, value);
  if (ec != std::errc() || ptr != end) fail(line_no, fmt::format("expected integer, got '{}'", word));
  return value;
}

double to_double(const std::string& word, int line_no) {
  char* end = nullptr;
  const double value = std::strtod(word.c_str(), &end);
  if (end != word.c_str() + word.size() || word.empty()) {
    fail(line_no, fmt::format("expected number, got '{}'", word));
  }
  return value;
}

}  // namespace

TabularMdp parse_mdp(std::istream& in) {
  std::optional<int> states;
  std::optional<int> actions;
  double gamma = 1.0;
  std::optional<int> max_steps;
  std::vector<double> initial;
  std::vector<int> terminals;
  struct Entry {
    int line, s, a, sn;
    double p, r;
  };
  std::vector<Entry> entries;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto words = split_words(line);
    if (words.empty()) continue;
    const auto& key = words[0];
    const auto nargs = words.size() - 1;
    if (key == "states" || key == "actions" || key == "max_steps") {
      if (nargs != 1) fail(line_no, fmt::format("'{}' takes one value", key));
      const int v = to_int(words[1], line_no);
      if (v <= 0) fail(line_no, fmt::format("'{}' must be positive", key));
      if (key == "states") states = v;
      else if (key == "actions") actions = v;
      else max_steps = v;
    } else if (key == "gamma") {
      if (nargs != 1) fail(line_no, "'gamma' takes one value");
      gamma = to_double(words[1], line_no);
    } else if (key == "initial") {
      initial.clear();
      for (std::size_t i = 1; i < words.size(); ++i) initial.push_back(to_double(words[i], line_no));
    } else if (key == "terminal") {
      for (std::size_t i = 1; i < words.size(); ++i) terminals.push_back(to_int(words[i], line_no));
    } else if (key == "t") {
      if (nargs != 5) fail(line_no, "'t' takes <s> <a> <s'> <prob> <reward>");
      entries.push_back({line_no, to_int(words[1], line_no), to_int(words[2], line_no),
                         to_int(words[3], line_no), to_double(words[4], line_no),
                         to_double(words[5], line_no)});
    } else {
      fail(line_no, fmt::format("unknown directive '{}'", key));
    }
  }

  if (!states || !actions) throw Error(ErrorCode::parse, "missing 'states' or 'actions'");
  auto mdp = TabularMdp::make(*states, *actions);
  mdp.gamma = gamma;
  mdp.max_episode_steps = max_steps;
  if (initial.size() != static_cast<std::size_t>(*states)) {
    throw Error(ErrorCode::parse,
                fmt::format("'initial' needs {} entries, got {}", *states, initial.size()));
  }
  mdp.initial_dist = initial;

  for (const int s : terminals) {
    if (s < 0 || s >= *states) throw Error(ErrorCode::parse, fmt::format("terminal {} out of range", s));
    mdp.make_absorbing(s);
  }
  for (const auto& e : entries) {
    if (e.s < 0 || e.s >= *states || e.sn < 0 || e.sn >= *states || e.a < 0 || e.a >= *actions) {
      fail(e.line, "index out of range");
    }
    if (mdp.is_terminal(e.s)) fail(e.line, fmt::format("transition out of terminal state {}", e.s));
    const auto i = mdp.index(e.s, e.a, e.sn);
    const double old_p = mdp.transition[i];
    mdp.transition[i] += e.p;
    // Repeated entries for one triple keep the probability-weighted reward.
    mdp.reward[i] = old_p > 0.0 && mdp.transition[i] > 0.0
                        ? (old_p * mdp.reward[i] + e.p * e.r) / mdp.transition[i]
                        : e.r;
  }

  const auto violations = validate(mdp);
  if (!violations.empty()) {
    std::string message = "MDP fails validation:";
    for (const auto& v : violations) message += fmt::format("\n  {}: {}", to_string(v.code), v.message);
    throw Error(ErrorCode::parse, message);
  }
  return mdp;
}

TabularMdp parse_mdp_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_mdp(in);
}

TabularMdp load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  return parse_mdp(in);
}

void write_mdp(std::ostream& out, const TabularMdp& mdp) {
  out << fmt::format("states {}\nactions {}\ngamma {:.17g}\n", mdp.num_states, mdp.num_actions,
                     mdp.gamma);
  if (mdp.max_episode_steps) out << fmt::format("max_steps {}\n", *mdp.max_episode_steps);
  out << "initial";
  for (const double p : mdp.initial_dist) out << fmt::format(" {:.17g}", p);
  out << '\n';
  bool any_terminal = false;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (!mdp.is_terminal(s)) continue;
    if (!any_terminal) out << "terminal";
    any_terminal = true;
    out << ' ' << s;
  }
  if (any_terminal) out << '\n';
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.num_actions; ++a) {
      for (int sn = 0; sn < mdp.num_states; ++sn) {
        const double p = mdp.p(s, a, sn);
        if (p == 0.0 && mdp.r(s, a, sn) == 0.0) continue;
        out << fmt::format("t {} {} {} {:.17g} {:.17g}\n", s, a, sn, p, mdp.r(s, a, sn));
      }
    }
  }
}

}  // namespace noc
