#include "noc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "noc/envs.hpp"
#include "noc/error.hpp"
#include "noc/features.hpp"
#include "noc/mdp_io.hpp"
#include "noc/oracle.hpp"

namespace noc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_real(std::string_view key, std::string_view text) {
  const std::string buf(text);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || *end != '\0' || !std::isfinite(value)) {
    throw Error(ErrorCode::config, fmt::format("{}: '{}' is not a finite number", key, text));
  }
  return value;
}

template <typename Int>
Int to_integer(std::string_view key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::config, fmt::format("{}: '{}' is not an integer", key, text));
  }
  return value;
}

std::string_view style_name(ValueStyle style) {
  return style == ValueStyle::max ? "max" : "expectation";
}

std::string_view form_name(OmegaTdForm form) {
  return form == OmegaTdForm::scaled_baseline ? "scaled_baseline" : "standard";
}

struct Environment {
  TabularMdp mdp;
  FeatureMap fmap;
  OptionParams params;
  CriticTables critic;
};

Environment build_environment(const RunConfig& config) {
  if (config.env == "two_state") {
    TabularMdp mdp = two_state_mdp();
    if (config.gamma) mdp.gamma = *config.gamma;
    TwoStateInit init = two_state_initialization(mdp.gamma, config.critic_lr);
    return {std::move(mdp), FeatureMap::one_hot(2), std::move(init.params), std::move(init.critic)};
  }
  TabularMdp mdp;
  if (config.env == "four_rooms") {
    GridOptions opts;
    if (config.gamma) opts.gamma = *config.gamma;
    if (config.max_steps) opts.max_steps = *config.max_steps;
    opts.slip = config.slip;
    if (config.layout.empty()) {
      mdp = four_rooms(opts).mdp;
    } else {
      std::ifstream in(config.layout);
      if (!in) throw Error(ErrorCode::io, fmt::format("cannot open layout '{}'", config.layout));
      mdp = parse_grid_layout(in, opts).mdp;
    }
  } else {
    mdp = load_mdp(config.env);
    if (config.gamma) mdp.gamma = *config.gamma;
  }
  OptionParams params = OptionParams::zeros(config.num_options, mdp.num_states, mdp.num_actions);
  CriticTables critic = CriticTables::zeros(mdp.num_states, config.num_options, mdp.gamma);
  critic.learning_rate = config.critic_lr;
  FeatureMap fmap = FeatureMap::one_hot(mdp.num_states);
  return {std::move(mdp), std::move(fmap), std::move(params), std::move(critic)};
}

double mean_of(const std::vector<double>& v, std::size_t first, std::size_t last) {
  if (last <= first) return 0.0;
  double sum = 0.0;
  for (std::size_t i = first; i < last; ++i) sum += v[i];
  return sum / static_cast<double>(last - first);
}

}  // namespace

// ---------------------------------------------------------------- config

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"preset", "two_state | four_rooms; resets every key (config files: first line only)"},
      {"env", "two_state | four_rooms | path to an .mdp description"},
      {"layout", "grid layout file used instead of the built-in four rooms"},
      {"mode", "inoc | inoc_derived | vanilla_oc"},
      {"num_episodes", "episodes per run (>= 0)"},
      {"num_runs", "independent seeded runs (>= 1)"},
      {"num_options", "number of options (two_state requires 2)"},
      {"alpha_theta", "intra-option policy step size"},
      {"alpha_vartheta", "termination step size"},
      {"alpha_eta", "eta coefficient step size"},
      {"alpha_phi", "phi coefficient step size"},
      {"lambda", "eligibility trace decay in [0, 1]"},
      {"critic_lr", "intra-option Q-learning rate"},
      {"epsilon", "epsilon of the greedy policy over options, in [0, 1]"},
      {"gamma", "discount override in [0, 1]"},
      {"beta_clamp", "termination probabilities kept in [c, 1 - c]"},
      {"slip", "grid move-replacement probability in [0, 1]"},
      {"max_steps", "episode step cap override"},
      {"value_style", "expectation | max"},
      {"omega_td_form", "standard | scaled_baseline"},
      {"seed", "base seed; run k uses a seed derived from it"},
      {"output", "output directory (NOC_OUTPUT_DIR overrides)"},
      {"threads", "worker threads, 0 = hardware concurrency"},
  };
  return keys;
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "two_state") {
    c.env = "two_state";
    c.num_episodes = 2000;
    c.num_runs = 200;
    c.num_options = 2;
    c.rates.alpha_theta = 1e-6;
    c.rates.alpha_vartheta = 0.0025;
    c.rates.alpha_eta = 0.5;
    c.rates.alpha_phi = 0.75;
    c.rates.lambda = 0.5;
    c.critic_lr = 0.5;
    c.epsilon = 0.05;
    return c;
  }
  if (name == "four_rooms") {
    c.env = "four_rooms";
    c.num_episodes = 20000;
    c.num_runs = 50;
    c.num_options = 4;
    c.rates = LearningRates{0.0025, 0.0025, 0.5, 0.75, 0.5};
    c.critic_lr = 0.5;
    c.epsilon = 0.05;
    return c;
  }
  throw Error(ErrorCode::config, fmt::format("unknown preset '{}'", name));
}

void apply_setting(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::config, fmt::format("expected key=value, got '{}'", assignment));
  }
  const std::string_view key = trim(assignment.substr(0, eq));
  const std::string_view value = trim(assignment.substr(eq + 1));

  if (key == "preset") {
    config = preset(value);
  } else if (key == "env") {
    config.env = std::string(value);
  } else if (key == "layout") {
    config.layout = std::string(value);
  } else if (key == "mode") {
    const auto mode = parse_agent_mode(value);
    if (!mode) throw Error(ErrorCode::config, fmt::format("unknown mode '{}'", value));
    config.mode = *mode;
  } else if (key == "num_episodes") {
    config.num_episodes = to_integer<int>(key, value);
  } else if (key == "num_runs") {
    config.num_runs = to_integer<int>(key, value);
  } else if (key == "num_options") {
    config.num_options = to_integer<int>(key, value);
  } else if (key == "alpha_theta") {
    config.rates.alpha_theta = to_real(key, value);
  } else if (key == "alpha_vartheta") {
    config.rates.alpha_vartheta = to_real(key, value);
  } else if (key == "alpha_eta") {
    config.rates.alpha_eta = to_real(key, value);
  } else if (key == "alpha_phi") {
    config.rates.alpha_phi = to_real(key, value);
  } else if (key == "lambda") {
    config.rates.lambda = to_real(key, value);
  } else if (key == "critic_lr") {
    config.critic_lr = to_real(key, value);
  } else if (key == "epsilon") {
    config.epsilon = to_real(key, value);
  } else if (key == "gamma") {
    if (value.empty() || value == "default") {
      config.gamma.reset();
    } else {
      config.gamma = to_real(key, value);
    }
  } else if (key == "beta_clamp") {
    config.beta_clamp = to_real(key, value);
  } else if (key == "slip") {
    config.slip = to_real(key, value);
  } else if (key == "max_steps") {
    if (value.empty() || value == "default") {
      config.max_steps.reset();
    } else {
      config.max_steps = to_integer<int>(key, value);
    }
  } else if (key == "value_style") {
    if (value == "expectation" || value == "epsilon_greedy_expectation") {
      config.value_style = ValueStyle::epsilon_greedy_expectation;
    } else if (value == "max") {
      config.value_style = ValueStyle::max;
    } else {
      throw Error(ErrorCode::config, fmt::format("unknown value_style '{}'", value));
    }
  } else if (key == "omega_td_form") {
    if (value == "standard") {
      config.omega_td_form = OmegaTdForm::standard;
    } else if (value == "scaled_baseline") {
      config.omega_td_form = OmegaTdForm::scaled_baseline;
    } else {
      throw Error(ErrorCode::config, fmt::format("unknown omega_td_form '{}'", value));
    }
  } else if (key == "seed") {
    config.seed = to_integer<std::uint64_t>(key, value);
  } else if (key == "output") {
    config.output = std::string(value);
  } else if (key == "threads") {
    config.threads = to_integer<int>(key, value);
  } else {
    throw Error(ErrorCode::config, fmt::format("unknown config key '{}'", key));
  }
}

void apply_config_stream(RunConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  bool seen_setting = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const bool is_preset = trim(view.substr(0, view.find('='))) == "preset";
    if (is_preset && seen_setting) {
      throw Error(ErrorCode::config, fmt::format("line {}: preset must come before other keys", line_no));
    }
    try {
      apply_setting(config, view);
    } catch (const Error& e) {
      throw Error(ErrorCode::config, fmt::format("line {}: {}", line_no, e.what()));
    }
    seen_setting = true;
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open config '{}'", path.string()));
  RunConfig config;
  apply_config_stream(config, in);
  return config;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> out;
  auto positive = [&](double v, std::string_view name) {
    if (!(v > 0.0)) out.push_back(fmt::format("{} must be > 0 (got {})", name, v));
  };
  positive(c.rates.alpha_theta, "alpha_theta");
  positive(c.rates.alpha_vartheta, "alpha_vartheta");
  positive(c.rates.alpha_eta, "alpha_eta");
  positive(c.rates.alpha_phi, "alpha_phi");
  positive(c.critic_lr, "critic_lr");
  if (!(c.rates.lambda >= 0.0 && c.rates.lambda <= 1.0)) out.push_back("lambda must lie in [0, 1]");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) out.push_back("epsilon must lie in [0, 1]");
  if (c.gamma && !(*c.gamma >= 0.0 && *c.gamma <= 1.0)) out.push_back("gamma must lie in [0, 1]");
  if (!(c.beta_clamp > 0.0 && c.beta_clamp < 0.5)) out.push_back("beta_clamp must lie in (0, 0.5)");
  if (!(c.slip >= 0.0 && c.slip <= 1.0)) out.push_back("slip must lie in [0, 1]");
  if (c.max_steps && *c.max_steps < 1) out.push_back("max_steps must be >= 1");
  if (c.num_runs < 1) out.push_back("num_runs must be >= 1");
  if (c.num_episodes < 0) out.push_back("num_episodes must be >= 0");
  if (c.num_options < 1) out.push_back("num_options must be >= 1");
  if (c.threads < 0) out.push_back("threads must be >= 0");
  if (c.env == "two_state" && c.num_options != 2) out.push_back("two_state uses exactly 2 options");
  if (c.env != "two_state" && c.env != "four_rooms" && !std::filesystem::exists(c.env)) {
    out.push_back(fmt::format("env '{}' is neither built in nor an existing file", c.env));
  }
  if (!c.layout.empty() && !std::filesystem::exists(c.layout)) {
    out.push_back(fmt::format("layout file '{}' does not exist", c.layout));
  }
  return out;
}

void write_config(std::ostream& out, const RunConfig& c) {
  fmt::print(out, "env = {}\n", c.env);
  if (!c.layout.empty()) fmt::print(out, "layout = {}\n", c.layout);
  fmt::print(out, "mode = {}\n", to_string(c.mode));
  fmt::print(out, "num_episodes = {}\n", c.num_episodes);
  fmt::print(out, "num_runs = {}\n", c.num_runs);
  fmt::print(out, "num_options = {}\n", c.num_options);
  fmt::print(out, "alpha_theta = {:.17g}\n", c.rates.alpha_theta);
  fmt::print(out, "alpha_vartheta = {:.17g}\n", c.rates.alpha_vartheta);
  fmt::print(out, "alpha_eta = {:.17g}\n", c.rates.alpha_eta);
  fmt::print(out, "alpha_phi = {:.17g}\n", c.rates.alpha_phi);
  fmt::print(out, "lambda = {:.17g}\n", c.rates.lambda);
  fmt::print(out, "critic_lr = {:.17g}\n", c.critic_lr);
  fmt::print(out, "epsilon = {:.17g}\n", c.epsilon);
  if (c.gamma) fmt::print(out, "gamma = {:.17g}\n", *c.gamma);
  fmt::print(out, "beta_clamp = {:.17g}\n", c.beta_clamp);
  fmt::print(out, "slip = {:.17g}\n", c.slip);
  if (c.max_steps) fmt::print(out, "max_steps = {}\n", *c.max_steps);
  fmt::print(out, "value_style = {}\n", style_name(c.value_style));
  fmt::print(out, "omega_td_form = {}\n", form_name(c.omega_td_form));
  fmt::print(out, "seed = {}\n", c.seed);
  fmt::print(out, "output = {}\n", c.output);
  fmt::print(out, "threads = {}\n", c.threads);
}

// ---------------------------------------------------------------- runs

RunResult execute_run(const RunConfig& config, int run_index) {
  Environment env = build_environment(config);
  RunResult result;
  result.run_index = run_index;
  result.seed = derive_seed(config.seed, static_cast<std::uint64_t>(run_index));
  Rng rng(result.seed);

  AgentState agent;
  agent.mode = config.mode;
  agent.params = std::move(env.params);
  agent.params.epsilon_over_options = config.epsilon;
  agent.params.beta_clamp = config.beta_clamp;
  agent.critic = std::move(env.critic);
  agent.critic.learning_rate = config.critic_lr;
  agent.critic.value_style = config.value_style;
  agent.critic.omega_td_form = config.omega_td_form;
  agent.natural = NaturalGradientState::zeros(agent.params, config.rates);

  EpisodeLimits limits;
  limits.max_steps = config.max_steps;
  result.episodes.reserve(static_cast<std::size_t>(config.num_episodes));
  for (int e = 0; e < config.num_episodes; ++e) {
    EpisodeRecord rec = run_episode(agent, env.mdp, env.fmap, rng, limits);
    rec.episode = e + 1;
    result.episodes.push_back(rec);
  }
  return result;
}

std::vector<RunResult> execute_runs(const RunConfig& config) {
  std::vector<RunResult> results(static_cast<std::size_t>(config.num_runs));
  int workers = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  workers = std::min(workers, config.num_runs);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (int k = next.fetch_add(1); k < config.num_runs; k = next.fetch_add(1)) {
      try {
        results[static_cast<std::size_t>(k)] = execute_run(config, k);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& runs) {
  std::vector<AggregateRow> rows;
  if (runs.empty()) return rows;
  const std::size_t episodes = runs.front().episodes.size();
  for (const auto& r : runs) {
    if (r.episodes.size() != episodes) {
      throw Error(ErrorCode::length_mismatch, "runs differ in episode count");
    }
  }
  const double n = static_cast<double>(runs.size());
  auto stats = [&](std::size_t e, auto field) {
    double sum = 0.0;
    for (const auto& r : runs) sum += field(r.episodes[e]);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : runs) {
      const double d = field(r.episodes[e]) - mean;
      ss += d * d;
    }
    const double se = runs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  for (std::size_t e = 0; e < episodes; ++e) {
    AggregateRow row;
    row.episode = runs.front().episodes[e].episode;
    std::tie(row.mean_return_disc, row.se_return_disc) =
        stats(e, [](const EpisodeRecord& r) { return r.return_discounted; });
    std::tie(row.mean_return_undisc, row.se_return_undisc) =
        stats(e, [](const EpisodeRecord& r) { return r.return_undiscounted; });
    std::tie(row.mean_steps, row.se_steps) =
        stats(e, [](const EpisodeRecord& r) { return static_cast<double>(r.steps); });
    row.mean_term_frac = stats(e, [](const EpisodeRecord& r) { return r.termination_update_fraction; }).first;
    rows.push_back(row);
  }
  return rows;
}

void write_run_csv(std::ostream& out, const RunResult& run) {
  fmt::print(out, "{}\n", kRunHeader);
  for (const auto& e : run.episodes) {
    fmt::print(out, "{},{:.17g},{:.17g},{},{:.17g},{}\n", e.episode, e.return_discounted,
               e.return_undiscounted, e.steps, e.termination_update_fraction, e.step_limit_hit ? 1 : 0);
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  fmt::print(out, "{}\n", kAggregateHeader);
  for (const auto& r : rows) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.episode,
               r.mean_return_disc, r.se_return_disc, r.mean_return_undisc, r.se_return_undisc,
               r.mean_steps, r.se_steps, r.mean_term_frac);
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kAggregateHeader) {
    throw Error(ErrorCode::parse, "aggregate file does not start with the expected header");
  }
  std::vector<AggregateRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = trim(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cells.size() != 8) {
      throw Error(ErrorCode::parse, fmt::format("aggregate line {}: expected 8 columns, got {}", line_no, cells.size()));
    }
    try {
      AggregateRow r;
      r.episode = to_integer<int>("episode", cells[0]);
      r.mean_return_disc = to_real("mean_return_disc", cells[1]);
      r.se_return_disc = to_real("se_return_disc", cells[2]);
      r.mean_return_undisc = to_real("mean_return_undisc", cells[3]);
      r.se_return_undisc = to_real("se_return_undisc", cells[4]);
      r.mean_steps = to_real("mean_steps", cells[5]);
      r.se_steps = to_real("se_steps", cells[6]);
      r.mean_term_frac = to_real("mean_term_frac", cells[7]);
      rows.push_back(r);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, fmt::format("aggregate line {}: {}", line_no, e.what()));
    }
  }
  return rows;
}

std::vector<AggregateRow> load_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path.string()));
  return read_aggregate_csv(in);
}

std::filesystem::path resolve_output_directory(const RunConfig& config) {
  if (const char* env = std::getenv("NOC_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.output;
}

RunOutput run(const RunConfig& config) {
  const auto problems = validate_config(config);
  if (!problems.empty()) {
    std::string joined;
    for (const auto& p : problems) joined += "\n  " + p;
    throw Error(ErrorCode::config, "invalid config:" + joined);
  }
  RunOutput out;
  out.directory = resolve_output_directory(config);
  std::error_code ec;
  std::filesystem::create_directories(out.directory, ec);
  if (ec) {
    throw Error(ErrorCode::io, fmt::format("cannot create '{}': {}", out.directory.string(), ec.message()));
  }
  const auto results = execute_runs(config);
  out.aggregate = aggregate(results);

  auto write_file = [](const std::filesystem::path& path, auto&& body) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
    body(file);
    file.flush();
    if (!file) throw Error(ErrorCode::io, fmt::format("write to '{}' failed", path.string()));
  };
  for (const auto& r : results) {
    const auto path = out.directory / fmt::format("run_{}.csv", r.run_index);
    write_file(path, [&](std::ostream& f) { write_run_csv(f, r); });
    out.run_files.push_back(path);
  }
  out.aggregate_file = out.directory / "aggregate.csv";
  write_file(out.aggregate_file, [&](std::ostream& f) { write_aggregate_csv(f, out.aggregate); });
  write_file(out.directory / "config.txt", [&](std::ostream& f) { write_config(f, config); });
  return out;
}

// ---------------------------------------------------------------- compare

std::optional<Metric> parse_metric(std::string_view text) {
  if (text == "return" || text == "return_undisc" || text == "return_undiscounted") return Metric::return_undiscounted;
  if (text == "return_disc" || text == "return_discounted") return Metric::return_discounted;
  if (text == "steps") return Metric::steps;
  return std::nullopt;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  const std::size_t w = static_cast<std::size_t>(std::max(1, window));
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= w) sum -= values[i - w];
    out[i] = sum / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

std::vector<double> metric_column(const std::vector<AggregateRow>& rows, Metric metric) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    switch (metric) {
      case Metric::return_undiscounted: out.push_back(r.mean_return_undisc); break;
      case Metric::return_discounted: out.push_back(r.mean_return_disc); break;
      case Metric::steps: out.push_back(r.mean_steps); break;
    }
  }
  return out;
}

namespace {

AgentSummary summarize(const std::vector<AggregateRow>& rows, const CompareOptions& opt) {
  AgentSummary s;
  const auto values = metric_column(rows, opt.metric);
  const auto smooth = moving_average(values, opt.window);
  const bool lower_is_better = opt.metric == Metric::steps;
  auto first_crossing = [&](double level) {
    for (std::size_t i = 0; i < smooth.size(); ++i) {
      if (lower_is_better ? smooth[i] <= level : smooth[i] >= level) return rows[i].episode;
    }
    return -1;
  };
  std::optional<double> threshold = opt.threshold;
  std::optional<double> escape_level;
  if (opt.optimum) {
    escape_level = lower_is_better ? *opt.optimum / opt.optimum_fraction : *opt.optimum * opt.optimum_fraction;
    if (!threshold) threshold = escape_level;
  }
  if (threshold) s.episodes_to_threshold = first_crossing(*threshold);
  if (escape_level) s.plateau_escape = first_crossing(*escape_level);
  const std::size_t auc_end = std::min(values.size(), static_cast<std::size_t>(std::max(0, opt.auc_episodes)));
  for (std::size_t i = 0; i < auc_end; ++i) s.area_under_curve += values[i];
  double frac = 0.0;
  for (const auto& r : rows) frac += r.mean_term_frac;
  s.mean_term_frac = rows.empty() ? 0.0 : frac / static_cast<double>(rows.size());
  const std::size_t w = std::min(values.size(), static_cast<std::size_t>(std::max(1, opt.window)));
  s.final_window_mean = mean_of(values, values.size() - w, values.size());
  return s;
}

}  // namespace

CompareSummary compare(const std::vector<AggregateRow>& a, const std::vector<AggregateRow>& b,
                       const CompareOptions& options) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::length_mismatch,
                fmt::format("aggregate files have {} and {} episodes", a.size(), b.size()));
  }
  CompareSummary out;
  out.a = summarize(a, options);
  out.b = summarize(b, options);
  const auto va = metric_column(a, options.metric);
  const auto vb = metric_column(b, options.metric);
  const std::size_t width = static_cast<std::size_t>(std::max(1, options.report_window));
  for (std::size_t first = 0; first < va.size(); first += width) {
    const std::size_t last = std::min(va.size(), first + width);
    WindowDiff w;
    w.first_episode = a[first].episode;
    w.last_episode = a[last - 1].episode;
    w.mean_a = mean_of(va, first, last);
    w.mean_b = mean_of(vb, first, last);
    w.difference = w.mean_a - w.mean_b;
    out.windows.push_back(w);
  }
  return out;
}

void write_compare_summary(std::ostream& out, const CompareSummary& summary,
                           const CompareOptions& options, std::string_view label_a,
                           std::string_view label_b) {
  const char* metric = options.metric == Metric::steps               ? "steps"
                       : options.metric == Metric::return_discounted ? "return_disc"
                                                                      : "return_undisc";
  fmt::print(out, "metric {}  moving-average window {}\n", metric, options.window);
  if (options.optimum) {
    fmt::print(out, "optimum {:.6g}  escape fraction {:.3g}\n", *options.optimum, options.optimum_fraction);
  }
  fmt::print(out, "{:<28}{:>16}{:>16}\n", "", label_a, label_b);
  auto row_int = [&](const char* name, int x, int y) { fmt::print(out, "{:<28}{:>16}{:>16}\n", name, x, y); };
  auto row_real = [&](const char* name, double x, double y) {
    fmt::print(out, "{:<28}{:>16.6f}{:>16.6f}\n", name, x, y);
  };
  row_int("episodes_to_threshold", summary.a.episodes_to_threshold, summary.b.episodes_to_threshold);
  row_int("plateau_escape", summary.a.plateau_escape, summary.b.plateau_escape);
  row_real(fmt::format("area_first_{}", options.auc_episodes).c_str(), summary.a.area_under_curve,
           summary.b.area_under_curve);
  row_real("mean_term_frac", summary.a.mean_term_frac, summary.b.mean_term_frac);
  row_real("final_window_mean", summary.a.final_window_mean, summary.b.final_window_mean);
  fmt::print(out, "\n{:>8}{:>8}{:>16}{:>16}{:>16}\n", "first", "last", label_a, label_b, "difference");
  for (const auto& w : summary.windows) {
    fmt::print(out, "{:>8}{:>8}{:>16.6f}{:>16.6f}{:>16.6f}\n", w.first_episode, w.last_episode,
               w.mean_a, w.mean_b, w.difference);
  }
}

// ---------------------------------------------------------------- oracle check

bool OracleReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

namespace {

double relative(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = want.norm();
  return (got - want).norm() / (scale > 0.0 ? scale : 1.0);
}

double relative(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  const double scale = want.norm();
  return (got - want).norm() / (scale > 0.0 ? scale : 1.0);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

OracleReport oracle_check(const OracleCheckOptions& opt) {
  using namespace oracle;
  if (static_cast<long>(opt.num_states) * opt.num_options > kMaxPairs) {
    throw Error(ErrorCode::instance_too_large,
                fmt::format("{} states x {} options exceeds the oracle cap of {} pairs",
                            opt.num_states, opt.num_options, kMaxPairs));
  }
  if (opt.num_states < 1 || opt.num_actions < 1 || opt.num_options < 1 || opt.instances < 1) {
    throw Error(ErrorCode::config, "oracle-check needs positive sizes and at least one instance");
  }
  const auto Kind_active = ChainStart::Kind::active;
  const auto Kind_arrival = ChainStart::Kind::arrival;

  double eta_eq = 0.0, phi_eq = 0.0, pg_fd = 0.0, tg_fd = 0.0, asym = 0.0, min_eig = 0.0;
  double sym_form = 0.0, single_step = 0.0, continued = 0.0, bellman = 0.0, mu_routes = 0.0;
  for (int i = 0; i < opt.instances; ++i) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
    const RandomInstance inst = random_instance(opt.num_states, opt.num_actions, opt.num_options, opt.gamma, rng);
    const ChainStart active = ChainStart::from_initial(inst.mdp, inst.pi_over, Kind_active);
    const ChainStart arrival = ChainStart::from_initial(inst.mdp, inst.pi_over, Kind_arrival);

    const Eigen::VectorXd grad_q = exact_policy_gradient(inst.mdp, inst.params, inst.fmap, inst.pi_over, active);
    const Eigen::MatrixXd g_theta =
        exact_fim_theta(inst.mdp, inst.params, inst.fmap, inst.pi_over, active, Normalization::unnormalized);
    const Eigen::VectorXd eta = least_squares_eta(inst.mdp, inst.params, inst.fmap, inst.pi_over, active);
    eta_eq = std::max(eta_eq, relative(Eigen::VectorXd(g_theta * eta), grad_q));

    const Eigen::VectorXd grad_u =
        exact_termination_gradient(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival);
    const Eigen::MatrixXd g_vt =
        exact_fim_vartheta(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival, Normalization::unnormalized);
    const Eigen::VectorXd phi = least_squares_phi(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival);
    phi_eq = std::max(phi_eq, relative(Eigen::VectorXd(g_vt * (-phi)), grad_u));

    pg_fd = std::max(pg_fd, relative(grad_q, finite_diff_gradient(inst.mdp, inst.params, inst.fmap, inst.pi_over,
                                                                 Manifold::theta, active, 1e-5)));
    tg_fd = std::max(tg_fd, relative(grad_u, finite_diff_gradient(inst.mdp, inst.params, inst.fmap, inst.pi_over,
                                                                 Manifold::vartheta, arrival, 1e-5)));

    const Eigen::MatrixXd ft = exact_fim_theta(inst.mdp, inst.params, inst.fmap, inst.pi_over, active);
    const Eigen::MatrixXd fv = exact_fim_vartheta(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival);
    const Eigen::MatrixXd fv_sym =
        exact_fim_vartheta_symmetric_form(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival);
    asym = std::max({asym, (ft - ft.transpose()).cwiseAbs().maxCoeff(), (fv - fv.transpose()).cwiseAbs().maxCoeff()});
    min_eig = std::min({min_eig, min_eigenvalue(ft), min_eigenvalue(fv)});
    sym_form = std::max(sym_form, (fv - fv_sym).cwiseAbs().maxCoeff());

    for (int s = 0; s < opt.num_states; ++s) {
      for (int o = 0; o < opt.num_options; ++o) {
        for (Manifold m : {Manifold::theta, Manifold::vartheta}) {
          const auto f = single_step_fisher(inst.params, inst.fmap, inst.pi_over, m, o, s);
          single_step = std::max(single_step, (f.score_outer - f.negative_hessian).cwiseAbs().maxCoeff());
        }
      }
    }

    const ExactSolution sol = exact_values(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival);
    for (int s = 0; s < opt.num_states; ++s) {
      for (int o = 0; o < opt.num_options; ++o) {
        const double beta = termination_prob(inst.params, inst.fmap, o, s);
        continued = std::max(continued, std::abs(sol.a_omega_continued(s, o) + beta * sol.a_omega(s, o)));
      }
    }
    bellman = std::max(bellman, sol.max_bellman_residual);
    const AugmentedChain chain = build_chain(inst.mdp, inst.params, inst.fmap, inst.pi_over, active);
    mu_routes = std::max(mu_routes, relative(exact_mu_shifted_direct(chain, opt.gamma),
                                             exact_mu(chain, opt.gamma).mu_shifted));
  }

  // Monte-Carlo limits and TD consistency on the first instance.
  Rng rng(derive_seed(opt.seed, 0));
  const RandomInstance inst = random_instance(opt.num_states, opt.num_actions, opt.num_options, opt.gamma, rng);
  const ChainStart active = ChainStart::from_initial(inst.mdp, inst.pi_over, Kind_active);
  const ChainStart arrival = ChainStart::from_initial(inst.mdp, inst.pi_over, Kind_arrival);
  Rng mc_rng(derive_seed(opt.seed, 1'000'003));
  const double mc_theta =
      relative(mc_fim_estimate(inst.mdp, inst.params, inst.fmap, inst.pi_over, active, Manifold::theta,
                               opt.mc_horizon, opt.mc_paths, mc_rng),
               exact_fim_theta(inst.mdp, inst.params, inst.fmap, inst.pi_over, active));
  const double mc_vt =
      relative(mc_fim_estimate(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival, Manifold::vartheta,
                               opt.mc_horizon, opt.mc_paths, mc_rng),
               exact_fim_vartheta(inst.mdp, inst.params, inst.fmap, inst.pi_over, arrival));
  Rng td_rng(derive_seed(opt.seed, 2'000'003));
  const TdConsistency td =
      td_consistency(inst.mdp, inst.params, inst.fmap, inst.pi_over, OmegaTdForm::standard, opt.td_steps, td_rng);
  auto worst_z = [](const std::vector<CellStat>& cells, int& counted) {
    double worst = 0.0;
    counted = 0;
    for (const auto& c : cells) {
      if (c.count < 500) continue;
      ++counted;
      const double z = c.standard_error > 0.0 ? std::abs(c.mean - c.expected) / c.standard_error
                                              : (c.mean == c.expected ? 0.0 : HUGE_VAL);
      worst = std::max(worst, z);
    }
    return worst;
  };
  int cells_u = 0;
  int cells_o = 0;
  const double z_u = worst_z(td.delta_u, cells_u);
  const double z_o = worst_z(td.delta_omega, cells_o);

  OracleReport report;
  auto add = [&](std::string name, double value, double tol, bool below, std::string detail) {
    if (opt.tolerance_override) tol = *opt.tolerance_override;
    const bool ok = below ? value < tol : value >= tol;
    report.items.push_back({std::move(name), value, tol, ok, std::move(detail)});
  };
  const std::string over = fmt::format("max over {} instances", opt.instances);
  add("eta_equivalence", eta_eq, 1e-8, true, over + ", |G_theta eta - grad| / |grad|");
  add("phi_equivalence", phi_eq, 1e-8, true, over + ", |G_vartheta (-phi) - grad| / |grad|");
  add("policy_gradient_vs_finite_diff", pg_fd, 1e-5, true, over + ", relative error");
  add("termination_gradient_vs_finite_diff", tg_fd, 1e-5, true, over + ", relative error");
  add("fim_symmetry", asym, 1e-12, true, over + ", max |G - G^T|");
  add("fim_min_eigenvalue", min_eig, -1e-10, false, over + ", smallest eigenvalue");
  add("fim_vartheta_two_forms", sym_form, 1e-12, true, over + ", max entry difference");
  add("single_step_alternate_form", single_step, 1e-10, true, over + ", max |score outer + Hessian|");
  add("continued_advantage_identity", continued, 1e-12, true, over + ", max |a' + beta a|");
  add("bellman_residual", bellman, 1e-10, true, over);
  add("shifted_weighting_routes", mu_routes, 1e-10, true, over + ", relative difference");
  add("mc_fim_theta", mc_theta, 0.1, true,
      fmt::format("relative Frobenius error, T={}, {} paths", opt.mc_horizon, opt.mc_paths));
  add("mc_fim_vartheta", mc_vt, 0.1, true,
      fmt::format("relative Frobenius error, T={}, {} paths", opt.mc_horizon, opt.mc_paths));
  add("td_u_consistency", z_u, 3.0, true,
      fmt::format("worst |mean - a_U| / se over {} cells with >= 500 samples", cells_u));
  add("td_omega_consistency", z_o, 3.0, true,
      fmt::format("worst |mean - a_O| / se over {} cells with >= 500 samples", cells_o));
  return report;
}

void write_oracle_report(std::ostream& out, const OracleReport& report) {
  for (const auto& item : report.items) {
    fmt::print(out, "{} {:<38} value {:<14.6g} tolerance {:<10.3g} {}\n", item.passed ? "PASS" : "FAIL",
               item.name, item.value, item.tolerance, item.detail);
  }
  const auto failed = std::count_if(report.items.begin(), report.items.end(),
                                    [](const CheckItem& c) { return !c.passed; });
  fmt::print(out, "{} of {} checks passed\n", report.items.size() - static_cast<std::size_t>(failed),
             report.items.size());
}

}  // namespace noc
