#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noc/agent.hpp"
#include "noc/critic.hpp"

namespace noc {

// ---------------------------------------------------------------- config

/// One experiment. Config files are `key = value` lines ('#' comments);
/// see config_keys() for the full list.
struct RunConfig {
  std::string env = "two_state";  // two_state | four_rooms | path to an .mdp file
  std::string layout;             // optional grid layout file for four_rooms
  AgentMode mode = AgentMode::inoc;
  int num_episodes = 2000;
  int num_runs = 200;
  int num_options = 2;
  LearningRates rates;
  double critic_lr = 0.5;
  double epsilon = 0.05;
  std::optional<double> gamma;  // overrides the environment's discount
  double beta_clamp = 1e-6;
  double slip = 0.0;
  std::optional<int> max_steps;
  ValueStyle value_style = ValueStyle::epsilon_greedy_expectation;
  OmegaTdForm omega_td_form = OmegaTdForm::standard;
  std::uint64_t seed = 1;
  std::string output = "out";
  int threads = 0;  // 0: hardware concurrency
};

struct ConfigKey {
  std::string_view name;
  std::string_view description;
};
const std::vector<ConfigKey>& config_keys();

/// Reference hyperparameters for one environment: "two_state" or
/// "four_rooms". Throws config for unknown names.
RunConfig preset(std::string_view name);

/// Applies one `key=value` assignment. Throws config on unknown keys or
/// unparsable values.
void apply_setting(RunConfig& config, std::string_view assignment);

/// Reads `key = value` lines on top of `config`. A `preset = name` line, if
/// present, must come first and resets the config to that preset.
void apply_config_stream(RunConfig& config, std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Every violated constraint; empty when the config is runnable.
std::vector<std::string> validate_config(const RunConfig& config);

void write_config(std::ostream& out, const RunConfig& config);

// ---------------------------------------------------------------- runs

struct RunResult {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;
};

/// One independent seeded run, single threaded.
RunResult execute_run(const RunConfig& config, int run_index);

/// All runs, fanned out over threads; results ordered by run index.
std::vector<RunResult> execute_runs(const RunConfig& config);

struct AggregateRow {
  int episode = 0;
  double mean_return_disc = 0.0;
  double se_return_disc = 0.0;
  double mean_return_undisc = 0.0;
  double se_return_undisc = 0.0;
  double mean_steps = 0.0;
  double se_steps = 0.0;
  double mean_term_frac = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& runs);

inline constexpr std::string_view kAggregateHeader =
    "episode,mean_return_disc,se_return_disc,mean_return_undisc,se_return_undisc,"
    "mean_steps,se_steps,mean_term_frac";
inline constexpr std::string_view kRunHeader =
    "episode,return_disc,return_undisc,steps,term_frac,step_limit_hit";

void write_run_csv(std::ostream& out, const RunResult& run);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);
std::vector<AggregateRow> load_aggregate_csv(const std::filesystem::path& path);

struct RunOutput {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> run_files;
  std::filesystem::path aggregate_file;
  std::vector<AggregateRow> aggregate;
};

/// Output directory: NOC_OUTPUT_DIR when set, else config.output.
std::filesystem::path resolve_output_directory(const RunConfig& config);

/// Executes the config and writes run_<k>.csv per run, aggregate.csv and the
/// effective config.txt. Throws config for an invalid config and io on write
/// failures.
RunOutput run(const RunConfig& config);

// ---------------------------------------------------------------- compare

enum class Metric { return_undiscounted, return_discounted, steps };
std::optional<Metric> parse_metric(std::string_view text);

struct CompareOptions {
  Metric metric = Metric::return_undiscounted;
  int window = 50;
  /// Reference optimum; enables the plateau-escape column.
  std::optional<double> optimum;
  double optimum_fraction = 0.95;
  /// Level for episodes-to-threshold; a return must rise above it, a step
  /// count must fall below it. Defaults to optimum_fraction * optimum.
  std::optional<double> threshold;
  int report_window = 100;
  int auc_episodes = 200;
};

struct AgentSummary {
  int episodes_to_threshold = -1;  // -1: never reached
  int plateau_escape = -1;         // -1: never reached or no optimum
  double area_under_curve = 0.0;   // metric summed over the first auc_episodes
  double mean_term_frac = 0.0;
  double final_window_mean = 0.0;
};

struct WindowDiff {
  int first_episode = 0;
  int last_episode = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double difference = 0.0;  // a - b
};

struct CompareSummary {
  AgentSummary a;
  AgentSummary b;
  std::vector<WindowDiff> windows;
};

/// Trailing moving average; entry i averages rows max(0, i-window+1)..i.
std::vector<double> moving_average(const std::vector<double>& values, int window);
std::vector<double> metric_column(const std::vector<AggregateRow>& rows, Metric metric);

/// Throws length_mismatch when the files differ in episode count.
CompareSummary compare(const std::vector<AggregateRow>& a, const std::vector<AggregateRow>& b,
                       const CompareOptions& options);

void write_compare_summary(std::ostream& out, const CompareSummary& summary,
                           const CompareOptions& options, std::string_view label_a,
                           std::string_view label_b);

// ---------------------------------------------------------------- oracle check

struct OracleCheckOptions {
  std::uint64_t seed = 7;
  int num_states = 3;
  int num_actions = 2;
  int num_options = 2;
  double gamma = 0.9;
  int instances = 20;
  int mc_horizon = 200;
  int mc_paths = 20000;
  long td_steps = 2'000'000;
  /// Replaces every tolerance when set.
  std::optional<double> tolerance_override;
};

struct CheckItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct OracleReport {
  std::vector<CheckItem> items;
  bool all_passed() const;
};

/// Runs the exact-solution battery on random instances. Throws
/// instance_too_large when states * options exceeds the oracle cap.
OracleReport oracle_check(const OracleCheckOptions& options);

void write_oracle_report(std::ostream& out, const OracleReport& report);

}  // namespace noc
