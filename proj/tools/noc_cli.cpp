// noc: run option-critic experiments, compare learning curves and run the
// exact-oracle battery.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "noc/envs.hpp"
#include "noc/error.hpp"
#include "noc/experiment.hpp"
#include "noc/mdp_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct RunArgs {
  std::string config_file;
  std::string preset;
  std::vector<std::string> settings;
  std::string output;
  bool list_keys = false;
};

int cmd_run(const RunArgs& args) {
  if (args.list_keys) {
    for (const auto& k : noc::config_keys()) fmt::print("{:<16} {}\n", k.name, k.description);
    return kOk;
  }
  noc::RunConfig config;
  try {
    if (!args.preset.empty()) config = noc::preset(args.preset);
    if (!args.config_file.empty()) {
      std::ifstream in(args.config_file);
      if (!in) {
        fmt::print(stderr, "error: cannot open config '{}'\n", args.config_file);
        return kInvalid;
      }
      noc::apply_config_stream(config, in);
    }
    for (const auto& s : args.settings) noc::apply_setting(config, s);
    if (!args.output.empty()) config.output = args.output;
  } catch (const noc::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  }
  const auto problems = noc::validate_config(config);
  if (!problems.empty()) {
    for (const auto& p : problems) fmt::print(stderr, "invalid config: {}\n", p);
    return kInvalid;
  }
  const noc::RunOutput out = noc::run(config);
  fmt::print("wrote {} run files and {}\n", out.run_files.size(), out.aggregate_file.string());
  if (!out.aggregate.empty()) {
    const auto& last = out.aggregate.back();
    fmt::print("final episode {}: mean return {:.4f} (undiscounted {:.4f}), mean steps {:.1f}\n",
               last.episode, last.mean_return_disc, last.mean_return_undisc, last.mean_steps);
  }
  return kOk;
}

struct OracleArgs {
  noc::OracleCheckOptions options;
  double tolerance = -1.0;
  bool override_tolerance = false;
  std::string report;
};

int cmd_oracle(OracleArgs args) {
  if (args.override_tolerance) args.options.tolerance_override = args.tolerance;
  const noc::OracleReport report = noc::oracle_check(args.options);
  noc::write_oracle_report(std::cout, report);
  if (!args.report.empty()) {
    std::ofstream out(args.report);
    if (!out) throw noc::Error(noc::ErrorCode::io, fmt::format("cannot write '{}'", args.report));
    noc::write_oracle_report(out, report);
  }
  return report.all_passed() ? kOk : kInvalid;
}

struct CompareArgs {
  std::string file_a;
  std::string file_b;
  std::string label_a = "a";
  std::string label_b = "b";
  std::string metric = "return";
  noc::CompareOptions options;
  double optimum = 0.0;
  double threshold = 0.0;
};

int cmd_compare(CompareArgs args, bool has_optimum, bool has_threshold) {
  const auto metric = noc::parse_metric(args.metric);
  if (!metric) {
    fmt::print(stderr, "error: unknown metric '{}'\n", args.metric);
    return kInvalid;
  }
  args.options.metric = *metric;
  if (has_optimum) args.options.optimum = args.optimum;
  if (has_threshold) args.options.threshold = args.threshold;
  const auto a = noc::load_aggregate_csv(args.file_a);
  const auto b = noc::load_aggregate_csv(args.file_b);
  const auto summary = noc::compare(a, b, args.options);
  noc::write_compare_summary(std::cout, summary, args.options, args.label_a, args.label_b);
  return kOk;
}

int cmd_validate_env(const std::string& target, bool grid) {
  noc::TabularMdp mdp;
  try {
    if (target == "two_state") {
      mdp = noc::two_state_mdp();
    } else if (target == "four_rooms") {
      mdp = noc::four_rooms().mdp;
    } else if (grid) {
      std::ifstream in(target);
      if (!in) throw noc::Error(noc::ErrorCode::io, fmt::format("cannot open '{}'", target));
      mdp = noc::parse_grid_layout(in).mdp;
    } else {
      mdp = noc::load_mdp(target);
    }
  } catch (const noc::Error& e) {
    if (e.code() == noc::ErrorCode::io) throw;
    fmt::print(stderr, "invalid: {}\n", e.what());
    return kInvalid;
  }
  const auto violations = noc::validate(mdp);
  for (const auto& v : violations) fmt::print(stderr, "{}: {}\n", noc::to_string(v.code), v.message);
  if (!violations.empty()) return kInvalid;
  int terminals = 0;
  for (int s = 0; s < mdp.num_states; ++s) terminals += mdp.is_terminal(s) ? 1 : 0;
  fmt::print("valid: {} states, {} actions, {} terminal, gamma {}\n", mdp.num_states,
             mdp.num_actions, terminals, mdp.gamma);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural option-critic experiments and exact oracle checks"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a multi-seed experiment and write CSV logs");
  run->add_option("-c,--config", run_args.config_file, "key = value config file");
  run->add_option("-p,--preset", run_args.preset, "two_state | four_rooms");
  run->add_option("-s,--set", run_args.settings, "override one key (key=value), repeatable");
  run->add_option("-o,--output", run_args.output, "output directory");
  run->add_flag("--list-keys", run_args.list_keys, "print every config key and exit");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-check", "Exact-oracle battery on random instances");
  oracle->add_option("--seed", oracle_args.options.seed, "instance seed")->capture_default_str();
  oracle->add_option("--states", oracle_args.options.num_states)->capture_default_str();
  oracle->add_option("--actions", oracle_args.options.num_actions)->capture_default_str();
  oracle->add_option("--options", oracle_args.options.num_options)->capture_default_str();
  oracle->add_option("--gamma", oracle_args.options.gamma)->capture_default_str();
  oracle->add_option("--instances", oracle_args.options.instances)->capture_default_str();
  oracle->add_option("--mc-horizon", oracle_args.options.mc_horizon)->capture_default_str();
  oracle->add_option("--mc-paths", oracle_args.options.mc_paths)->capture_default_str();
  oracle->add_option("--td-steps", oracle_args.options.td_steps)->capture_default_str();
  auto* tol = oracle->add_option("--tolerance", oracle_args.tolerance, "replace every tolerance");
  oracle->add_option("--report", oracle_args.report, "also write the report to this file");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Compare two aggregate.csv files");
  compare->add_option("a", cmp.file_a, "first aggregate file")->required();
  compare->add_option("b", cmp.file_b, "second aggregate file")->required();
  compare->add_option("--label-a", cmp.label_a)->capture_default_str();
  compare->add_option("--label-b", cmp.label_b)->capture_default_str();
  compare->add_option("--metric", cmp.metric, "return | return_disc | steps")->capture_default_str();
  compare->add_option("--window", cmp.options.window, "moving-average window")->capture_default_str();
  auto* optimum = compare->add_option("--optimum", cmp.optimum, "reference optimum of the metric");
  compare->add_option("--fraction", cmp.options.optimum_fraction, "plateau-escape fraction of the optimum")
      ->capture_default_str();
  auto* threshold = compare->add_option("--threshold", cmp.threshold, "episodes-to-threshold level");
  compare->add_option("--report-window", cmp.options.report_window)->capture_default_str();
  compare->add_option("--auc-episodes", cmp.options.auc_episodes)->capture_default_str();

  std::string env_target;
  bool grid = false;
  auto* validate = app.add_subcommand("validate-env", "Check an environment description");
  validate->add_option("target", env_target, "two_state | four_rooms | .mdp file | layout file")->required();
  validate->add_flag("--grid", grid, "treat the file as a grid layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (oracle->parsed()) {
      oracle_args.override_tolerance = tol->count() > 0;
      return cmd_oracle(oracle_args);
    }
    if (compare->parsed()) return cmd_compare(cmp, optimum->count() > 0, threshold->count() > 0);
    if (validate->parsed()) return cmd_validate_env(env_target, grid);
  } catch (const noc::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kRuntime;
}
