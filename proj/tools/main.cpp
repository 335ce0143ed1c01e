#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshprox/overhead.hpp"
#include "meshprox/report.hpp"
#include "meshprox/scenario.hpp"
#include "meshprox/selection.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

namespace fs = std::filesystem;
using meshprox::selection::Strategy;

fs::path default_out_dir(const std::string& scenario_name) {
  if (const char* env = std::getenv("MESHPROX_OUT")) {
    return fs::path(env) / scenario_name;
  }
  return fs::path("out") / scenario_name;
}

meshprox::simnet::Scenario load_checked(const std::string& path, int& exit_code) {
  meshprox::simnet::Scenario scenario;
  try {
    scenario = meshprox::simnet::load_scenario(path);
  } catch (const meshprox::simnet::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    exit_code = kExitParse;
    return scenario;
  }
  const auto violations = meshprox::simnet::validate_scenario(scenario);
  if (!violations.empty()) {
    for (const auto& v : violations) {
      std::cerr << "invalid scenario: " << v << "\n";
    }
    exit_code = kExitValidation;
  }
  return scenario;
}

int cmd_run(const std::string& scenario_path,
            std::optional<std::uint64_t> seed_flag,
            const std::string& strategy_flag, const std::string& out_flag) {
  int exit_code = 0;
  meshprox::simnet::Scenario scenario = load_checked(scenario_path, exit_code);
  if (exit_code != 0) return exit_code;

  std::vector<Strategy> strategies;
  if (strategy_flag == "all") {
    strategies = meshprox::selection::all_strategies();
  } else if (!strategy_flag.empty()) {
    auto s = meshprox::selection::parse_strategy(strategy_flag);
    if (!s) {
      std::cerr << "error: unknown strategy '" << strategy_flag << "'\n";
      return kExitParse;
    }
    strategies = {*s};
  } else {
    strategies = {scenario.strategy};
  }

  const std::uint64_t seed = seed_flag.value_or(scenario.seed);
  const fs::path base =
      out_flag.empty() ? default_out_dir(scenario.name) : fs::path(out_flag);

  std::vector<meshprox::report::RunReport> reports;
  try {
    for (Strategy strategy : strategies) {
      scenario.strategy = strategy;
      const fs::path dir =
          strategies.size() == 1
              ? base
              : base / std::string(meshprox::selection::strategy_name(strategy));
      auto rep = meshprox::report::run_scenario(scenario, seed, dir, true);
      std::cout << meshprox::report::format_summary(rep);
      std::cout << "output: " << dir.string() << "\n";
      if (strategies.size() > 1) std::cout << "\n";
      reports.push_back(std::move(rep));
    }
    if (reports.size() > 1) {
      std::cout << meshprox::report::compare_reports(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths) {
  try {
    std::vector<meshprox::report::RunReport> reports;
    reports.reserve(report_paths.size());
    for (const auto& path : report_paths) {
      reports.push_back(meshprox::report::load_report(path));
    }
    std::cout << meshprox::report::compare_reports(reports);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_overhead(const std::string& scenario_path) {
  int exit_code = 0;
  meshprox::simnet::Scenario scenario = load_checked(scenario_path, exit_code);
  if (exit_code != 0) return exit_code;

  const auto params = meshprox::overhead::params_from_scenario(scenario);
  const double data = meshprox::overhead::data_rate_bps(params);
  const double per_node = meshprox::overhead::per_node_rate_bps(params);
  const double total = meshprox::overhead::total_rate_bps(params);
  std::cout << "nodes: " << params.nodes << "\n";
  std::cout << "coordinate entries per message: " << params.coord_entries
            << "\n";
  std::cout << "load report entries per message: " << params.report_entries
            << "\n";
  std::cout << "ping round trips per round: " << params.round_pings << " of "
            << params.ping_bytes << " B\n";
  char line[120];
  std::snprintf(line, sizeof(line), "gossip payload rate: %.3f B/s per node\n",
                data);
  std::cout << line;
  std::snprintf(line, sizeof(line), "total rate: %.3f B/s per node\n",
                per_node);
  std::cout << line;
  std::snprintf(line, sizeof(line), "total rate: %.3f B/s across all nodes\n",
                total);
  std::cout << line;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mesh proxy selection simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string strategy_flag;
  std::string out_flag;
  std::optional<std::uint64_t> seed_flag;
  std::vector<std::string> report_paths;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed_flag, "override the scenario seed");
  run->add_option("--strategy", strategy_flag,
                  "min_load, min_delay, min_hop or all");
  run->add_option("--out", out_flag,
                  "output directory (default $MESHPROX_OUT or ./out)");

  CLI::App* compare = app.add_subcommand("compare", "compare run reports");
  compare->add_option("reports", report_paths, "report.json files")
      ->required()
      ->expected(-1);

  CLI::App* overhead =
      app.add_subcommand("overhead", "print the traffic model for a scenario");
  overhead->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(scenario_path, seed_flag, strategy_flag, out_flag);
  }
  if (compare->parsed()) {
    return cmd_compare(report_paths);
  }
  if (overhead->parsed()) {
    return cmd_overhead(scenario_path);
  }
  return 0;
}
