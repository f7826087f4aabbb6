// Copyright 2026 The postlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "postlab_tools/config.hpp"
#include "postlab_tools/runner.hpp"

namespace {

using postlab_tools::RunConfig;

// Seed precedence: --seed, then the config file, then POSTLAB_SEED,
// then 42.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed,
                           const RunConfig& cfg) {
  if (cli_seed) return *cli_seed;
  if (cfg.seed_explicit) return cfg.seed;
  if (const char* env = std::getenv("POSTLAB_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long value = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return static_cast<std::uint64_t>(value);
    } catch (const std::exception&) {
      throw postlab_tools::ConfigError(std::string("POSTLAB_SEED is not an integer: ") + env);
    }
  }
  return 42;
}

int run_and_emit(RunConfig cfg, const std::optional<std::uint64_t>& cli_seed,
                 const std::optional<std::int64_t>& cli_trials,
                 const std::optional<double>& cli_tau,
                 const std::optional<std::string>& out_dir, const std::string& format) {
  cfg.seed = resolve_seed(cli_seed, cfg);
  for (auto& spec : cfg.experiments) {
    if (cli_trials) spec.config.trials = *cli_trials;
    if (cli_tau) spec.config.threshold.tau = *cli_tau;
  }

  const postlab_tools::RunOutcome outcome = postlab_tools::execute(cfg);

  if (format == "structured") {
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const auto& run : outcome.runs) all.push_back(postlab_tools::report_to_json(run));
    std::cout << all.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      if (i) std::cout << "\n";
      postlab_tools::print_table(std::cout, outcome.runs[i]);
    }
  }
  if (out_dir) {
    postlab_tools::write_reports(cfg, outcome, *out_dir);
    std::cerr << "reports written to " << *out_dir << "\n";
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"postlab: measurement statistics under pluggable projection rules"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> cli_seed;
  std::optional<std::int64_t> cli_trials;
  std::optional<double> cli_tau;
  std::optional<std::string> out_dir;
  std::string format = "table";
  std::string config_path;
  std::optional<std::string> describe_kind;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cli_seed, "Base seed (overrides config and POSTLAB_SEED)");
    cmd->add_option("--trials", cli_trials, "Monte Carlo trials for every experiment")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--tau", cli_tau, "Support threshold on squared branch overlap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_dir, "Directory for JSON/CSV reports and manifest.json");
    cmd->add_option("--format", format, "Console output: table or structured")
        ->check(CLI::IsMember({"table", "structured"}));
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Execute experiments from a JSON config file");
  run_cmd->add_option("--config", config_path, "Path to the run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(run_cmd);

  CLI::App* demo_cmd =
      app.add_subcommand("demo", "Run the full showcase suite with pinned defaults");
  add_common(demo_cmd);

  CLI::App* describe_cmd =
      app.add_subcommand("describe", "Explain the experiments in plain language");
  describe_cmd->add_option("kind", describe_kind, "One experiment to describe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Exit-code contract: 0 ok, 1 error, 2 flagged. Help and version
    // requests exit 0; every parse failure is an error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (describe_cmd->parsed()) {
      std::cout << postlab_tools::describe(describe_kind);
      return 0;
    }
    if (run_cmd->parsed()) {
      return run_and_emit(postlab_tools::load_config_file(config_path), cli_seed, cli_trials,
                          cli_tau, out_dir, format);
    }
    RunConfig cfg = postlab_tools::demo_config(42);
    cfg.seed_explicit = false;  // let --seed and POSTLAB_SEED take over
    return run_and_emit(std::move(cfg), cli_seed, cli_trials, cli_tau, out_dir, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
