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

#include "postlab_tools/runner.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "postlab/version.hpp"

namespace postlab_tools {

namespace {

using nlohmann::ordered_json;
using postlab::ExperimentKind;
using postlab::VerdictStatus;

std::string full_precision(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
  return out.empty() ? "experiment" : out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

// Resolved settings per experiment. Structured inputs (operators, states,
// schedules) are echoed by presence, not value; the config file remains the
// source for those.
ordered_json config_echo(const RunConfig& cfg) {
  ordered_json echo;
  echo["seed"] = cfg.seed;
  ordered_json experiments = ordered_json::array();
  for (const ExperimentSpec& spec : cfg.experiments) {
    const postlab::ExperimentConfig& c = spec.config;
    ordered_json e;
    e["kind"] = to_string(spec.kind);
    if (!c.name.empty()) e["name"] = c.name;
    e["dim"] = c.dim;
    if (spec.seed_explicit) e["seed"] = c.seed;
    e["trials"] = c.trials;
    e["tau"] = c.threshold.tau;
    e["tol-cluster"] = c.tol_cluster;
    if (!c.rules.empty()) {
      ordered_json names = ordered_json::array();
      for (const postlab::MeasurementRule& rule : c.rules) names.push_back(rule.name());
      e["rules"] = std::move(names);
    }
    if (c.state) e["custom-state"] = true;
    if (c.observables) e["custom-observables"] = true;
    if (c.observables_b) e["custom-observables-b"] = true;
    if (c.hamiltonian) e["custom-hamiltonian"] = true;
    if (c.payoff) e["custom-payoff"] = true;
    if (!c.schedule.empty()) e["schedule-steps"] = c.schedule.size();
    experiments.push_back(std::move(e));
  }
  echo["experiments"] = std::move(experiments);
  return echo;
}

}  // namespace

RunOutcome execute(const RunConfig& cfg) {
  RunOutcome outcome;
  bool any_fail = false;
  bool any_flag = false;
  for (std::size_t i = 0; i < cfg.experiments.size(); ++i) {
    const ExperimentSpec& spec = cfg.experiments[i];
    postlab::ExperimentConfig config = spec.config;
    if (!spec.seed_explicit) config.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    ExperimentRun run;
    run.kind = spec.kind;
    run.seed = config.seed;
    run.trials = config.trials;
    run.report = postlab::run_experiment(spec.kind, config);
    switch (run.report.overall()) {
      case VerdictStatus::kFail:
        any_fail = true;
        break;
      case VerdictStatus::kFlag:
        any_flag = true;
        break;
      case VerdictStatus::kPass:
        break;
    }
    outcome.runs.push_back(std::move(run));
  }
  outcome.exit_code = any_fail ? 1 : (any_flag ? 2 : 0);
  return outcome;
}

ordered_json report_to_json(const ExperimentRun& run) {
  ordered_json j;
  j["name"] = run.report.name;
  j["kind"] = to_string(run.kind);
  j["seed"] = run.seed;
  j["trials"] = run.trials;
  j["overall"] = to_string(run.report.overall());

  ordered_json scalars = ordered_json::array();
  for (const auto& s : run.report.analytic)
    scalars.push_back({{"key", s.key}, {"value", s.value}});
  j["scalars"] = std::move(scalars);

  ordered_json empirical = ordered_json::array();
  for (const auto& e : run.report.empirical)
    empirical.push_back({{"key", e.key},
                         {"observed", e.observed},
                         {"expected", e.expected},
                         {"sigma", e.sigma}});
  j["empirical"] = std::move(empirical);

  ordered_json verdicts = ordered_json::array();
  for (const auto& v : run.report.verdicts)
    verdicts.push_back({{"claim", v.claim},
                        {"status", to_string(v.status)},
                        {"margin", v.margin},
                        {"detail", v.detail}});
  j["verdicts"] = std::move(verdicts);

  j["notes"] = run.report.notes;
  return j;
}

std::string report_to_csv(const ExperimentRun& run) {
  std::ostringstream out;
  const std::string& name = run.report.name;
  out << "experiment,section,key,value\n";
  for (const auto& s : run.report.analytic)
    out << name << ",scalar," << s.key << "," << full_precision(s.value) << "\n";
  for (const auto& e : run.report.empirical) {
    out << name << ",empirical," << e.key << ":observed," << full_precision(e.observed) << "\n";
    out << name << ",empirical," << e.key << ":expected," << full_precision(e.expected) << "\n";
    out << name << ",empirical," << e.key << ":sigma," << full_precision(e.sigma) << "\n";
  }
  for (const auto& v : run.report.verdicts) {
    out << name << ",verdict," << v.claim << "," << to_string(v.status) << "\n";
    out << name << ",verdict-margin," << v.claim << "," << full_precision(v.margin) << "\n";
  }
  out << name << ",overall,," << to_string(run.report.overall()) << "\n";
  return out.str();
}

void print_table(std::ostream& out, const ExperimentRun& run) {
  out << "== " << run.report.name << " (seed " << run.seed << ", trials " << run.trials
      << ") ==\n";
  if (!run.report.analytic.empty()) {
    out << "scalars:\n";
    for (const auto& s : run.report.analytic)
      out << "  " << s.key << " = " << s.value << "\n";
  }
  if (!run.report.empirical.empty()) {
    out << "empirical (observed | expected | sigma):\n";
    for (const auto& e : run.report.empirical)
      out << "  " << e.key << " = " << e.observed << " | " << e.expected << " | " << e.sigma
          << "\n";
  }
  out << "verdicts:\n";
  for (const auto& v : run.report.verdicts) {
    out << "  [" << to_string(v.status) << "] " << v.claim << " (margin " << v.margin << ")\n";
    if (!v.detail.empty()) out << "        " << v.detail << "\n";
  }
  for (const auto& n : run.report.notes) out << "note: " << n << "\n";
  out << "overall: " << to_string(run.report.overall()) << "\n";
}

ordered_json write_reports(const RunConfig& cfg, const RunOutcome& outcome,
                           const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string());

  ordered_json manifest;
  manifest["version"] = postlab::kVersion;
  manifest["generated-at"] = utc_timestamp();
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_echo(cfg);
  manifest["exit-code"] = outcome.exit_code;
  ordered_json entries = ordered_json::array();
  for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
    const ExperimentRun& run = outcome.runs[i];
    char index[8];
    std::snprintf(index, sizeof(index), "%02zu", i + 1);
    const std::string stem = std::string(index) + "-" + sanitize(run.report.name);

    write_file(out_dir / (stem + ".json"), report_to_json(run).dump(2) + "\n");
    write_file(out_dir / (stem + ".csv"), report_to_csv(run));
    entries.push_back({{"index", i + 1},
                       {"kind", to_string(run.kind)},
                       {"name", run.report.name},
                       {"seed", run.seed},
                       {"trials", run.trials},
                       {"overall", to_string(run.report.overall())},
                       {"report", stem + ".json"},
                       {"csv", stem + ".csv"}});
  }
  manifest["experiments"] = std::move(entries);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

RunConfig demo_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.seed_explicit = true;
  for (ExperimentKind kind : postlab::all_experiment_kinds()) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.config.name = to_string(kind);
    switch (kind) {
      case ExperimentKind::kContextuality:
      case ExperimentKind::kDecorrelation:
        spec.config.trials = 100000;
        break;
      case ExperimentKind::kPayoff:
      case ExperimentKind::kBranchTree:
        spec.config.trials = 20000;
        break;
      default:
        spec.config.trials = 0;  // analytic sweeps are already randomized
        break;
    }
    cfg.experiments.push_back(std::move(spec));
  }
  return cfg;
}

std::string describe(const std::optional<std::string>& kind_name) {
  struct Entry {
    ExperimentKind kind;
    const char* text;
  };
  static const Entry entries[] = {
      {ExperimentKind::kInvariance,
       "Carries a state and a commuting observable set through many random unitary changes "
       "of basis and checks that every rule's outcome probabilities and support counts stay "
       "put. Isomorphic measurement setups must be statistically indistinguishable."},
      {ExperimentKind::kEquivalence,
       "Decides whether two observable sets induce the same branch decomposition, then "
       "verifies that equivalent sets give identical statistics under every rule. Includes "
       "the classics: a coarse observable measured next to a finer companion is redundant, "
       "and relabeling eigenvalues changes nothing."},
      {ExperimentKind::kContextuality,
       "Asks one coarse question two ways: measure the coarse observable alone, or measure "
       "it jointly with a branch-splitting companion and marginalize. Born probabilities "
       "agree either way; the equal-support rule answers 1/2 in one context and 1/5 in the "
       "other for the bundled five-dimensional demo."},
      {ExperimentKind::kNoncontextuality,
       "Fixes one projector and completes it into many different full measurements, varying "
       "how finely the orthogonal complement is split. Reports the largest probability "
       "swing per rule. Born never moves; support-counting rules swing by design."},
      {ExperimentKind::kDecorrelation,
       "Measure, evolve, measure again. Tracks the joint outcome table, the repeat "
       "probability, and the mutual information between the two outcomes. Under the "
       "equal-support rule the second outcome forgets the first entirely unless the "
       "evolution commutes with the measurement."},
      {ExperimentKind::kPerturbation,
       "Slides a tiny admixture epsilon into a state sitting inside one branch. Born "
       "probabilities respond as eps^2/(1+eps^2); the equal-support rule jumps from 0 to "
       "1/2 the moment the admixture clears the support threshold."},
      {ExperimentKind::kPayoff,
       "Prices a bet two ways: pay on the fine measurement outcome, or measure the "
       "coarsened payoff observable directly. Born gives one price; the equal-support rule "
       "prices the same bet differently whenever distinct outcomes share a payoff."},
      {ExperimentKind::kBranchTree,
       "Runs a measure/evolve schedule and lays out every branching history with its "
       "weight. Checks that weights total 1, that equal-support siblings carry equal "
       "weight, and that sampled histories land on the analytic weights."},
  };

  std::ostringstream out;
  if (kind_name) {
    const ExperimentKind kind = postlab::experiment_kind_from_name(*kind_name);
    for (const auto& e : entries)
      if (e.kind == kind) out << to_string(e.kind) << "\n  " << e.text << "\n";
    return out.str();
  }
  out << "Measurement rules: born (squared amplitudes), equal-support (uniform over the\n"
         "branches the state overlaps), generalized(alpha) (their convex mixture).\n\n"
         "Experiments:\n";
  for (const auto& e : entries) out << "\n" << to_string(e.kind) << "\n  " << e.text << "\n";
  return out.str();
}

}  // namespace postlab_tools
