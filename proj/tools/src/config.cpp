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

#include "postlab_tools/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace postlab_tools {

namespace {

using nlohmann::json;
using postlab::Complex;
using postlab::Matrix;
using postlab::Vector;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

void check_fields(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path + "." + key, "unknown field");
  }
}

// An amplitude or matrix entry: a bare number is real, [re, im] is complex.
Complex parse_entry(const json& j, const std::string& path) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  fail(path, "expected a number or an [re, im] pair");
}

Matrix parse_matrix(const json& j, const std::string& path) {
  if (j.is_object()) {
    check_fields(j, path, {"diag"});
    if (!j.contains("diag") || !j["diag"].is_array() || j["diag"].empty())
      fail(path, "expected {\"diag\": [values...]}");
    const auto& diag = j["diag"];
    Matrix m = Matrix::Zero(static_cast<int>(diag.size()), static_cast<int>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i)
      m(static_cast<int>(i), static_cast<int>(i)) =
          as_number(diag[i], path + ".diag[" + std::to_string(i) + "]");
    return m;
  }
  if (!j.is_array() || j.empty()) fail(path, "expected a row array or {\"diag\": ...}");
  const std::size_t d = j.size();
  Matrix m(static_cast<int>(d), static_cast<int>(d));
  for (std::size_t r = 0; r < d; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != d)
      fail(row_path, "expected a row of " + std::to_string(d) + " entries");
    for (std::size_t c = 0; c < d; ++c)
      m(static_cast<int>(r), static_cast<int>(c)) =
          parse_entry(j[r][c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

postlab::HermitianOperator parse_hermitian(const json& j, const std::string& path) {
  try {
    return postlab::HermitianOperator(parse_matrix(j, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

postlab::StateVector parse_state(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected an array of amplitudes");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<int>(i)) = parse_entry(j[i], path + "[" + std::to_string(i) + "]");
  try {
    return postlab::StateVector::normalized(v);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

postlab::ObservableSet parse_observables(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of observables");
  std::vector<postlab::HermitianOperator> ops;
  ops.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    ops.push_back(parse_hermitian(j[i], path + "[" + std::to_string(i) + "]"));
  try {
    return postlab::ObservableSet(std::move(ops));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

postlab::MeasurementRule parse_rule(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "born") return postlab::MeasurementRule::born();
    if (name == "equal-support") return postlab::MeasurementRule::equal_support();
    fail(path, "unknown rule '" + name + "'; use \"born\", \"equal-support\", or "
               "{\"kind\": \"generalized\", \"alpha\": a}");
  }
  if (j.is_object()) {
    check_fields(j, path, {"kind", "alpha"});
    if (!j.contains("kind")) fail(path, "rule object needs a \"kind\"");
    const std::string kind = as_string(j["kind"], path + ".kind");
    if (kind == "born") return postlab::MeasurementRule::born();
    if (kind == "equal-support") return postlab::MeasurementRule::equal_support();
    if (kind == "generalized") {
      if (!j.contains("alpha")) fail(path, "generalized rule needs \"alpha\"");
      try {
        return postlab::MeasurementRule::generalized(as_number(j["alpha"], path + ".alpha"));
      } catch (const std::exception& e) {
        fail(path + ".alpha", e.what());
      }
    }
    fail(path + ".kind", "unknown rule kind '" + kind + "'");
  }
  fail(path, "expected a rule name or object");
}

std::vector<postlab::ScheduleStep> parse_schedule(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of steps");
  std::vector<postlab::ScheduleStep> steps;
  steps.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string step_path = path + "[" + std::to_string(i) + "]";
    const json& step = j[i];
    if (!step.is_object()) fail(step_path, "expected a step object");
    if (step.contains("measure")) {
      check_fields(step, step_path, {"measure"});
      steps.push_back(postlab::MeasureStep{
          parse_observables(step["measure"], step_path + ".measure")});
    } else if (step.contains("evolve")) {
      check_fields(step, step_path, {"evolve"});
      const json& ev = step["evolve"];
      if (!ev.is_object()) fail(step_path + ".evolve", "expected an object");
      check_fields(ev, step_path + ".evolve", {"hamiltonian", "time"});
      if (!ev.contains("hamiltonian") || !ev.contains("time"))
        fail(step_path + ".evolve", "needs \"hamiltonian\" and \"time\"");
      steps.push_back(postlab::EvolveStep{
          parse_hermitian(ev["hamiltonian"], step_path + ".evolve.hamiltonian"),
          as_number(ev["time"], step_path + ".evolve.time")});
    } else {
      fail(step_path, "expected a {\"measure\": ...} or {\"evolve\": ...} step");
    }
  }
  return steps;
}

postlab::PayoffMap parse_payoff(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected an array of [label, value] pairs");
  std::vector<std::pair<double, double>> entries;
  entries.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string pair_path = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2)
      fail(pair_path, "expected an [label, value] pair");
    entries.push_back({as_number(j[i][0], pair_path + "[0]"),
                       as_number(j[i][1], pair_path + "[1]")});
  }
  try {
    return postlab::PayoffMap(std::move(entries));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

ExperimentSpec parse_experiment(const json& j, const std::string& path,
                                const postlab::ExperimentConfig& defaults) {
  if (!j.is_object()) fail(path, "expected an experiment object");
  check_fields(j, path,
               {"kind", "name", "dim", "seed", "trials", "tau", "tol_cluster", "rules",
                "state", "observables", "observables_b", "hamiltonian", "evolve_time",
                "unitary_count", "context_count", "state_count", "context_dims", "epsilons",
                "payoff", "schedule"});
  if (!j.contains("kind")) fail(path, "experiment needs a \"kind\"");

  ExperimentSpec spec;
  spec.config = defaults;
  try {
    spec.kind = postlab::experiment_kind_from_name(as_string(j["kind"], path + ".kind"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path + ".kind", e.what());
  }
  spec.config.name = j.contains("name") ? as_string(j["name"], path + ".name")
                                        : std::string(to_string(spec.kind));

  if (j.contains("dim")) {
    const std::int64_t dim = as_integer(j["dim"], path + ".dim");
    if (dim < 1 || dim > postlab::kMaxDim) fail(path + ".dim", "dimension out of range");
    spec.config.dim = static_cast<int>(dim);
  }
  if (j.contains("seed")) {
    spec.config.seed = static_cast<std::uint64_t>(as_integer(j["seed"], path + ".seed"));
    spec.seed_explicit = true;
  }
  if (j.contains("trials")) {
    const std::int64_t trials = as_integer(j["trials"], path + ".trials");
    if (trials < 0) fail(path + ".trials", "trials must be >= 0");
    spec.config.trials = trials;
  }
  if (j.contains("tau")) {
    spec.config.threshold.tau = as_number(j["tau"], path + ".tau");
  }
  if (j.contains("tol_cluster")) {
    spec.config.tol_cluster = as_number(j["tol_cluster"], path + ".tol_cluster");
  }
  if (j.contains("rules")) {
    const json& rules = j["rules"];
    if (!rules.is_array() || rules.empty())
      fail(path + ".rules", "expected a non-empty array of rules");
    for (std::size_t i = 0; i < rules.size(); ++i)
      spec.config.rules.push_back(
          parse_rule(rules[i], path + ".rules[" + std::to_string(i) + "]"));
  }
  if (j.contains("state")) spec.config.state = parse_state(j["state"], path + ".state");
  if (j.contains("observables"))
    spec.config.observables = parse_observables(j["observables"], path + ".observables");
  if (j.contains("observables_b"))
    spec.config.observables_b = parse_observables(j["observables_b"], path + ".observables_b");
  if (j.contains("hamiltonian"))
    spec.config.hamiltonian = parse_hermitian(j["hamiltonian"], path + ".hamiltonian");
  if (j.contains("evolve_time"))
    spec.config.evolve_time = as_number(j["evolve_time"], path + ".evolve_time");
  if (j.contains("unitary_count")) {
    const std::int64_t n = as_integer(j["unitary_count"], path + ".unitary_count");
    if (n < 1) fail(path + ".unitary_count", "must be >= 1");
    spec.config.unitary_count = static_cast<int>(n);
  }
  if (j.contains("context_count")) {
    const std::int64_t n = as_integer(j["context_count"], path + ".context_count");
    if (n < 1) fail(path + ".context_count", "must be >= 1");
    spec.config.context_count = static_cast<int>(n);
  }
  if (j.contains("state_count")) {
    const std::int64_t n = as_integer(j["state_count"], path + ".state_count");
    if (n < 0) fail(path + ".state_count", "must be >= 0");
    spec.config.state_count = static_cast<int>(n);
  }
  if (j.contains("context_dims")) {
    const json& dims = j["context_dims"];
    if (!dims.is_array() || dims.empty())
      fail(path + ".context_dims", "expected a non-empty array of dimensions");
    spec.config.context_dims.clear();
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const std::string dim_path = path + ".context_dims[" + std::to_string(i) + "]";
      const std::int64_t d = as_integer(dims[i], dim_path);
      if (d < 3 || d > postlab::kMaxDim) fail(dim_path, "context dimension out of range");
      spec.config.context_dims.push_back(static_cast<int>(d));
    }
  }
  if (j.contains("epsilons")) {
    const json& eps = j["epsilons"];
    if (!eps.is_array() || eps.empty())
      fail(path + ".epsilons", "expected a non-empty array of numbers");
    spec.config.epsilons.clear();
    for (std::size_t i = 0; i < eps.size(); ++i)
      spec.config.epsilons.push_back(
          as_number(eps[i], path + ".epsilons[" + std::to_string(i) + "]"));
  }
  if (j.contains("payoff")) spec.config.payoff = parse_payoff(j["payoff"], path + ".payoff");
  if (j.contains("schedule"))
    spec.config.schedule = parse_schedule(j["schedule"], path + ".schedule");
  return spec;
}

}  // namespace

RunConfig parse_config(const json& root) {
  if (!root.is_object()) fail("config", "expected a JSON object");
  check_fields(root, "config", {"seed", "trials", "tau", "tol_cluster", "experiments"});

  RunConfig out;
  postlab::ExperimentConfig defaults;
  if (root.contains("seed")) {
    out.seed = static_cast<std::uint64_t>(as_integer(root["seed"], "config.seed"));
    out.seed_explicit = true;
  }
  if (root.contains("trials")) {
    const std::int64_t trials = as_integer(root["trials"], "config.trials");
    if (trials < 0) fail("config.trials", "trials must be >= 0");
    defaults.trials = trials;
  }
  if (root.contains("tau")) defaults.threshold.tau = as_number(root["tau"], "config.tau");
  if (root.contains("tol_cluster"))
    defaults.tol_cluster = as_number(root["tol_cluster"], "config.tol_cluster");

  // An empty array is a valid (if trivial) run; only the field itself is
  // mandatory.
  if (!root.contains("experiments") || !root["experiments"].is_array())
    fail("config.experiments", "expected an array of experiments");
  const auto& list = root["experiments"];
  for (std::size_t i = 0; i < list.size(); ++i)
    out.experiments.push_back(
        parse_experiment(list[i], "experiments[" + std::to_string(i) + "]", defaults));
  return out;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(root);
}

}  // namespace postlab_tools
