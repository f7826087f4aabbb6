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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "postlab/experiments.hpp"

namespace postlab_tools {

/// A config file could not be parsed. The message names the offending
/// field by its JSON path, e.g. "experiments[2].observables[0]".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment to run: the kind plus a fully resolved configuration.
struct ExperimentSpec {
  postlab::ExperimentKind kind = postlab::ExperimentKind::kContextuality;
  postlab::ExperimentConfig config;
  bool seed_explicit = false;  // config carried its own seed
};

/// A whole run: shared defaults plus the experiment list. Experiments
/// without their own seed get run seed XOR list index, so adjacent
/// entries never share a random stream.
struct RunConfig {
  std::uint64_t seed = 42;
  bool seed_explicit = false;
  std::vector<ExperimentSpec> experiments;
};

/// Parses a run configuration. Top-level fields: "experiments"
/// (required array), "seed", "trials", "tau", "tol_cluster"; the last
/// three become per-experiment defaults. Unknown fields are errors.
///
/// Matrices are written either as {"diag": [values...]} or as an array
/// of rows whose entries are numbers or [re, im] pairs. States are
/// arrays of such entries. Rules are "born", "equal-support", or
/// {"kind": "generalized", "alpha": a}. Schedules are arrays of
/// {"measure": [observable...]} and
/// {"evolve": {"hamiltonian": m, "time": t}} steps.
RunConfig parse_config(const nlohmann::json& root);

/// Reads and parses a config file; IO problems become ConfigError.
RunConfig load_config_file(const std::filesystem::path& path);

}  // namespace postlab_tools
