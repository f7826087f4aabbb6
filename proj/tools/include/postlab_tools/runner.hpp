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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "postlab_tools/config.hpp"

namespace postlab_tools {

/// One executed experiment with the seed and trial count actually used.
struct ExperimentRun {
  postlab::ExperimentKind kind = postlab::ExperimentKind::kContextuality;
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  postlab::ExperimentReport report;
};

struct RunOutcome {
  std::vector<ExperimentRun> runs;
  int exit_code = 0;  // 0 all pass, 2 any flag, 1 any fail
};

/// Runs every experiment in the config. Experiments without an explicit
/// seed receive run seed XOR list index. Throws on invalid experiment
/// parameters; a failing verdict is a result, not an error.
RunOutcome execute(const RunConfig& cfg);

/// Report serialization. The JSON payload holds nothing run-dependent
/// beyond the experiment inputs, so equal configs produce equal bytes.
nlohmann::ordered_json report_to_json(const ExperimentRun& run);

/// Flat CSV: experiment,section,key,value with numbers at full
/// round-trip precision. Notes stay in the JSON payload only.
std::string report_to_csv(const ExperimentRun& run);

/// Human-oriented rendering of one run.
void print_table(std::ostream& out, const ExperimentRun& run);

/// Writes per-experiment JSON and CSV reports plus manifest.json into
/// out_dir (created if needed). The manifest records the tool version,
/// the run seed, an echo of the resolved configuration, a timestamp,
/// and the report file list. Throws std::runtime_error when out_dir or
/// any file cannot be written. Returns the manifest.
nlohmann::ordered_json write_reports(const RunConfig& cfg, const RunOutcome& outcome,
                                     const std::filesystem::path& out_dir);

/// The showcase suite: every experiment kind at pinned trial counts.
RunConfig demo_config(std::uint64_t seed);

/// Plain-language catalog of all experiments, or one of them.
std::string describe(const std::optional<std::string>& kind_name);

}  // namespace postlab_tools
