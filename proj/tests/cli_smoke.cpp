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

// End-to-end runs of the installed binary in subprocesses. The binary
// path is baked in at configure time.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "postlab-cli-smoke";
  fs::create_directories(dir);
  return dir;
}

// Runs `env_prefix POSTLAB_CLI args` with stdout/stderr captured.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const fs::path dir = scratch_dir();
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  std::ostringstream cmd;
  if (!env_prefix.empty()) cmd << "env " << env_prefix << " ";
  cmd << POSTLAB_CLI_PATH << " " << args << " > " << out_file << " 2> " << err_file;
  const int status = std::system(cmd.str().c_str());

  CliResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path;
}

TEST_CASE("the demo suite passes and prints all eight experiments") {
  const CliResult r = run_cli("demo");
  CHECK(r.exit_code == 0);
  for (const char* name : {"invariance", "equivalence", "contextuality", "noncontextuality",
                           "decorrelation", "perturbation", "payoff", "branch-tree"})
    CHECK(r.out.find(name) != std::string::npos);
  CHECK(r.out.find("fail") == std::string::npos);
}

TEST_CASE("structured demo output is machine-readable json") {
  const CliResult r = run_cli("demo --trials 0 --format structured");
  CHECK(r.exit_code == 0);
  const auto parsed = nlohmann::json::parse(r.out);
  REQUIRE(parsed.is_array());
  CHECK(parsed.size() == 8);
  CHECK(parsed[0].contains("verdicts"));
  CHECK(parsed[0]["seed"].is_number());
}

TEST_CASE("describe prints the catalog and rejects unknown kinds") {
  const CliResult all = run_cli("describe");
  CHECK(all.exit_code == 0);
  CHECK(all.out.find("contextuality") != std::string::npos);
  CHECK(all.out.find("equal-support") != std::string::npos);

  const CliResult one = run_cli("describe payoff");
  CHECK(one.exit_code == 0);
  CHECK(one.out.find("payoff") != std::string::npos);

  const CliResult bad = run_cli("describe no-such-experiment");
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("run executes a config file and honors the exit contract") {
  const fs::path config = write_config("ok.json", R"({
    "seed": 3,
    "experiments": [{"kind": "payoff"}, {"kind": "perturbation"}]
  })");
  const CliResult r = run_cli("run --config " + config.string());
  CHECK(r.exit_code == 0);

  const fs::path empty = write_config("empty.json", R"({"experiments": []})");
  CHECK(run_cli("run --config " + empty.string()).exit_code == 0);

  const fs::path flagged = write_config("flagged.json", R"({
    "experiments": [{"kind": "perturbation", "epsilons": [1e-6]}]
  })");
  CHECK(run_cli("run --config " + flagged.string()).exit_code == 2);

  const fs::path broken = write_config("broken.json", R"({
    "experiments": [{"kind": "payoff", "alpha": true}]
  })");
  const CliResult bad = run_cli("run --config " + broken.string());
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("error:") != std::string::npos);

  CHECK(run_cli("run --config /no/such/config.json").exit_code == 1);
}

TEST_CASE("reports land in the output directory with a manifest") {
  const fs::path config = write_config("reports.json", R"({
    "experiments": [{"kind": "contextuality"}]
  })");
  const fs::path out_dir = scratch_dir() / "reports-out";
  fs::remove_all(out_dir);
  const CliResult r =
      run_cli("run --config " + config.string() + " --out " + out_dir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out_dir / "manifest.json"));
  CHECK(fs::exists(out_dir / "01-contextuality.json"));
  CHECK(fs::exists(out_dir / "01-contextuality.csv"));

  const auto manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
  CHECK(manifest["exit-code"] == 0);
  CHECK(manifest["experiments"].size() == 1);
  CHECK(manifest["version"].is_string());
  CHECK(manifest["seed"] == 42);

  // An unwritable output path is an error exit.
  CHECK(run_cli("demo --trials 0 --out /proc/1/nope").exit_code == 1);
}

TEST_CASE("seed precedence runs flag then environment then default") {
  auto demo_seed = [](const std::string& args, const std::string& env) {
    const CliResult r = run_cli("demo --trials 0 --format structured " + args, env);
    REQUIRE(r.exit_code == 0);
    return nlohmann::json::parse(r.out)[0]["seed"].get<std::uint64_t>();
  };
  CHECK(demo_seed("", "") == 42);
  CHECK(demo_seed("", "POSTLAB_SEED=9") == 9);
  CHECK(demo_seed("--seed 5", "POSTLAB_SEED=9") == 5);

  const CliResult bad_env = run_cli("demo --trials 0", "POSTLAB_SEED=12abc");
  CHECK(bad_env.exit_code == 1);
  CHECK(bad_env.err.find("POSTLAB_SEED") != std::string::npos);
}

TEST_CASE("repeated runs with one seed produce byte-identical reports") {
  const fs::path config = write_config("repeat.json", R"({
    "seed": 11,
    "experiments": [
      {"kind": "contextuality", "trials": 5000},
      {"kind": "branch-tree", "trials": 5000}
    ]
  })");
  const fs::path out_a = scratch_dir() / "repeat-a";
  const fs::path out_b = scratch_dir() / "repeat-b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  CHECK(run_cli("run --config " + config.string() + " --out " + out_a.string()).exit_code == 0);
  CHECK(run_cli("run --config " + config.string() + " --out " + out_b.string()).exit_code == 0);

  for (const char* name : {"01-contextuality.json", "01-contextuality.csv",
                           "02-branch-tree.json", "02-branch-tree.csv"}) {
    CAPTURE(name);
    CHECK(slurp(out_a / name) == slurp(out_b / name));
    CHECK(!slurp(out_a / name).empty());
  }
}

TEST_CASE("trials and tau overrides reach the experiments") {
  const fs::path config = write_config("override.json", R"({
    "experiments": [{"kind": "contextuality"}]
  })");
  const CliResult r =
      run_cli("run --config " + config.string() + " --trials 1000 --format structured");
  CHECK(r.exit_code == 0);
  const auto parsed = nlohmann::json::parse(r.out);
  CHECK(parsed[0]["trials"] == 1000);
  CHECK(!parsed[0]["empirical"].empty());
}

}  // namespace
