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

#include <string>
#include <vector>

namespace postlab {

enum class VerdictStatus { kPass, kFlag, kFail };

const char* to_string(VerdictStatus s);

/// One checked claim. `margin` is the measured deviation the check
/// compared against its threshold (so smaller is better); `detail`
/// spells out the comparison.
struct Verdict {
  std::string claim;
  VerdictStatus status = VerdictStatus::kPass;
  double margin = 0.0;
  std::string detail;
};

/// A named analytic quantity (a probability, an expectation, a
/// deviation) computed by an experiment.
struct ScalarEntry {
  std::string key;
  double value = 0.0;
};

/// An empirical frequency next to its analytic prediction. `sigma` is
/// the deviation in binomial standard errors.
struct EmpiricalEntry {
  std::string key;
  double observed = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
};

/// Structured record of one experiment: analytic predictions, optional
/// Monte Carlo confirmation, and a pass/flag/fail verdict per claim.
struct ExperimentReport {
  std::string name;
  std::vector<ScalarEntry> analytic;
  std::vector<EmpiricalEntry> empirical;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  /// Worst verdict status; kPass when there are no verdicts.
  VerdictStatus overall() const;

  void add_scalar(const std::string& key, double value);
  void add_verdict(const std::string& claim, bool pass, double margin, const std::string& detail);
  void add_verdict(const std::string& claim, VerdictStatus status, double margin,
                   const std::string& detail);
  void add_note(const std::string& note);

  double scalar(const std::string& key) const;  // throws if absent
  const Verdict& verdict(const std::string& claim) const;
  bool has_verdict(const std::string& claim) const;
};

}  // namespace postlab
