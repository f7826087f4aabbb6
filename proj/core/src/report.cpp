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

#include "postlab/report.hpp"

#include <stdexcept>

namespace postlab {

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kPass:
      return "pass";
    case VerdictStatus::kFlag:
      return "flag";
    case VerdictStatus::kFail:
      return "fail";
  }
  return "unknown";
}

VerdictStatus ExperimentReport::overall() const {
  VerdictStatus worst = VerdictStatus::kPass;
  for (const auto& v : verdicts) {
    if (v.status == VerdictStatus::kFail) return VerdictStatus::kFail;
    if (v.status == VerdictStatus::kFlag) worst = VerdictStatus::kFlag;
  }
  return worst;
}

void ExperimentReport::add_scalar(const std::string& key, double value) {
  analytic.push_back(ScalarEntry{key, value});
}

void ExperimentReport::add_verdict(const std::string& claim, bool pass, double margin,
                                   const std::string& detail) {
  add_verdict(claim, pass ? VerdictStatus::kPass : VerdictStatus::kFail, margin, detail);
}

void ExperimentReport::add_verdict(const std::string& claim, VerdictStatus status, double margin,
                                   const std::string& detail) {
  verdicts.push_back(Verdict{claim, status, margin, detail});
}

void ExperimentReport::add_note(const std::string& note) { notes.push_back(note); }

double ExperimentReport::scalar(const std::string& key) const {
  for (const auto& e : analytic)
    if (e.key == key) return e.value;
  throw std::invalid_argument("ExperimentReport::scalar: no entry named '" + key + "'");
}

const Verdict& ExperimentReport::verdict(const std::string& claim) const {
  for (const auto& v : verdicts)
    if (v.claim == claim) return v;
  throw std::invalid_argument("ExperimentReport::verdict: no claim named '" + claim + "'");
}

bool ExperimentReport::has_verdict(const std::string& claim) const {
  for (const auto& v : verdicts)
    if (v.claim == claim) return true;
  return false;
}

}  // namespace postlab
