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

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "postlab/measurement.hpp"

namespace postlab {

/// Counts per outcome index. Mergeable, so trial batches can run in
/// parallel and be added up afterwards.
class EmpiricalHistogram {
 public:
  explicit EmpiricalHistogram(int outcome_count);

  void record(int outcome);
  std::int64_t count(int outcome) const { return counts_[outcome]; }
  std::int64_t total() const { return total_; }
  int outcome_count() const { return static_cast<int>(counts_.size()); }
  double frequency(int outcome) const;

  EmpiricalHistogram& operator+=(const EmpiricalHistogram& other);

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Verdict band of a goodness-of-fit statistic against fixed critical
/// values (84th..: 0.05 and 0.001 tail probabilities). Bands, not
/// p-values: enough for pass/flag/fail and free of special functions.
enum class GofBand { kConsistent, kSuspect, kRejected };

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  GofBand band = GofBand::kConsistent;
};

/// Pearson chi-square goodness of fit of observed counts against an
/// expected distribution. The statistic sums (obs-exp)^2/exp over
/// outcomes with positive expected probability; dof is their number
/// minus one. Outcomes with expected probability zero must have zero
/// counts; a nonzero count there signals a rule-implementation bug and
/// raises InvariantViolationError. Requires every included expected
/// count to reach 5 (the classical validity rule).
GofResult chi_square_gof(const EmpiricalHistogram& hist, const OutcomeDistribution& expected);

/// Mutual information of a joint probability table, in nats, with the
/// convention 0 ln 0 = 0. Entries must be nonnegative and total 1
/// within 1e-10. Tiny negative results from roundoff clamp to zero.
double mutual_information(const Eigen::MatrixXd& joint);

/// k_sigma * sqrt(p (1-p) / trials): the half-width of the k-sigma
/// binomial frequency band.
double binomial_margin(double p, std::int64_t trials, double k_sigma);

}  // namespace postlab
