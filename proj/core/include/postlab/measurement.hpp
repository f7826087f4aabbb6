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

#include "postlab/decomposition.hpp"
#include "postlab/hilbert.hpp"
#include "postlab/random.hpp"

namespace postlab {

// The projection rules. All three share the collapse map
// psi -> P_u psi / |P_u psi|; they differ only in the probability they
// assign to branch i of a decomposition:
//
//   born            p_i = |P_i psi|^2
//   equal_support   p_i = 1/n on the support of psi, 0 elsewhere, where
//                   n counts the branches with P_i psi != 0
//   generalized(a)  p_i = a/n + (1-a) |P_i psi|^2 on the support, 0
//                   elsewhere; a=0 reproduces born, a=1 equal_support

enum class RuleKind { kBorn, kEqualSupport, kGeneralized };

class MeasurementRule {
 public:
  static MeasurementRule born() { return MeasurementRule(RuleKind::kBorn, 0.0); }
  static MeasurementRule equal_support() { return MeasurementRule(RuleKind::kEqualSupport, 1.0); }
  static MeasurementRule generalized(double alpha);

  RuleKind kind() const { return kind_; }
  /// Mixing weight; meaningful for generalized rules only.
  double alpha() const { return alpha_; }

  /// Stable display name: "born", "equal-support", "generalized(a=0.25)".
  std::string name() const;

 private:
  MeasurementRule(RuleKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  RuleKind kind_;
  double alpha_;
};

/// Squared-norm cutoff below which a projection counts as vanished.
/// "Different from zero" is undecidable in floating point; membership in
/// the support is |P_i psi|^2 > tau. The squared norm is basis
/// independent and scales like a probability.
struct SupportThreshold {
  double tau = 1e-12;
};

struct SupportCount {
  int n = 0;                     // number of branches in the support
  std::vector<bool> on_support;  // per branch
};

struct OutcomeProbability {
  std::vector<double> labels;
  double probability;
};

/// One probability per branch of a decomposition, in branch order.
/// Totals 1 within 1e-10.
class OutcomeDistribution {
 public:
  explicit OutcomeDistribution(std::vector<OutcomeProbability> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<OutcomeProbability>& entries() const { return entries_; }
  double probability(int branch) const { return entries_[branch].probability; }
  const std::vector<double>& labels(int branch) const { return entries_[branch].labels; }

  /// Total probability of the branches whose label component
  /// `label_index` is within `tol` of `value`.
  double marginal(int label_index, double value, double tol = 1e-6) const;

 private:
  std::vector<OutcomeProbability> entries_;
};

/// n, the number of branches whose projection of the state stays above
/// the threshold, together with the per-branch flags. 1 <= n <= N for
/// any normalized state; n == 0 means the thresholds are inconsistent
/// and raises InvariantViolationError.
SupportCount support_count(const StateVector& state, const ProjectorDecomposition& dec,
                           const SupportThreshold& thr = {});

/// Outcome distribution of measuring `dec` on `state` under `rule`.
OutcomeDistribution distribution(const StateVector& state, const ProjectorDecomposition& dec,
                                 const MeasurementRule& rule, const SupportThreshold& thr = {});

/// Post-measurement state P_u psi / |P_u psi| for outcome branch u.
/// No phase canonicalization is applied; a global phase is unobservable.
/// Raises OffSupportError if the branch projection is at or below tau.
StateVector collapse(const StateVector& state, const ProjectorDecomposition& dec,
                     int branch_index, const SupportThreshold& thr = {});

struct SampledOutcome {
  int branch_index;
  StateVector post_state;
};

/// Draws a branch by inverse CDF on one uniform deviate from `rng` and
/// collapses onto it. The CDF walks on-support branches in decomposition
/// order; off-support branches are never drawn (their born-rule mass,
/// at most N*tau, folds into the final bin).
SampledOutcome sample_outcome(const StateVector& state, const ProjectorDecomposition& dec,
                              const MeasurementRule& rule, const SupportThreshold& thr,
                              RandomStream& rng);

}  // namespace postlab
