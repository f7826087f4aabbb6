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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "postlab/decomposition.hpp"
#include "postlab/hilbert.hpp"
#include "postlab/measurement.hpp"
#include "postlab/report.hpp"

namespace postlab {

// Executable demonstrations of how the projection rules differ and where
// they agree: each experiment computes analytic predictions, optionally
// confirms them by Monte Carlo sampling, and grades a fixed list of
// claims as pass / flag / fail.

enum class ExperimentKind {
  kInvariance,        // measurement statistics survive unitary isomorphisms
  kEquivalence,       // equal projector families give equal statistics
  kContextuality,     // coarse outcome probabilities depend on resolution
  kNoncontextuality,  // is a projector's probability context independent?
  kDecorrelation,     // repeated measurements across unitary evolution
  kPerturbation,      // discrete probability jump under a tiny state change
  kPayoff,            // expected payoff, fine route vs coarse route
  kBranchTree,        // full tree of alternative measurement histories
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);
std::vector<ExperimentKind> all_experiment_kinds();

// ----------------------------- configuration -----------------------------

struct MeasureStep {
  ObservableSet observables;
};

struct EvolveStep {
  HermitianOperator hamiltonian;
  double time;
};

using ScheduleStep = std::variant<MeasureStep, EvolveStep>;

/// Map from fine outcome label to payoff value. May be non-injective.
class PayoffMap {
 public:
  explicit PayoffMap(std::vector<std::pair<double, double>> entries);

  const std::vector<std::pair<double, double>>& entries() const { return entries_; }

  /// Payoff for the fine label, matched within `tol`. Throws
  /// std::invalid_argument when the label is not in the domain.
  double payoff_for(double label, double tol = 1e-6) const;

  /// True when no two domain labels share a payoff value.
  bool injective() const;

 private:
  std::vector<std::pair<double, double>> entries_;
};

struct ExperimentConfig {
  std::string name;  // display name; defaults to the kind
  int dim = 5;
  std::vector<MeasurementRule> rules;  // empty -> per-experiment default
  std::uint64_t seed = 42;
  std::int64_t trials = 0;  // 0 = analytic only
  SupportThreshold threshold{};
  double tol_cluster = kDefaultClusterTol;

  std::optional<StateVector> state;              // default per experiment
  std::optional<ObservableSet> observables;      // measurement under study
  std::optional<ObservableSet> observables_b;    // partner for equivalence
  std::optional<HermitianOperator> hamiltonian;  // decorrelation evolution
  double evolve_time = 0.5235987755982988;       // pi/6

  int unitary_count = 100;  // sampled transformations (invariance) or pairs (equivalence)
  int context_count = 50;   // noncontextuality: contexts per dimension
  int state_count = 0;      // random-state sweeps; 0 -> per-experiment default
  std::vector<int> context_dims = {3, 4, 5, 6};  // noncontextuality
  std::vector<double> epsilons = {0.0, 1e-8, 1e-4, 1e-2, 1e-1};
  std::optional<PayoffMap> payoff;
  std::vector<ScheduleStep> schedule;  // branch tree; empty -> default
};

// ------------------------ worked-example fixtures ------------------------
//
// The five-dimensional coarse/fine pair used as the default scenario:
// the coarse observable takes value 10 on the first basis state and 20
// on the other four; the fine observable separates all five.

HermitianOperator coarse_observable();  // diag(10, 20, 20, 20, 20)
HermitianOperator fine_observable();    // diag(1, 2, 3, 4, 5)
ObservableSet coarse_fine_set();        // both together
PayoffMap default_payoff();             // 1 -> 10, everything else -> 20

// ------------------------------ experiments ------------------------------

/// Checks that mapping psi -> U psi and every projector P -> U P U^dag
/// leaves each rule's outcome distribution and the support count
/// untouched, over cfg.unitary_count random unitaries.
ExperimentReport invariance_audit(const ExperimentConfig& cfg);

/// Decides whether two observable sets describe the same measurement by
/// matching their projector families up to a bijective relabeling of
/// outcome tuples; if they match, asserts equal distributions for a
/// sweep of random states under every rule.
ExperimentReport equivalence_audit(const ObservableSet& a, const ObservableSet& b,
                                   const ExperimentConfig& cfg);

/// The coarse/fine demonstration: under the equal-support rule the
/// probability of the coarse value 10 is 1/2 when measuring the coarse
/// observable alone but 1/5 when measuring both and marginalizing; the
/// born rule gives identical marginals in both contexts.
ExperimentReport contextuality_demo(const ExperimentConfig& cfg);

/// Samples random projectors and random completions of them into full
/// decompositions (contexts) and tests whether the rule's probability
/// for the projector depends on the context. The born rule never does;
/// the equal-support rule does, with an exhibited counterexample.
ExperimentReport noncontextuality_audit(const MeasurementRule& rule,
                                        const ExperimentConfig& cfg);

/// Measure, evolve under the Hamiltonian for a time lapse, measure
/// again: when the observables commute with the Hamiltonian the results
/// repeat; when they do not, the equal-support rule erases all
/// correlation (mutual information zero) while the born rule keeps the
/// second outcome tied to the first.
ExperimentReport decorrelation_experiment(const ExperimentConfig& cfg);

/// Adds amplitude epsilon on an eigenspace orthogonal to an eigenstate
/// and tracks the outcome probabilities: equal-support jumps from 0 to
/// 1/2 as soon as epsilon^2 clears the support threshold, born grows
/// continuously like epsilon^2.
ExperimentReport perturbation_discontinuity(const ExperimentConfig& cfg);

/// Expected payoff computed two ways: measure the fine observable and
/// pay f(outcome), or measure the coarsened observable f(Y) directly.
/// Born agrees between the routes; equal-support does not when f is
/// non-injective.
ExperimentReport payoff_equivalence(const ExperimentConfig& cfg);

// ------------------------------ branch tree ------------------------------

inline constexpr int kMaxScheduleDepth = 8;
inline constexpr std::int64_t kMaxLeaves = 100000;

/// One world in the tree of alternative measurement histories. Children
/// weights follow the active rule's distribution at this node's state
/// and sum to the node's weight.
struct BranchNode {
  int depth;
  std::vector<double> labels;  // outcome that created this node; empty at root
  double weight;
  StateVector state;
  std::vector<BranchNode> children;

  bool is_leaf() const { return children.empty(); }
};

/// Builds the full tree for the given schedule under a single rule.
BranchNode branch_tree(const ExperimentConfig& cfg, const MeasurementRule& rule);

/// Report wrapper around branch_tree for every configured rule: leaf
/// weights, their total, and the equal-sibling check.
ExperimentReport branch_tree_experiment(const ExperimentConfig& cfg);

/// Dispatches to the experiment for `kind`, applying per-kind defaults.
ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& cfg);

}  // namespace postlab
