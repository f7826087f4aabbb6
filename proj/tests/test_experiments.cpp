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

#include "postlab/experiments.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "postlab/errors.hpp"

namespace {

using postlab::all_experiment_kinds;
using postlab::branch_tree;
using postlab::BranchNode;
using postlab::Complex;
using postlab::contextuality_demo;
using postlab::decorrelation_experiment;
using postlab::equivalence_audit;
using postlab::EvolveStep;
using postlab::ExperimentConfig;
using postlab::ExperimentKind;
using postlab::experiment_kind_from_name;
using postlab::ExperimentReport;
using postlab::HermitianOperator;
using postlab::invariance_audit;
using postlab::LeafBudgetError;
using postlab::MeasurementRule;
using postlab::MeasureStep;
using postlab::noncontextuality_audit;
using postlab::ObservableSet;
using postlab::PayoffMap;
using postlab::payoff_equivalence;
using postlab::perturbation_discontinuity;
using postlab::run_experiment;
using postlab::StateVector;
using postlab::Vector;
using postlab::VerdictStatus;

bool all_pass(const ExperimentReport& report) {
  return report.overall() == VerdictStatus::kPass;
}

TEST_CASE("experiment kinds round-trip through their names") {
  for (ExperimentKind kind : all_experiment_kinds())
    CHECK(experiment_kind_from_name(postlab::to_string(kind)) == kind);
  CHECK_THROWS_AS(experiment_kind_from_name("unknown"), std::invalid_argument);
  CHECK(all_experiment_kinds().size() == 8);
}

TEST_CASE("contextuality demo reproduces the coarse fine gap") {
  ExperimentConfig cfg;
  const ExperimentReport report = contextuality_demo(cfg);

  // Measuring the coarse observable alone: 2 branches, 1/2 each under
  // equal support. Jointly with the fine observable: 5 branches, and the
  // coarse value 10 keeps only one of them, so 1/5.
  CHECK(report.scalar("equal-support:coarse-context-probability") ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.scalar("equal-support:fine-context-marginal") ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(report.scalar("equal-support:context-gap") == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(report.scalar("born:coarse-context-probability") == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(report.scalar("born:fine-context-marginal") == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(report.scalar("target-coarse-value") == 10.0);
  CHECK(report.scalar("coarse-support-count") == 2.0);
  CHECK(report.scalar("fine-support-count") == 5.0);

  CHECK(report.verdict("equal-support-coarse-probability-matches-support-counting").status ==
        VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-fine-marginal-matches-support-counting").status ==
        VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-marginal-context-dependent").status == VerdictStatus::kPass);
  CHECK(report.verdict("born-marginal-context-independent").status == VerdictStatus::kPass);
  CHECK(all_pass(report));
}

TEST_CASE("contextuality sampling stays within the sigma policy") {
  ExperimentConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 7;
  const ExperimentReport report = contextuality_demo(cfg);
  CHECK(report.has_verdict("sampled-frequencies-match-analytic"));
  CHECK(report.verdict("sampled-frequencies-match-analytic").status != VerdictStatus::kFail);
  CHECK(!report.empirical.empty());
}

TEST_CASE("invariance audit sees no drift across isomorphisms") {
  ExperimentConfig cfg;
  cfg.unitary_count = 40;
  for (int dim : {2, 3, 5, 7}) {
    cfg.dim = dim;
    const ExperimentReport report = invariance_audit(cfg);
    CHECK(report.scalar("max-probability-deviation") < 1e-8);
    CHECK(report.scalar("max-support-count-shift") == 0.0);
    CHECK(all_pass(report));
  }
}

TEST_CASE("equivalence audit matches identical families and rejects different ones") {
  ExperimentConfig cfg;
  const HermitianOperator x = postlab::coarse_observable();
  const HermitianOperator y = postlab::fine_observable();

  const ExperimentReport same = equivalence_audit(ObservableSet({x, y}), ObservableSet({y}), cfg);
  CHECK(same.scalar("equivalent") == 1.0);
  CHECK(same.scalar("branch-count-a") == 5.0);
  CHECK(same.verdict("matched-branch-distributions-agree").status == VerdictStatus::kPass);
  CHECK(same.scalar("max-probability-deviation") <= 1e-12);

  const ExperimentReport diff = equivalence_audit(ObservableSet({x}), ObservableSet({x, y}), cfg);
  CHECK(diff.scalar("equivalent") == 0.0);
  CHECK(diff.scalar("branch-count-a") == 2.0);
  CHECK(diff.scalar("branch-count-b") == 5.0);
  CHECK(!diff.has_verdict("matched-branch-distributions-agree"));

  CHECK_THROWS_AS(
      equivalence_audit(ObservableSet({postlab::pauli_z()}), ObservableSet({y}), cfg),
      postlab::DimensionMismatchError);
}

TEST_CASE("equivalence suite passes its three claims") {
  ExperimentConfig cfg;
  cfg.unitary_count = 25;  // random relabeled pairs on top of the affine one
  const ExperimentReport report = run_experiment(ExperimentKind::kEquivalence, cfg);
  CHECK(report.verdict("redundant-coarse-observable-drops-out").status == VerdictStatus::kPass);
  CHECK(report.verdict("coarse-alone-differs-from-joint").status == VerdictStatus::kPass);
  CHECK(report.verdict("affine-relabeling-preserves-measurement").status == VerdictStatus::kPass);
  CHECK(report.scalar("relabeled-pair-count") == 26.0);
  CHECK(report.scalar("max-relabeled-probability-deviation") <= 1e-12);
}

TEST_CASE("noncontextuality holds for born and fails for equal support") {
  ExperimentConfig cfg;
  cfg.context_count = 12;
  cfg.state_count = 6;
  cfg.context_dims = {3, 4};

  const ExperimentReport born = noncontextuality_audit(MeasurementRule::born(), cfg);
  CHECK(born.scalar("max-context-deviation") <= 1e-9);
  CHECK(born.verdict("probability-context-independent").status == VerdictStatus::kPass);

  const ExperimentReport es = noncontextuality_audit(MeasurementRule::equal_support(), cfg);
  CHECK(es.scalar("max-context-deviation") > 1e-6);
  CHECK(es.verdict("probability-context-independent").status == VerdictStatus::kFail);
  // The exhibited counterexample: the coarse/fine pair around the same
  // projector. 1/2 against 1/5.
  CHECK(es.scalar("counterexample-coarse-context-probability") ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(es.scalar("counterexample-fine-context-probability") ==
        doctest::Approx(0.2).epsilon(1e-12));

  const ExperimentReport suite = run_experiment(ExperimentKind::kNoncontextuality, cfg);
  CHECK(suite.verdict("born-noncontextual").status == VerdictStatus::kPass);
  CHECK(suite.verdict("equal-support-contextual").status == VerdictStatus::kPass);
}

TEST_CASE("decorrelation reproduces the worked qubit example") {
  ExperimentConfig cfg;
  const ExperimentReport report = decorrelation_experiment(cfg);

  CHECK(report.scalar("born:p-same") == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.scalar("equal-support:p-same") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.scalar("equal-support:mutual-information") <= 1e-12);
  CHECK(report.scalar("born:mutual-information") > 1e-3);

  // Joint table rows are ordered by eigenvalue: branch 0 is sigma-z = -1,
  // the sqrt(0.1) amplitude.
  CHECK(report.scalar("born:joint-00") == doctest::Approx(0.075).epsilon(1e-10));
  CHECK(report.scalar("born:joint-01") == doctest::Approx(0.025).epsilon(1e-10));
  CHECK(report.scalar("born:joint-10") == doctest::Approx(0.225).epsilon(1e-10));
  CHECK(report.scalar("born:joint-11") == doctest::Approx(0.675).epsilon(1e-10));
  CHECK(report.scalar("equal-support:joint-00") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.scalar("equal-support:joint-11") == doctest::Approx(0.25).epsilon(1e-12));

  CHECK(report.scalar("born:mutual-information") ==
        doctest::Approx(0.04852915743608507).epsilon(1e-10));

  CHECK(report.verdict("commuting-evolution-repeats-outcome").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-mutual-information-vanishes").status == VerdictStatus::kPass);
  CHECK(report.verdict("born-same-outcome-rate-three-quarters").status == VerdictStatus::kPass);
  CHECK(report.verdict("born-retains-correlation").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-joint-uniform").status == VerdictStatus::kPass);
  CHECK(all_pass(report));
}

TEST_CASE("decorrelation sidesteps commuting and non-generic configurations") {
  ExperimentConfig commuting;
  commuting.hamiltonian = postlab::pauli_z();
  const ExperimentReport a = decorrelation_experiment(commuting);
  CHECK(a.scalar("hamiltonian-commutes") == 1.0);
  CHECK(!a.has_verdict("equal-support-mutual-information-vanishes"));
  CHECK(a.verdict("commuting-evolution-repeats-outcome").status == VerdictStatus::kPass);
  CHECK(all_pass(a));

  // A quarter turn maps each post-measurement state onto the opposite
  // branch exactly: evolved states are not generic.
  ExperimentConfig finetuned;
  finetuned.evolve_time = 1.5707963267948966;
  const ExperimentReport b = decorrelation_experiment(finetuned);
  CHECK(b.scalar("evolved-states-generic") == 0.0);
  CHECK(!b.has_verdict("equal-support-mutual-information-vanishes"));
  CHECK(all_pass(b));
}

TEST_CASE("decorrelation sampling stays within the sigma policy") {
  ExperimentConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 11;
  const ExperimentReport report = decorrelation_experiment(cfg);
  CHECK(report.verdict("sampled-frequencies-match-analytic").status != VerdictStatus::kFail);
}

TEST_CASE("perturbation jumps for equal support and crawls for born") {
  ExperimentConfig cfg;
  const ExperimentReport report = perturbation_discontinuity(cfg);
  CHECK(report.verdict("equal-support-jumps-at-support-threshold").status == VerdictStatus::kPass);
  CHECK(report.verdict("born-probability-tracks-squared-amplitude").status == VerdictStatus::kPass);
  CHECK(report.verdict("epsilon-grid-clear-of-threshold-band").status == VerdictStatus::kPass);
  CHECK(report.scalar("threshold-tau") == 1e-12);

  // The worked values at eps = 1e-4: the leaked branch carries 1e-8 of
  // born weight but a full half of equal-support weight.
  CHECK(report.scalar("equal-support:leaked-branch-probability(eps=0.0001)") ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.scalar("born:leaked-branch-probability(eps=0.0001)") ==
        doctest::Approx(1e-8).epsilon(1e-4));
  CHECK(report.scalar("equal-support:leaked-branch-probability(eps=0)") == 0.0);
  CHECK(all_pass(report));
}

TEST_CASE("an epsilon inside the threshold band is flagged") {
  ExperimentConfig cfg;
  cfg.epsilons = {0.0, 1e-6};  // sqrt(tau) = 1e-6 sits inside the band
  const ExperimentReport report = perturbation_discontinuity(cfg);
  CHECK(report.verdict("epsilon-grid-clear-of-threshold-band").status == VerdictStatus::kFlag);
  CHECK(report.overall() == VerdictStatus::kFlag);
}

TEST_CASE("payoff routes split under equal support and agree under born") {
  ExperimentConfig cfg;
  const ExperimentReport report = payoff_equivalence(cfg);

  CHECK(report.scalar("equal-support:fine-route-expectation") ==
        doctest::Approx(18.0).epsilon(1e-12));
  CHECK(report.scalar("equal-support:coarse-route-expectation") ==
        doctest::Approx(15.0).epsilon(1e-12));
  CHECK(report.scalar("equal-support:route-difference") == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(report.scalar("born:fine-route-expectation") == doctest::Approx(18.0).epsilon(1e-12));
  CHECK(report.scalar("born:route-difference") == doctest::Approx(0.0).epsilon(1e-12));

  CHECK(report.verdict("born-payoff-routes-agree").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-payoff-routes-differ").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-route-difference-matches-branch-counting").status ==
        VerdictStatus::kPass);
  CHECK(report.verdict("injective-payoff-routes-agree").status == VerdictStatus::kPass);
  CHECK(all_pass(report));
}

TEST_CASE("payoff sampling stays within the sigma policy") {
  ExperimentConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 3;
  const ExperimentReport report = payoff_equivalence(cfg);
  CHECK(report.verdict("sampled-payoffs-match-analytic").status != VerdictStatus::kFail);
}

TEST_CASE("payoff maps validate their entries") {
  const PayoffMap map({{1.0, 10.0}, {2.0, 20.0}});
  CHECK(map.payoff_for(2.0) == 20.0);
  CHECK(map.payoff_for(1.0 + 1e-9) == 10.0);
  CHECK_THROWS_AS(map.payoff_for(3.0), std::invalid_argument);
  CHECK(!PayoffMap({{1.0, 5.0}, {2.0, 5.0}}).injective());
  CHECK(PayoffMap({{1.0, 5.0}, {2.0, 6.0}}).injective());
  CHECK_THROWS_AS(PayoffMap({}), std::invalid_argument);
  CHECK_THROWS_AS(PayoffMap({{1.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PayoffMap({{1.0, inf}}), std::invalid_argument);
}

TEST_CASE("branch tree reproduces the worked depth-2 weights") {
  ExperimentConfig cfg;
  const ExperimentReport report = run_experiment(ExperimentKind::kBranchTree, cfg);

  CHECK(report.scalar("born:leaf-count") == 4.0);
  CHECK(report.scalar("equal-support:leaf-count") == 4.0);
  CHECK(report.scalar("born:leaf-weight-total") == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(report.verdict("leaf-weights-sum-to-one").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-sibling-weights-equal").status == VerdictStatus::kPass);
  CHECK(report.verdict("born-leaf-weights-match-prediction").status == VerdictStatus::kPass);
  CHECK(report.verdict("equal-support-leaf-weights-uniform").status == VerdictStatus::kPass);
  CHECK(all_pass(report));
}

TEST_CASE("a single measurement of the uniform state fans out evenly") {
  ExperimentConfig cfg;
  cfg.schedule = {MeasureStep{ObservableSet({postlab::fine_observable()})}};
  cfg.state = postlab::uniform_state(5);
  const BranchNode root = branch_tree(cfg, MeasurementRule::equal_support());
  REQUIRE(root.children.size() == 5);
  for (const auto& child : root.children) {
    CHECK(child.weight == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(child.is_leaf());
  }
  CHECK(root.weight == 1.0);
  CHECK(root.labels.empty());
}

TEST_CASE("branch weights nest: children sum to their parent") {
  ExperimentConfig cfg;  // stock depth-2 qubit schedule
  for (const auto& rule : {MeasurementRule::born(), MeasurementRule::generalized(0.3)}) {
    const BranchNode root = branch_tree(cfg, rule);
    REQUIRE(root.children.size() == 2);
    for (const auto& child : root.children) {
      double total = 0.0;
      for (const auto& leaf : child.children) total += leaf.weight;
      CHECK(std::abs(total - child.weight) <= 1e-10);
    }
  }
}

TEST_CASE("branch tree enforces its leaf and depth budgets") {
  // Five-way branching with re-spreading evolution: 5^8 leaves would
  // overrun the 1e5 budget at the last level.
  ExperimentConfig cfg;
  cfg.dim = 5;
  postlab::Matrix hm(5, 5);
  hm.setConstant(Complex(0.4, 0.0));
  for (int i = 0; i < 5; ++i) hm(i, i) = Complex(1.0, 0.0);
  const HermitianOperator spreader{hm};
  const ObservableSet fine({postlab::fine_observable()});
  for (int k = 0; k < 8; ++k) {
    if (k > 0) cfg.schedule.push_back(EvolveStep{spreader, 1.1});
    cfg.schedule.push_back(MeasureStep{fine});
  }
  cfg.state = postlab::uniform_state(5);
  CHECK_THROWS_AS(branch_tree(cfg, MeasurementRule::equal_support()), LeafBudgetError);

  // More than eight measurements is over the depth budget regardless.
  ExperimentConfig deep;
  for (int k = 0; k < 9; ++k)
    deep.schedule.push_back(MeasureStep{ObservableSet({postlab::pauli_z()})});
  CHECK_THROWS_AS(branch_tree(deep, MeasurementRule::born()), LeafBudgetError);
}

TEST_CASE("branch tree sampling stays within the sigma policy") {
  ExperimentConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 5;
  const ExperimentReport report = run_experiment(ExperimentKind::kBranchTree, cfg);
  CHECK(report.verdict("sampled-leaf-frequencies-match-analytic").status != VerdictStatus::kFail);
}

TEST_CASE("run_experiment names reports after their kind") {
  ExperimentConfig cfg;
  for (ExperimentKind kind : all_experiment_kinds()) {
    const ExperimentReport report = run_experiment(kind, cfg);
    CHECK(report.name == postlab::to_string(kind));
    CHECK(report.overall() == VerdictStatus::kPass);
  }

  ExperimentConfig named;
  named.name = "my-run";
  CHECK(run_experiment(ExperimentKind::kContextuality, named).name == "my-run");
}

}  // namespace
