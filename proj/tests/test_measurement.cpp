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

#include "postlab/measurement.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "postlab/errors.hpp"
#include "postlab/stats.hpp"

namespace {

using postlab::basis_state;
using postlab::collapse;
using postlab::Complex;
using postlab::commuting_set_from_labels;
using postlab::distribution;
using postlab::HermitianOperator;
using postlab::InvariantViolationError;
using postlab::joint_decomposition;
using postlab::MeasurementRule;
using postlab::ObservableSet;
using postlab::OffSupportError;
using postlab::OutcomeDistribution;
using postlab::OutcomeProbability;
using postlab::ProjectorDecomposition;
using postlab::random_state;
using postlab::random_unitary;
using postlab::RandomStream;
using postlab::sample_outcome;
using postlab::StateVector;
using postlab::support_count;
using postlab::SupportThreshold;
using postlab::uniform_state;
using postlab::Vector;

std::vector<MeasurementRule> all_rules() {
  return {MeasurementRule::born(), MeasurementRule::equal_support(),
          MeasurementRule::generalized(0.25), MeasurementRule::generalized(0.5),
          MeasurementRule::generalized(0.75)};
}

// A pool of random decompositions across dimensions, for randomized
// property sweeps.
std::vector<ProjectorDecomposition> decomposition_pool(int count, RandomStream& rng) {
  std::vector<ProjectorDecomposition> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    const int dim = 2 + static_cast<int>(rng.below(7));
    std::vector<double> labels(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<double>(1 + static_cast<int>(rng.below(4)));
    labels[0] = 9.0;  // at least two distinct eigenvalues
    pool.push_back(
        joint_decomposition(commuting_set_from_labels(random_unitary(dim, rng), {labels})));
  }
  return pool;
}

TEST_CASE("rule names are stable") {
  CHECK(MeasurementRule::born().name() == "born");
  CHECK(MeasurementRule::equal_support().name() == "equal-support");
  CHECK(MeasurementRule::generalized(0.25).name() == "generalized(a=0.25)");
  CHECK_THROWS_AS(MeasurementRule::generalized(1.5), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementRule::generalized(-0.1), std::invalid_argument);
}

TEST_CASE("distributions total one for every rule on randomized inputs") {
  RandomStream rng(1001);
  auto pool = decomposition_pool(100, rng);
  const auto rules = all_rules();
  double worst = 0.0;
  // 10000 randomized (state, decomposition) pairs, states fresh per pair.
  for (int rep = 0; rep < 10000; ++rep) {
    const ProjectorDecomposition& dec = pool[rep % pool.size()];
    const StateVector psi = random_state(dec.dim(), rng);
    const MeasurementRule& rule = rules[static_cast<std::size_t>(rep) % rules.size()];
    const OutcomeDistribution dist = distribution(psi, dec, rule);
    REQUIRE(dist.size() == dec.branch_count());
    double total = 0.0;
    for (int i = 0; i < dist.size(); ++i) total += dist.probability(i);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("generalized rule hits born at alpha 0 and equal support at alpha 1") {
  RandomStream rng(1002);
  auto pool = decomposition_pool(30, rng);
  double worst0 = 0.0;
  double worst1 = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    const ProjectorDecomposition& dec = pool[rep % pool.size()];
    const StateVector psi = random_state(dec.dim(), rng);
    const OutcomeDistribution born = distribution(psi, dec, MeasurementRule::born());
    const OutcomeDistribution gen0 = distribution(psi, dec, MeasurementRule::generalized(0.0));
    const OutcomeDistribution es = distribution(psi, dec, MeasurementRule::equal_support());
    const OutcomeDistribution gen1 = distribution(psi, dec, MeasurementRule::generalized(1.0));
    for (int i = 0; i < dec.branch_count(); ++i) {
      worst0 = std::max(worst0, std::abs(gen0.probability(i) - born.probability(i)));
      worst1 = std::max(worst1, std::abs(gen1.probability(i) - es.probability(i)));
    }
  }
  CHECK(worst0 <= 1e-12);
  CHECK(worst1 <= 1e-12);
}

TEST_CASE("born weights are the squared projections") {
  Vector v(2);
  v << Complex(std::sqrt(0.9), 0.0), Complex(std::sqrt(0.1), 0.0);
  const StateVector psi{v};
  const ProjectorDecomposition dec = joint_decomposition(ObservableSet({postlab::pauli_z()}));
  const OutcomeDistribution dist = distribution(psi, dec, MeasurementRule::born());
  // Branches sorted by eigenvalue: -1 (|1>) first, then +1 (|0>).
  CHECK(dist.labels(0)[0] == -1.0);
  CHECK(dist.probability(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dist.probability(1) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("off-support branches get exactly zero except under born") {
  // |0> against sigma-z: the -1 branch is off the support.
  const StateVector psi = basis_state(2, 0);
  const ProjectorDecomposition dec = joint_decomposition(ObservableSet({postlab::pauli_z()}));
  const auto rules = all_rules();
  for (const auto& rule : rules) {
    const OutcomeDistribution dist = distribution(psi, dec, rule);
    if (rule.kind() == postlab::RuleKind::kBorn) {
      CHECK(dist.probability(0) <= 1e-12);
    } else {
      CHECK(dist.probability(0) == 0.0);
      CHECK(dist.probability(1) == 1.0);
    }
  }
}

TEST_CASE("support membership follows the threshold") {
  const SupportThreshold thr{1e-12};
  auto leaked = [](double eps) {
    Vector v(2);
    v << Complex(std::sqrt(1.0 - eps * eps), 0.0), Complex(eps, 0.0);
    return StateVector{v};
  };
  const ProjectorDecomposition dec = joint_decomposition(ObservableSet({postlab::pauli_z()}));

  // eps^2 = 1e-8 clears tau = 1e-12; eps^2 = 1e-16 does not.
  CHECK(support_count(leaked(1e-4), dec, thr).n == 2);
  CHECK(support_count(leaked(1e-8), dec, thr).n == 1);

  // An inconsistent threshold that empties the support is an invariant
  // violation, not a zero-branch distribution.
  const SupportThreshold absurd{0.999};
  CHECK_THROWS_AS(support_count(uniform_state(2), dec, absurd), InvariantViolationError);
}

TEST_CASE("common eigenvectors are certain outcomes for every rule") {
  RandomStream rng(1003);
  const auto u = random_unitary(4, rng);
  const ObservableSet set = commuting_set_from_labels(u, {{1.0, 1.0, 2.0, 2.0}});
  const ProjectorDecomposition dec = joint_decomposition(set);
  const StateVector eigvec{Vector(u.matrix().col(2))};  // eigenvalue 2 eigenspace

  for (const auto& rule : all_rules()) {
    const OutcomeDistribution dist = distribution(eigvec, dec, rule);
    CHECK(std::abs(dist.probability(1) - 1.0) <= 1e-10);
    CHECK(dist.probability(0) <= 1e-12);
    const StateVector after = collapse(eigvec, dec, 1);
    CHECK(after.overlap_with(eigvec) > 1.0 - 1e-10);
  }
}

TEST_CASE("collapse projects and renormalizes without phase games") {
  const StateVector psi = uniform_state(2);
  const ProjectorDecomposition dec = joint_decomposition(ObservableSet({postlab::pauli_z()}));
  const StateVector after = collapse(psi, dec, 1);
  CHECK(std::abs(after.amps().norm() - 1.0) < 1e-12);
  CHECK(after.overlap_with(basis_state(2, 0)) == doctest::Approx(1.0).epsilon(1e-12));

  // Collapsing onto an off-support branch is an error.
  CHECK_THROWS_AS(collapse(basis_state(2, 0), dec, 0), OffSupportError);
  CHECK_THROWS_AS(collapse(psi, dec, 7), std::invalid_argument);
}

TEST_CASE("an immediate remeasurement repeats the outcome under every rule") {
  RandomStream rng(1004);
  auto pool = decomposition_pool(10, rng);
  for (const auto& rule : all_rules()) {
    for (int rep = 0; rep < 40; ++rep) {
      const ProjectorDecomposition& dec = pool[rep % pool.size()];
      const StateVector psi = random_state(dec.dim(), rng);
      const auto sampled = sample_outcome(psi, dec, rule, SupportThreshold{}, rng);
      const OutcomeDistribution again = distribution(sampled.post_state, dec, rule);
      CHECK(std::abs(again.probability(sampled.branch_index) - 1.0) <= 1e-10);
      const auto resampled = sample_outcome(sampled.post_state, dec, rule, SupportThreshold{}, rng);
      CHECK(resampled.branch_index == sampled.branch_index);
    }
  }
}

TEST_CASE("sampling frequencies track the analytic distribution") {
  const StateVector psi = uniform_state(5);
  const ObservableSet set({HermitianOperator::diagonal({10, 20, 20, 20, 20}),
                           HermitianOperator::diagonal({1, 2, 3, 4, 5})});
  const ProjectorDecomposition dec = joint_decomposition(set);

  for (const auto& rule : {MeasurementRule::born(), MeasurementRule::generalized(0.5)}) {
    const OutcomeDistribution dist = distribution(psi, dec, rule);
    RandomStream rng(0xFACE);
    postlab::EmpiricalHistogram hist(dec.branch_count());
    const int trials = 100000;
    for (int t = 0; t < trials; ++t)
      hist.record(sample_outcome(psi, dec, rule, SupportThreshold{}, rng).branch_index);
    for (int i = 0; i < dec.branch_count(); ++i) {
      const double margin = postlab::binomial_margin(dist.probability(i), trials, 4.0);
      CHECK(std::abs(hist.frequency(i) - dist.probability(i)) <= margin);
    }
    CHECK(chi_square_gof(hist, dist).band != postlab::GofBand::kRejected);
  }
}

TEST_CASE("sampling never lands off the support") {
  // Support is {|0>, |1>} inside a 4-dim space; branches 2 and 3 must
  // never be drawn, under any rule.
  Vector v = Vector::Zero(4);
  v(0) = Complex(std::sqrt(0.5), 0.0);
  v(1) = Complex(std::sqrt(0.5), 0.0);
  const StateVector psi{v};
  const ProjectorDecomposition dec =
      joint_decomposition(ObservableSet({HermitianOperator::diagonal({1, 2, 3, 4})}));
  for (const auto& rule : all_rules()) {
    RandomStream rng(0xBEE);
    for (int t = 0; t < 10000; ++t) {
      const auto sampled = sample_outcome(psi, dec, rule, SupportThreshold{}, rng);
      REQUIRE(sampled.branch_index < 2);
    }
  }
}

TEST_CASE("sampling is deterministic per stream") {
  const StateVector psi = uniform_state(3);
  const ProjectorDecomposition dec =
      joint_decomposition(ObservableSet({HermitianOperator::diagonal({1, 2, 3})}));
  RandomStream a(42);
  RandomStream b(42);
  for (int t = 0; t < 200; ++t) {
    const auto x = sample_outcome(psi, dec, MeasurementRule::born(), SupportThreshold{}, a);
    const auto y = sample_outcome(psi, dec, MeasurementRule::born(), SupportThreshold{}, b);
    REQUIRE(x.branch_index == y.branch_index);
  }
}

TEST_CASE("outcome distributions validate and marginalize") {
  CHECK_THROWS_AS(OutcomeDistribution({OutcomeProbability{{1.0}, 0.7}}), InvariantViolationError);
  CHECK_THROWS_AS(OutcomeDistribution({}), std::invalid_argument);

  const OutcomeDistribution dist({OutcomeProbability{{10.0, 1.0}, 0.5},
                                  OutcomeProbability{{20.0, 2.0}, 0.3},
                                  OutcomeProbability{{20.0, 3.0}, 0.2}});
  CHECK(dist.marginal(0, 20.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.marginal(0, 10.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.marginal(1, 2.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(dist.marginal(0, 99.0) == 0.0);
  CHECK_THROWS_AS(dist.marginal(2, 1.0), std::invalid_argument);
}

TEST_CASE("thresholds must be sane") {
  const StateVector psi = uniform_state(2);
  const ProjectorDecomposition dec = joint_decomposition(ObservableSet({postlab::pauli_z()}));
  CHECK_THROWS_AS(support_count(psi, dec, SupportThreshold{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(support_count(psi, dec, SupportThreshold{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(distribution(uniform_state(3), dec, MeasurementRule::born()),
                  postlab::DimensionMismatchError);
}

}  // namespace
