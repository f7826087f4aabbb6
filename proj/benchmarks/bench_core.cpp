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

// Microbenchmarks for the hot paths: joint eigenspace decomposition,
// per-rule outcome distributions, sampling with collapse, spectral time
// evolution, and history-tree construction.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "postlab/decomposition.hpp"
#include "postlab/experiments.hpp"
#include "postlab/hilbert.hpp"
#include "postlab/measurement.hpp"
#include "postlab/random.hpp"

namespace {

using namespace postlab;

// Two commuting operators with small label alphabets, so the joint
// decomposition has several multi-dimensional branches.
ObservableSet benchmark_set(int dim, RandomStream& rng) {
  const UnitaryOperator basis = random_unitary(dim, rng);
  std::vector<std::vector<double>> labels(2, std::vector<double>(dim));
  for (auto& row : labels)
    for (double& l : row) l = 1.0 + static_cast<double>(rng.below(3));
  return commuting_set_from_labels(basis, labels);
}

void BM_JointDecomposition(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(0xBE9C41ull + static_cast<std::uint64_t>(dim));
  const ObservableSet obs = benchmark_set(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(joint_decomposition(obs));
  state.SetComplexityN(dim);
}
BENCHMARK(BM_JointDecomposition)->RangeMultiplier(2)->Range(2, 128)->Complexity();

void BM_Distribution(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(0xBE9C42ull + static_cast<std::uint64_t>(dim));
  const ProjectorDecomposition dec = joint_decomposition(benchmark_set(dim, rng));
  const StateVector psi = random_state(dim, rng);
  const MeasurementRule rule =
      state.range(1) == 0 ? MeasurementRule::born() : MeasurementRule::equal_support();
  for (auto _ : state) benchmark::DoNotOptimize(distribution(psi, dec, rule));
}
BENCHMARK(BM_Distribution)
    ->ArgsProduct({{2, 8, 32, 128}, {0, 1}})
    ->ArgNames({"dim", "equal_support"});

void BM_SampleOutcome(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(0xBE9C43ull + static_cast<std::uint64_t>(dim));
  const ProjectorDecomposition dec = joint_decomposition(benchmark_set(dim, rng));
  const StateVector psi = random_state(dim, rng);
  RandomStream draws(0xD12Aull);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_outcome(psi, dec, MeasurementRule::born(), {}, draws));
}
BENCHMARK(BM_SampleOutcome)->RangeMultiplier(4)->Range(2, 128);

void BM_Evolve(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(0xBE9C44ull + static_cast<std::uint64_t>(dim));
  const UnitaryOperator basis = random_unitary(dim, rng);
  std::vector<double> energies(dim);
  for (double& e : energies) e = 4.0 * rng.uniform01();
  const HermitianOperator ham = commuting_set_from_labels(basis, {energies})[0];
  const StateVector psi = random_state(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(psi, ham, 0.7));
  state.SetComplexityN(dim);
}
BENCHMARK(BM_Evolve)->RangeMultiplier(2)->Range(2, 128)->Complexity();

void BM_BranchTree(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  RandomStream rng(0xBE9C45ull);
  ExperimentConfig cfg;
  cfg.dim = 2;
  for (int d = 0; d < depth; ++d) {
    if (d > 0) cfg.schedule.push_back(EvolveStep{pauli_x(), 0.5});
    cfg.schedule.push_back(MeasureStep{ObservableSet({pauli_z()})});
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(branch_tree(cfg, MeasurementRule::born()));
}
BENCHMARK(BM_BranchTree)->DenseRange(2, 8, 2);

}  // namespace

BENCHMARK_MAIN();
