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
#include <sstream>
#include <utility>

namespace postlab {

namespace {

void check_threshold(const SupportThreshold& thr, const char* who) {
  if (!std::isfinite(thr.tau) || thr.tau <= 0.0 || thr.tau >= 1.0)
    throw std::invalid_argument(std::string(who) + ": tau must lie in (0, 1)");
}

void check_dims(const StateVector& state, const ProjectorDecomposition& dec, const char* who) {
  if (state.dim() != dec.dim())
    throw DimensionMismatchError(std::string(who) + ": state and decomposition dimensions differ");
}

// |P_i psi|^2 per branch.
std::vector<double> branch_weights(const StateVector& state, const ProjectorDecomposition& dec) {
  std::vector<double> w(dec.branch_count());
  for (int i = 0; i < dec.branch_count(); ++i)
    w[i] = dec.branch(i).projector.apply(state).squaredNorm();
  return w;
}

}  // namespace

MeasurementRule MeasurementRule::generalized(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("MeasurementRule::generalized: alpha must lie in [0, 1]");
  return MeasurementRule(RuleKind::kGeneralized, alpha);
}

std::string MeasurementRule::name() const {
  switch (kind_) {
    case RuleKind::kBorn:
      return "born";
    case RuleKind::kEqualSupport:
      return "equal-support";
    case RuleKind::kGeneralized: {
      std::ostringstream out;
      out << "generalized(a=" << alpha_ << ")";
      return out.str();
    }
  }
  return "unknown";
}

OutcomeDistribution::OutcomeDistribution(std::vector<OutcomeProbability> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty())
    throw std::invalid_argument("OutcomeDistribution: at least one entry is required");
  double total = 0.0;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.probability) || e.probability < 0.0)
      throw std::invalid_argument("OutcomeDistribution: probabilities must be finite and >= 0");
    total += e.probability;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "OutcomeDistribution: probabilities total " << total << ", expected 1";
    throw InvariantViolationError(msg.str());
  }
}

double OutcomeDistribution::marginal(int label_index, double value, double tol) const {
  if (entries_.empty() || label_index < 0 ||
      label_index >= static_cast<int>(entries_[0].labels.size()))
    throw std::invalid_argument("OutcomeDistribution::marginal: label index out of range");
  if (!std::isfinite(value) || !std::isfinite(tol) || tol < 0.0)
    throw std::invalid_argument("OutcomeDistribution::marginal: value and tol must be finite");
  double total = 0.0;
  for (const auto& e : entries_)
    if (std::abs(e.labels[label_index] - value) <= tol) total += e.probability;
  return total;
}

SupportCount support_count(const StateVector& state, const ProjectorDecomposition& dec,
                           const SupportThreshold& thr) {
  check_dims(state, dec, "support_count");
  check_threshold(thr, "support_count");
  const std::vector<double> w = branch_weights(state, dec);
  SupportCount out;
  out.on_support.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.on_support[i] = w[i] > thr.tau;
    if (out.on_support[i]) out.n += 1;
  }
  if (out.n == 0) {
    std::ostringstream msg;
    msg << "support_count: no branch exceeds tau = " << thr.tau
        << " although the state is normalized; the threshold is inconsistent "
        << "with this decomposition";
    throw InvariantViolationError(msg.str());
  }
  return out;
}

OutcomeDistribution distribution(const StateVector& state, const ProjectorDecomposition& dec,
                                 const MeasurementRule& rule, const SupportThreshold& thr) {
  check_dims(state, dec, "distribution");
  check_threshold(thr, "distribution");
  const std::vector<double> w = branch_weights(state, dec);
  const SupportCount sc = support_count(state, dec, thr);

  std::vector<OutcomeProbability> entries;
  entries.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double p = 0.0;
    switch (rule.kind()) {
      case RuleKind::kBorn:
        p = w[i];  // support plays no role
        break;
      case RuleKind::kEqualSupport:
        p = sc.on_support[i] ? 1.0 / sc.n : 0.0;
        break;
      case RuleKind::kGeneralized:
        p = sc.on_support[i] ? rule.alpha() / sc.n + (1.0 - rule.alpha()) * w[i] : 0.0;
        break;
    }
    entries.push_back(OutcomeProbability{dec.branch(i).labels, p});
  }
  return OutcomeDistribution(std::move(entries));
}

StateVector collapse(const StateVector& state, const ProjectorDecomposition& dec,
                     int branch_index, const SupportThreshold& thr) {
  check_dims(state, dec, "collapse");
  check_threshold(thr, "collapse");
  if (branch_index < 0 || branch_index >= dec.branch_count())
    throw std::invalid_argument("collapse: branch index out of range");
  Vector projected = dec.branch(branch_index).projector.apply(state);
  const double w = projected.squaredNorm();
  if (w <= thr.tau) {
    std::ostringstream msg;
    msg << "collapse: branch " << branch_index << " carries squared weight " << w
        << " <= tau = " << thr.tau << "; the state has no support there";
    throw OffSupportError(msg.str());
  }
  return StateVector(projected / std::sqrt(w));
}

SampledOutcome sample_outcome(const StateVector& state, const ProjectorDecomposition& dec,
                              const MeasurementRule& rule, const SupportThreshold& thr,
                              RandomStream& rng) {
  const OutcomeDistribution dist = distribution(state, dec, rule, thr);
  const SupportCount sc = support_count(state, dec, thr);

  const double u = rng.uniform01();
  double cum = 0.0;
  int chosen = -1;
  for (int i = 0; i < dist.size(); ++i) {
    if (!sc.on_support[i]) continue;
    chosen = i;  // last on-support branch backstops floating shortfall
    cum += dist.probability(i);
    if (u < cum) break;
  }
  return SampledOutcome{chosen, collapse(state, dec, chosen, thr)};
}

}  // namespace postlab
