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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "postlab/stats.hpp"

namespace postlab {

namespace {

constexpr double kPiOverSix = 0.5235987755982988;
constexpr double kProjectorMatchTol = 1e-7;     // projector bijection distance
constexpr double kDistributionAgreeTol = 1e-12; // equivalent measurements
constexpr double kContextIndependenceTol = 1e-9;
constexpr double kDetectableGap = 1e-6;         // "the rules visibly differ"

std::string fmt(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

std::vector<MeasurementRule> rules_for(const ExperimentConfig& cfg, ExperimentKind kind) {
  if (!cfg.rules.empty()) return cfg.rules;
  switch (kind) {
    case ExperimentKind::kInvariance:
      return {MeasurementRule::born(), MeasurementRule::equal_support(),
              MeasurementRule::generalized(0.25), MeasurementRule::generalized(0.5),
              MeasurementRule::generalized(0.75)};
    case ExperimentKind::kEquivalence:
      return {MeasurementRule::born(), MeasurementRule::equal_support(),
              MeasurementRule::generalized(0.5)};
    default:
      return {MeasurementRule::born(), MeasurementRule::equal_support()};
  }
}

bool has_rule(const std::vector<MeasurementRule>& rules, RuleKind kind) {
  for (const auto& r : rules)
    if (r.kind() == kind) return true;
  return false;
}

// The worked coarse/fine pattern in any dimension: one eigenvalue 10 on
// the first basis state, a (d-1)-fold eigenvalue 20 elsewhere, next to a
// fully resolving companion with values 1..d.
HermitianOperator coarse_pattern(int d) {
  std::vector<double> v(static_cast<std::size_t>(d), 20.0);
  v[0] = 10.0;
  return HermitianOperator::diagonal(v);
}

HermitianOperator fine_pattern(int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i + 1);
  return HermitianOperator::diagonal(v);
}

// ----------------------- verdict grading helpers -----------------------

// Monte Carlo policy: under 4 sigma is expected noise, under 6 sigma is
// worth a look, beyond that the claim fails.
VerdictStatus sigma_status(double sigma) {
  if (sigma < 4.0) return VerdictStatus::kPass;
  if (sigma < 6.0) return VerdictStatus::kFlag;
  return VerdictStatus::kFail;
}

const char* band_name(GofBand band) {
  switch (band) {
    case GofBand::kConsistent:
      return "consistent";
    case GofBand::kSuspect:
      return "suspect";
    case GofBand::kRejected:
      return "rejected";
  }
  return "unknown";
}

// Deviation of an observed frequency in binomial standard errors.
double frequency_sigma(double observed, double expected, std::int64_t trials) {
  const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
  const double diff = std::abs(observed - expected);
  if (se <= 0.0) return diff == 0.0 ? 0.0 : 1e9;
  return diff / se;
}

bool chi_square_applicable(const OutcomeDistribution& dist, std::int64_t trials) {
  for (int i = 0; i < dist.size(); ++i) {
    const double p = dist.probability(i);
    if (p > 0.0 && p * static_cast<double>(trials) < 5.0) return false;
  }
  return true;
}

// The goodness-of-fit statistic lands in the report as a diagnostic, not
// a verdict: its 0.001 band fires at 3.3 sigma for one degree of
// freedom, tighter than the 4/6 sigma policy the frequency claims grade
// by, so an expected-noise seed would otherwise hard-fail a run.
void record_gof_diagnostic(ExperimentReport& report, const std::string& key,
                           const EmpiricalHistogram& hist, const OutcomeDistribution& dist,
                           std::int64_t trials) {
  if (!chi_square_applicable(dist, trials)) {
    report.add_note("chi-square skipped for " + key + ": expected counts below 5");
    return;
  }
  const GofResult gof = chi_square_gof(hist, dist);
  report.add_scalar(key + ":chi-square", gof.statistic);
  if (gof.band != GofBand::kConsistent) {
    report.add_note("chi-square for " + key + " in the " + band_name(gof.band) +
                    " band (statistic " + fmt(gof.statistic) + ", dof " + fmt(gof.dof) +
                    "); frequencies are graded by the 4/6 sigma policy");
  }
}

// Worst per-bin frequency deviation of a sampled histogram, in binomial
// standard errors.
double worst_bin_sigma(const EmpiricalHistogram& hist, const OutcomeDistribution& dist,
                       std::int64_t trials) {
  double worst = 0.0;
  for (int i = 0; i < dist.size(); ++i)
    worst = std::max(worst, frequency_sigma(hist.frequency(i), dist.probability(i), trials));
  return worst;
}

EmpiricalHistogram simulate_measurement(const StateVector& state,
                                        const ProjectorDecomposition& dec,
                                        const MeasurementRule& rule, const SupportThreshold& thr,
                                        std::int64_t trials, RandomStream& rng) {
  EmpiricalHistogram hist(dec.branch_count());
  for (std::int64_t t = 0; t < trials; ++t)
    hist.record(sample_outcome(state, dec, rule, thr, rng).branch_index);
  return hist;
}

}  // namespace

// ------------------------------ kind names ------------------------------

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kInvariance:
      return "invariance";
    case ExperimentKind::kEquivalence:
      return "equivalence";
    case ExperimentKind::kContextuality:
      return "contextuality";
    case ExperimentKind::kNoncontextuality:
      return "noncontextuality";
    case ExperimentKind::kDecorrelation:
      return "decorrelation";
    case ExperimentKind::kPerturbation:
      return "perturbation";
    case ExperimentKind::kPayoff:
      return "payoff";
    case ExperimentKind::kBranchTree:
      return "branch-tree";
  }
  return "unknown";
}

std::vector<ExperimentKind> all_experiment_kinds() {
  return {ExperimentKind::kInvariance,    ExperimentKind::kEquivalence,
          ExperimentKind::kContextuality, ExperimentKind::kNoncontextuality,
          ExperimentKind::kDecorrelation, ExperimentKind::kPerturbation,
          ExperimentKind::kPayoff,        ExperimentKind::kBranchTree};
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  for (ExperimentKind kind : all_experiment_kinds())
    if (name == to_string(kind)) return kind;
  std::ostringstream msg;
  msg << "unknown experiment '" << name << "'; valid names:";
  for (ExperimentKind kind : all_experiment_kinds()) msg << " " << to_string(kind);
  throw std::invalid_argument(msg.str());
}

// ------------------------------ PayoffMap ------------------------------

PayoffMap::PayoffMap(std::vector<std::pair<double, double>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("PayoffMap: at least one entry is required");
  for (const auto& [label, value] : entries_) {
    if (!std::isfinite(label) || !std::isfinite(value))
      throw std::invalid_argument("PayoffMap: labels and values must be finite");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (std::abs(entries_[i].first - entries_[j].first) <= 1e-6) {
        std::ostringstream msg;
        msg << "PayoffMap: domain labels " << entries_[i].first << " and " << entries_[j].first
            << " are too close to tell apart";
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

double PayoffMap::payoff_for(double label, double tol) const {
  if (!std::isfinite(label) || !std::isfinite(tol) || tol < 0.0)
    throw std::invalid_argument("PayoffMap::payoff_for: label and tol must be finite");
  for (const auto& [domain, value] : entries_)
    if (std::abs(domain - label) <= tol) return value;
  std::ostringstream msg;
  msg << "PayoffMap::payoff_for: label " << label << " is not in the payoff domain";
  throw std::invalid_argument(msg.str());
}

bool PayoffMap::injective() const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    for (std::size_t j = i + 1; j < entries_.size(); ++j)
      if (std::abs(entries_[i].second - entries_[j].second) <= 1e-9) return false;
  return true;
}

// ------------------------ worked-example fixtures ------------------------

HermitianOperator coarse_observable() { return coarse_pattern(5); }

HermitianOperator fine_observable() { return fine_pattern(5); }

ObservableSet coarse_fine_set() {
  return ObservableSet({coarse_observable(), fine_observable()});
}

PayoffMap default_payoff() {
  return PayoffMap({{1.0, 10.0}, {2.0, 20.0}, {3.0, 20.0}, {4.0, 20.0}, {5.0, 20.0}});
}

// ------------------------------ invariance ------------------------------

ExperimentReport invariance_audit(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "invariance" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kInvariance);
  RandomStream rng(cfg.seed);

  ObservableSet obs = [&] {
    if (cfg.observables) return *cfg.observables;
    if (cfg.dim == 5) return coarse_fine_set();
    // A degenerate first operator next to a resolving second one, in a
    // random basis, so both coarse and fine branches are exercised.
    std::vector<double> coarse(static_cast<std::size_t>(cfg.dim));
    std::vector<double> fine(static_cast<std::size_t>(cfg.dim));
    for (int i = 0; i < cfg.dim; ++i) {
      coarse[static_cast<std::size_t>(i)] = static_cast<double>(1 + i / 2);
      fine[static_cast<std::size_t>(i)] = static_cast<double>(1 + i);
    }
    RandomStream basis_rng = rng.substream(0x10);
    return commuting_set_from_labels(random_unitary(cfg.dim, basis_rng), {coarse, fine});
  }();

  RandomStream state_rng = rng.substream(0x20);
  const StateVector state = cfg.state ? *cfg.state : random_state(obs.dim(), state_rng);
  const ProjectorDecomposition dec = joint_decomposition(obs, cfg.tol_cluster);

  std::vector<OutcomeDistribution> base;
  base.reserve(rules.size());
  for (const auto& rule : rules) base.push_back(distribution(state, dec, rule, cfg.threshold));
  const int base_n = support_count(state, dec, cfg.threshold).n;

  double max_dev = 0.0;
  int max_support_shift = 0;
  RandomStream unitary_rng = rng.substream(0x30);
  for (int k = 0; k < cfg.unitary_count; ++k) {
    const UnitaryOperator u = random_unitary(obs.dim(), unitary_rng);
    const StateVector mapped_state = StateVector::normalized(u.matrix() * state.amps());
    const ProjectorDecomposition mapped_dec = dec.transformed(u);
    const int mapped_n = support_count(mapped_state, mapped_dec, cfg.threshold).n;
    max_support_shift = std::max(max_support_shift, std::abs(mapped_n - base_n));
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const OutcomeDistribution mapped = distribution(mapped_state, mapped_dec, rules[r], cfg.threshold);
      for (int i = 0; i < mapped.size(); ++i)
        max_dev = std::max(max_dev, std::abs(mapped.probability(i) - base[r].probability(i)));
    }
  }

  report.add_scalar("unitary-count", static_cast<double>(cfg.unitary_count));
  report.add_scalar("max-probability-deviation", max_dev);
  report.add_scalar("max-support-count-shift", static_cast<double>(max_support_shift));

  std::ostringstream rule_list;
  for (std::size_t r = 0; r < rules.size(); ++r) rule_list << (r ? ", " : "") << rules[r].name();
  report.add_verdict("distribution-invariant-under-isomorphism", max_dev < 1e-8, max_dev,
                     "max outcome-probability shift " + fmt(max_dev) + " over " +
                         fmt(cfg.unitary_count) + " random unitaries in dimension " +
                         fmt(obs.dim()) + " (rules: " + rule_list.str() + "), threshold 1e-8");
  report.add_verdict("support-count-invariant", max_support_shift == 0,
                     static_cast<double>(max_support_shift),
                     "support count stayed " + fmt(base_n) + " under every transformation");
  return report;
}

// ------------------------------ equivalence ------------------------------

namespace {

struct MatchResult {
  bool equivalent = false;
  std::vector<int> to_b;        // a-branch i matches b-branch to_b[i]
  double max_distance = 0.0;    // over matched pairs, when equivalent
  double best_distance = 0.0;   // worst best-match distance, when not
};

MatchResult match_projector_families(const ProjectorDecomposition& a,
                                     const ProjectorDecomposition& b) {
  MatchResult out;
  if (a.branch_count() != b.branch_count()) {
    out.best_distance = 1.0;
    return out;
  }
  const int n = a.branch_count();
  out.to_b.assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double best_dist = 0.0;
    for (int j = 0; j < n; ++j) {
      const double dist = max_abs(a.branch(i).projector.matrix() - b.branch(j).projector.matrix());
      if (best < 0 || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    out.best_distance = std::max(out.best_distance, best_dist);
    if (best_dist > kProjectorMatchTol || taken[static_cast<std::size_t>(best)]) {
      out.to_b.clear();
      return out;
    }
    taken[static_cast<std::size_t>(best)] = true;
    out.to_b[static_cast<std::size_t>(i)] = best;
    out.max_distance = std::max(out.max_distance, best_dist);
  }
  out.equivalent = true;
  return out;
}

}  // namespace

ExperimentReport equivalence_audit(const ObservableSet& a, const ObservableSet& b,
                                   const ExperimentConfig& cfg) {
  if (a.dim() != b.dim())
    throw DimensionMismatchError("equivalence_audit: observable sets act on different spaces");

  ExperimentReport report;
  report.name = cfg.name.empty() ? "equivalence" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kEquivalence);

  const ProjectorDecomposition dec_a = joint_decomposition(a, cfg.tol_cluster);
  const ProjectorDecomposition dec_b = joint_decomposition(b, cfg.tol_cluster);
  const MatchResult match = match_projector_families(dec_a, dec_b);

  report.add_scalar("branch-count-a", static_cast<double>(dec_a.branch_count()));
  report.add_scalar("branch-count-b", static_cast<double>(dec_b.branch_count()));
  report.add_scalar("equivalent", match.equivalent ? 1.0 : 0.0);
  report.add_scalar("projector-distance",
                    match.equivalent ? match.max_distance : match.best_distance);

  if (!match.equivalent) {
    report.add_note("no projector bijection within " + fmt(kProjectorMatchTol) +
                    "; the two sets describe different measurements");
    return report;
  }

  const int states = cfg.state_count > 0 ? cfg.state_count : 100;
  RandomStream rng = RandomStream(cfg.seed).substream(0x40);
  double max_dev = 0.0;
  for (int s = 0; s < states; ++s) {
    const StateVector psi = random_state(a.dim(), rng);
    for (const auto& rule : rules) {
      const OutcomeDistribution da = distribution(psi, dec_a, rule, cfg.threshold);
      const OutcomeDistribution db = distribution(psi, dec_b, rule, cfg.threshold);
      for (int i = 0; i < da.size(); ++i) {
        const int j = match.to_b[static_cast<std::size_t>(i)];
        max_dev = std::max(max_dev, std::abs(da.probability(i) - db.probability(j)));
      }
    }
  }
  report.add_scalar("max-probability-deviation", max_dev);
  report.add_verdict("matched-branch-distributions-agree", max_dev <= kDistributionAgreeTol,
                     max_dev,
                     "matched projector families, max probability deviation " + fmt(max_dev) +
                         " over " + fmt(states) + " random states, threshold " +
                         fmt(kDistributionAgreeTol));
  return report;
}

namespace {

ExperimentReport equivalence_suite(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "equivalence" : cfg.name;
  const int d = cfg.dim;
  const HermitianOperator x = coarse_pattern(d);
  const HermitianOperator y = fine_pattern(d);

  auto sub_cfg = [&](std::uint64_t salt) {
    ExperimentConfig c = cfg;
    c.seed = cfg.seed ^ salt;
    return c;
  };

  // A coarse observable measured next to one that already resolves every
  // branch adds nothing: {x, y} and {y} are the same measurement.
  const ExperimentReport joint_vs_fine =
      equivalence_audit(ObservableSet({x, y}), ObservableSet({y}), sub_cfg(0x11));
  const bool jf_equiv = joint_vs_fine.scalar("equivalent") == 1.0;
  const double jf_dev =
      jf_equiv ? joint_vs_fine.scalar("max-probability-deviation") : 1.0;
  report.add_scalar("joint-fine-projector-distance", joint_vs_fine.scalar("projector-distance"));
  report.add_verdict("redundant-coarse-observable-drops-out",
                     jf_equiv && jf_dev <= kDistributionAgreeTol, jf_dev,
                     "{coarse, fine} vs {fine}: projector families match and probabilities agree "
                     "within " + fmt(kDistributionAgreeTol));

  // Measuring the coarse observable alone is NOT the joint measurement:
  // branch counts differ, so no bijection exists.
  const ExperimentReport coarse_vs_joint =
      equivalence_audit(ObservableSet({x}), ObservableSet({x, y}), sub_cfg(0x12));
  const bool cj_equiv = coarse_vs_joint.scalar("equivalent") == 1.0;
  report.add_verdict("coarse-alone-differs-from-joint", !cj_equiv, cj_equiv ? 1.0 : 0.0,
                     "{coarse} has " + fmt(coarse_vs_joint.scalar("branch-count-a")) +
                         " branches, the joint has " +
                         fmt(coarse_vs_joint.scalar("branch-count-b")) +
                         "; correctly reported as different measurements");

  // Affine relabelings leave the projector family untouched, so the
  // statistics must not move either: first 2x+1, then random rescalings
  // of random degenerate observables in random bases.
  double relabel_dev = 0.0;
  bool relabel_ok = true;
  {
    const Matrix two_x_plus_one =
        2.0 * x.matrix() + Matrix::Identity(d, d);
    ExperimentConfig c = sub_cfg(0x13);
    c.state_count = cfg.state_count > 0 ? cfg.state_count : 100;
    const ExperimentReport affine = equivalence_audit(
        ObservableSet({x}), ObservableSet({HermitianOperator(two_x_plus_one)}), c);
    relabel_ok = affine.scalar("equivalent") == 1.0;
    if (relabel_ok) relabel_dev = affine.scalar("max-probability-deviation");
  }
  const int pairs = cfg.unitary_count;
  RandomStream rng = RandomStream(cfg.seed).substream(0x50);
  for (int pair = 0; relabel_ok && pair < pairs; ++pair) {
    const int dim_p = 2 + static_cast<int>(rng.below(5));
    std::vector<double> labels(static_cast<std::size_t>(dim_p));
    for (int i = 0; i < dim_p; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<double>(1 + rng.below(3));
    const double scale = (rng.below(2) ? -1.0 : 1.0) * static_cast<double>(1 + rng.below(3));
    const double shift = static_cast<double>(rng.below(7)) - 3.0;
    std::vector<double> relabeled(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) relabeled[i] = scale * labels[i] + shift;

    const UnitaryOperator basis = random_unitary(dim_p, rng);
    ExperimentConfig c = sub_cfg(0x1000 + static_cast<std::uint64_t>(pair));
    c.state_count = 5;
    const ExperimentReport audit =
        equivalence_audit(commuting_set_from_labels(basis, {labels}),
                          commuting_set_from_labels(basis, {relabeled}), c);
    if (audit.scalar("equivalent") != 1.0) {
      relabel_ok = false;
      break;
    }
    relabel_dev = std::max(relabel_dev, audit.scalar("max-probability-deviation"));
  }
  report.add_scalar("relabeled-pair-count", static_cast<double>(pairs + 1));
  report.add_scalar("max-relabeled-probability-deviation", relabel_dev);
  report.add_verdict("affine-relabeling-preserves-measurement",
                     relabel_ok && relabel_dev <= kDistributionAgreeTol, relabel_dev,
                     "probabilities across " + fmt(pairs + 1) +
                         " relabeled observable pairs agree within " +
                         fmt(kDistributionAgreeTol));
  return report;
}

}  // namespace

// ----------------------------- contextuality -----------------------------

ExperimentReport contextuality_demo(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "contextuality" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kContextuality);

  // Two contexts for the same coarse question: measure the coarse
  // observable alone, or measure it jointly with a companion that splits
  // the degenerate branch, then marginalize.
  const ObservableSet fine_set = cfg.observables ? *cfg.observables : [&] {
    return ObservableSet({coarse_pattern(cfg.dim), fine_pattern(cfg.dim)});
  }();
  const ObservableSet coarse_set = ObservableSet({fine_set[0]});
  const StateVector psi = cfg.state ? *cfg.state : uniform_state(fine_set.dim());

  const ProjectorDecomposition dec_coarse = joint_decomposition(coarse_set, cfg.tol_cluster);
  const ProjectorDecomposition dec_fine = joint_decomposition(fine_set, cfg.tol_cluster);
  const double target = dec_coarse.branch(0).labels[0];

  const SupportCount sc_coarse = support_count(psi, dec_coarse, cfg.threshold);
  const SupportCount sc_fine = support_count(psi, dec_fine, cfg.threshold);
  int fine_at_target = 0;
  for (int i = 0; i < dec_fine.branch_count(); ++i)
    if (sc_fine.on_support[i] && std::abs(dec_fine.branch(i).labels[0] - target) <= 1e-6)
      fine_at_target += 1;

  report.add_scalar("target-coarse-value", target);
  report.add_scalar("coarse-support-count", static_cast<double>(sc_coarse.n));
  report.add_scalar("fine-support-count", static_cast<double>(sc_fine.n));
  report.add_scalar("fine-branches-at-target", static_cast<double>(fine_at_target));

  double born_gap = 0.0;
  double es_coarse_dev = 0.0;
  double es_fine_dev = 0.0;
  double es_gap = 0.0;
  double es_coarse_prob = 0.0;
  double es_fine_prob = 0.0;
  std::vector<double> coarse_probs(rules.size());
  std::vector<double> fine_probs(rules.size());
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const double p_coarse =
        distribution(psi, dec_coarse, rules[r], cfg.threshold).marginal(0, target);
    const double p_fine =
        distribution(psi, dec_fine, rules[r], cfg.threshold).marginal(0, target);
    coarse_probs[r] = p_coarse;
    fine_probs[r] = p_fine;
    const std::string& name = rules[r].name();
    report.add_scalar(name + ":coarse-context-probability", p_coarse);
    report.add_scalar(name + ":fine-context-marginal", p_fine);
    report.add_scalar(name + ":context-gap", std::abs(p_coarse - p_fine));
    if (rules[r].kind() == RuleKind::kBorn) born_gap = std::abs(p_coarse - p_fine);
    if (rules[r].kind() == RuleKind::kEqualSupport) {
      const double expected_coarse = sc_coarse.on_support[0] ? 1.0 / sc_coarse.n : 0.0;
      const double expected_fine = static_cast<double>(fine_at_target) / sc_fine.n;
      es_coarse_dev = std::abs(p_coarse - expected_coarse);
      es_fine_dev = std::abs(p_fine - expected_fine);
      es_gap = std::abs(p_coarse - p_fine);
      es_coarse_prob = p_coarse;
      es_fine_prob = p_fine;
    }
  }

  if (has_rule(rules, RuleKind::kEqualSupport)) {
    report.add_verdict("equal-support-coarse-probability-matches-support-counting",
                       es_coarse_dev <= 1e-12, es_coarse_dev,
                       "measuring the coarse observable alone gives the target value "
                       "probability 1/n over its own support, deviation " + fmt(es_coarse_dev));
    report.add_verdict("equal-support-fine-marginal-matches-support-counting",
                       es_fine_dev <= 1e-12, es_fine_dev,
                       "marginalizing the joint measurement counts fine branches, deviation " +
                           fmt(es_fine_dev));
    report.add_verdict("equal-support-marginal-context-dependent", es_gap > kDetectableGap,
                       es_gap > kDetectableGap ? 0.0 : es_gap,
                       "the same coarse question answers " + fmt(es_coarse_prob) + " vs " +
                           fmt(es_fine_prob) + " depending on what is measured alongside");
  }
  if (has_rule(rules, RuleKind::kBorn)) {
    report.add_verdict("born-marginal-context-independent", born_gap <= 1e-12, born_gap,
                       "coarse-context and fine-context marginals agree within 1e-12");
  }

  if (cfg.trials > 0) {
    RandomStream rng = RandomStream(cfg.seed).substream(0x60);
    double worst_sigma = 0.0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (int ctx = 0; ctx < 2; ++ctx) {
        const ProjectorDecomposition& dec = ctx == 0 ? dec_coarse : dec_fine;
        const OutcomeDistribution dist = distribution(psi, dec, rules[r], cfg.threshold);
        RandomStream sim_rng = rng.substream(0x100 + 2 * r + static_cast<std::uint64_t>(ctx));
        const EmpiricalHistogram hist =
            simulate_measurement(psi, dec, rules[r], cfg.threshold, cfg.trials, sim_rng);

        double observed = 0.0;
        for (int i = 0; i < dec.branch_count(); ++i)
          if (std::abs(dec.branch(i).labels[0] - target) <= 1e-6) observed += hist.frequency(i);
        const double expected = ctx == 0 ? coarse_probs[r] : fine_probs[r];
        const double marginal_sigma = frequency_sigma(observed, expected, cfg.trials);
        worst_sigma = std::max(worst_sigma, marginal_sigma);
        report.empirical.push_back(EmpiricalEntry{
            rules[r].name() + (ctx == 0 ? ":coarse-context-frequency" : ":fine-context-frequency"),
            observed, expected, marginal_sigma});

        worst_sigma = std::max(worst_sigma, worst_bin_sigma(hist, dist, cfg.trials));
        record_gof_diagnostic(report,
                              rules[r].name() + (ctx == 0 ? ":coarse-context" : ":fine-context"),
                              hist, dist, cfg.trials);
      }
    }
    report.add_verdict("sampled-frequencies-match-analytic", sigma_status(worst_sigma),
                       worst_sigma,
                       "worst per-branch frequency deviation " + fmt(worst_sigma) +
                           " sigma over " + fmt(cfg.trials) + " trials per context");
  }
  return report;
}

// ---------------------------- noncontextuality ----------------------------

namespace {

struct ContextSweepResult {
  double max_deviation = 0.0;
  std::string worst_description;
};

// Probability a rule assigns to one fixed projector across many random
// completions of it into a full decomposition. The completions vary in
// how finely they split the orthogonal complement, which is exactly what
// a support-counting rule is sensitive to.
ContextSweepResult sweep_contexts(const MeasurementRule& rule, const ExperimentConfig& cfg) {
  ContextSweepResult out;
  RandomStream rng = RandomStream(cfg.seed).substream(0x70);

  for (int dim : cfg.context_dims) {
    if (dim < 3)
      throw std::invalid_argument("noncontextuality_audit: context dimensions must be >= 3");
    const int targets = std::min(5, std::max(1, cfg.context_count));
    const int contexts_per_target = std::max(1, cfg.context_count / targets);
    const int states = cfg.state_count > 0 ? cfg.state_count : 20;

    for (int t = 0; t < targets; ++t) {
      const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim - 2)));
      const UnitaryOperator frame = random_unitary(dim, rng);
      const Matrix target_basis = frame.matrix().leftCols(rank);
      const Projector target = Projector::from_orthonormal_basis(target_basis);
      const Matrix complement = frame.matrix().rightCols(dim - rank);
      const int m = dim - rank;

      // Build the contexts first, then evaluate every state on all of
      // them; the deviation is measured per state across contexts.
      std::vector<ProjectorDecomposition> contexts;
      std::vector<int> granularity;
      contexts.reserve(static_cast<std::size_t>(contexts_per_target));
      for (int c = 0; c < contexts_per_target; ++c) {
        const int k = 1 + c % m;
        const Matrix rotated = complement * random_unitary(m, rng).matrix();
        std::vector<MeasurementBranch> branches;
        branches.push_back(MeasurementBranch{{0.0}, target});
        for (int b = 0; b < k; ++b) {
          const int lo = b * m / k;
          const int hi = (b + 1) * m / k;
          branches.push_back(MeasurementBranch{
              {static_cast<double>(b + 1)},
              Projector::from_orthonormal_basis(rotated.middleCols(lo, hi - lo))});
        }
        contexts.push_back(ProjectorDecomposition(dim, std::move(branches)));
        granularity.push_back(k);
      }

      for (int s = 0; s < states; ++s) {
        const StateVector psi = random_state(dim, rng);
        double lo = 2.0, hi = -1.0;
        int lo_ctx = 0, hi_ctx = 0;
        for (std::size_t c = 0; c < contexts.size(); ++c) {
          const double p =
              distribution(psi, contexts[c], rule, cfg.threshold).probability(0);
          if (p < lo) { lo = p; lo_ctx = static_cast<int>(c); }
          if (p > hi) { hi = p; hi_ctx = static_cast<int>(c); }
        }
        if (hi - lo > out.max_deviation) {
          out.max_deviation = hi - lo;
          std::ostringstream desc;
          desc << "dimension " << dim << ", rank-" << rank << " projector: probability "
               << lo << " with the complement split " << granularity[static_cast<std::size_t>(lo_ctx)]
               << " ways vs " << hi << " split " << granularity[static_cast<std::size_t>(hi_ctx)]
               << " ways";
          out.worst_description = desc.str();
        }
      }
    }
  }
  return out;
}

// The deterministic exhibit: the same rank-1 projector completed two
// ways, by one block or by four singletons.
std::pair<double, double> counterexample_probabilities(const MeasurementRule& rule,
                                                       const ExperimentConfig& cfg) {
  const int d = 5;
  const Matrix eye = Matrix::Identity(d, d);
  const Projector target = Projector::from_orthonormal_basis(eye.leftCols(1));

  std::vector<MeasurementBranch> coarse;
  coarse.push_back(MeasurementBranch{{0.0}, target});
  coarse.push_back(MeasurementBranch{{1.0}, Projector::from_orthonormal_basis(eye.rightCols(4))});
  const ProjectorDecomposition ctx_coarse(d, std::move(coarse));

  std::vector<MeasurementBranch> fine;
  fine.push_back(MeasurementBranch{{0.0}, target});
  for (int i = 1; i < d; ++i)
    fine.push_back(MeasurementBranch{{static_cast<double>(i)},
                                     Projector::from_orthonormal_basis(eye.middleCols(i, 1))});
  const ProjectorDecomposition ctx_fine(d, std::move(fine));

  const StateVector psi = uniform_state(d);
  return {distribution(psi, ctx_coarse, rule, cfg.threshold).probability(0),
          distribution(psi, ctx_fine, rule, cfg.threshold).probability(0)};
}

}  // namespace

ExperimentReport noncontextuality_audit(const MeasurementRule& rule,
                                        const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "noncontextuality" : cfg.name;

  const ContextSweepResult sweep = sweep_contexts(rule, cfg);
  const auto [p_coarse, p_fine] = counterexample_probabilities(rule, cfg);
  const double max_dev = std::max(sweep.max_deviation, std::abs(p_coarse - p_fine));

  report.add_scalar("max-context-deviation", max_dev);
  report.add_scalar("counterexample-coarse-context-probability", p_coarse);
  report.add_scalar("counterexample-fine-context-probability", p_fine);
  report.add_scalar("context-count", static_cast<double>(cfg.context_count));

  const bool independent = max_dev <= kContextIndependenceTol;
  std::string detail = "rule " + rule.name() + ": max probability shift " + fmt(max_dev) +
                       " across completions of the same projector";
  if (!independent && !sweep.worst_description.empty())
    detail += "; worst case: " + sweep.worst_description;
  report.add_verdict("probability-context-independent", independent, max_dev, detail);
  return report;
}

namespace {

ExperimentReport noncontextuality_suite(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "noncontextuality" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kNoncontextuality);

  for (const auto& rule : rules) {
    const ExperimentReport audit = noncontextuality_audit(rule, cfg);
    const double dev = audit.scalar("max-context-deviation");
    const double p_coarse = audit.scalar("counterexample-coarse-context-probability");
    const double p_fine = audit.scalar("counterexample-fine-context-probability");
    report.add_scalar(rule.name() + ":max-context-deviation", dev);
    report.add_scalar(rule.name() + ":counterexample-coarse-context-probability", p_coarse);
    report.add_scalar(rule.name() + ":counterexample-fine-context-probability", p_fine);

    if (rule.kind() == RuleKind::kBorn) {
      report.add_verdict("born-noncontextual", dev <= kContextIndependenceTol, dev,
                         "probability of a fixed projector never moved with the context, max "
                         "shift " + fmt(dev));
    } else {
      const bool dependent = dev > kDetectableGap;
      report.add_verdict(
          rule.name() + "-contextual", dependent, dependent ? 0.0 : dev,
          "same projector, different completions: probability " + fmt(p_coarse) +
              " against one coarse block vs " + fmt(p_fine) + " against singletons");
      if (dependent)
        report.add_note(rule.name() + " counterexample: " +
                        audit.verdict("probability-context-independent").detail);
    }
  }
  return report;
}

}  // namespace

// ----------------------------- decorrelation -----------------------------

ExperimentReport decorrelation_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "decorrelation" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kDecorrelation);

  const bool stock = !cfg.state && !cfg.observables && !cfg.hamiltonian &&
                     std::abs(cfg.evolve_time - kPiOverSix) < 1e-15;
  const ObservableSet obs = cfg.observables ? *cfg.observables : ObservableSet({pauli_z()});
  const HermitianOperator ham = cfg.hamiltonian ? *cfg.hamiltonian : pauli_x();
  const StateVector psi0 = cfg.state ? *cfg.state : [] {
    Vector v(2);
    v << Complex(std::sqrt(0.9), 0.0), Complex(std::sqrt(0.1), 0.0);
    return StateVector(std::move(v));
  }();

  const ProjectorDecomposition dec = joint_decomposition(obs, cfg.tol_cluster);
  const int n = dec.branch_count();

  double max_comm = 0.0;
  for (const auto& op : obs.operators())
    max_comm = std::max(max_comm, commutator_norm(op, ham));
  const bool commuting = max_comm <= kCommuteTol;

  // The decorrelation claim concerns generic evolved states: every
  // post-measurement state must keep all branches on the support after
  // the time lapse. Fine-tuned times can zero a projection, and then the
  // claim is simply out of scope.
  bool generic = true;
  {
    const SupportCount sc0 = support_count(psi0, dec, cfg.threshold);
    for (int i = 0; i < n && generic; ++i) {
      if (!sc0.on_support[i]) continue;
      const StateVector post =
          evolve(collapse(psi0, dec, i, cfg.threshold), ham, cfg.evolve_time);
      generic = support_count(post, dec, cfg.threshold).n == n;
    }
  }

  // Measure, evolve, measure: joint outcome table per rule. A first
  // outcome off the support contributes nothing (its row stays zero).
  auto joint_table = [&](const MeasurementRule& rule, const HermitianOperator& h) {
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(n, n);
    const OutcomeDistribution first = distribution(psi0, dec, rule, cfg.threshold);
    const SupportCount sc = support_count(psi0, dec, cfg.threshold);
    for (int i = 0; i < n; ++i) {
      if (!sc.on_support[i]) continue;
      const StateVector evolved = evolve(collapse(psi0, dec, i, cfg.threshold), h, cfg.evolve_time);
      const OutcomeDistribution second = distribution(evolved, dec, rule, cfg.threshold);
      for (int j = 0; j < n; ++j) table(i, j) = first.probability(i) * second.probability(j);
    }
    return table;
  };

  double worst_commuting_dev = 0.0;
  double es_mi = 0.0;
  double born_mi = 0.0;
  double born_p_same = 0.0;
  double es_uniform_dev = 0.0;
  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(rules.size());
  for (const auto& rule : rules) {
    const Eigen::MatrixXd table = joint_table(rule, ham);
    tables.push_back(table);
    const double p_same = table.trace();
    const double mi = mutual_information(table);
    const std::string& name = rule.name();
    report.add_scalar(name + ":p-same", p_same);
    report.add_scalar(name + ":mutual-information", mi);
    if (n == 2) {
      report.add_scalar(name + ":joint-00", table(0, 0));
      report.add_scalar(name + ":joint-01", table(0, 1));
      report.add_scalar(name + ":joint-10", table(1, 0));
      report.add_scalar(name + ":joint-11", table(1, 1));
    }

    // The control: evolve under the measured observable itself, which
    // commutes with every branch projector, so the outcome must repeat.
    const double p_same_comm = joint_table(rule, obs[0]).trace();
    report.add_scalar(name + ":commuting-p-same", p_same_comm);
    worst_commuting_dev = std::max(worst_commuting_dev, std::abs(p_same_comm - 1.0));
    // A commuting main Hamiltonian is held to the same bar.
    if (commuting) worst_commuting_dev = std::max(worst_commuting_dev, std::abs(p_same - 1.0));

    if (rule.kind() == RuleKind::kEqualSupport) {
      es_mi = mi;
      es_uniform_dev =
          (table.array() - 1.0 / static_cast<double>(n * n)).abs().maxCoeff();
    }
    if (rule.kind() == RuleKind::kBorn) {
      born_mi = mi;
      born_p_same = p_same;
    }
  }

  report.add_scalar("hamiltonian-commutes", commuting ? 1.0 : 0.0);
  report.add_scalar("evolved-states-generic", generic ? 1.0 : 0.0);
  report.add_verdict("commuting-evolution-repeats-outcome", worst_commuting_dev <= 1e-10,
                     worst_commuting_dev,
                     "with the Hamiltonian equal to the measured observable, the repeat "
                     "probability stays 1 under every rule, deviation " +
                         fmt(worst_commuting_dev));
  if (has_rule(rules, RuleKind::kEqualSupport)) {
    if (commuting) {
      report.add_note(
          "equal-support mutual information not graded: the Hamiltonian commutes "
          "with the observables, so outcomes repeat and stay correlated");
    } else if (!generic) {
      report.add_note(
          "equal-support mutual information not graded: non-generic evolved "
          "states (a fine-tuned time lapse zeroed a projection)");
    } else {
      report.add_verdict("equal-support-mutual-information-vanishes", es_mi <= 1e-9, es_mi,
                         "the first outcome tells nothing about the second: mutual information " +
                             fmt(es_mi) + " nats");
    }
  }
  if (stock && has_rule(rules, RuleKind::kBorn)) {
    const double dev = std::abs(born_p_same - 0.75);
    report.add_verdict("born-same-outcome-rate-three-quarters", dev <= 1e-10, dev,
                       "spin remeasured after a pi/6 transverse rotation repeats with "
                       "probability 0.75, deviation " + fmt(dev));
    report.add_verdict("born-retains-correlation", born_mi > kDetectableGap,
                       born_mi > kDetectableGap ? 0.0 : born_mi,
                       "mutual information " + fmt(born_mi) + " nats under the born rule");
  }
  if (stock && has_rule(rules, RuleKind::kEqualSupport)) {
    report.add_verdict("equal-support-joint-uniform", es_uniform_dev <= 1e-10, es_uniform_dev,
                       "all four outcome pairs land at probability 1/4, deviation " +
                           fmt(es_uniform_dev));
  }

  if (cfg.trials > 0) {
    RandomStream rng = RandomStream(cfg.seed).substream(0x80);
    double worst_sigma = 0.0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      // Post-measurement evolution is deterministic per branch, so the
      // evolved states can be prepared once.
      const SupportCount sc = support_count(psi0, dec, cfg.threshold);
      std::vector<std::optional<StateVector>> evolved(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        if (sc.on_support[i])
          evolved[static_cast<std::size_t>(i)] =
              evolve(collapse(psi0, dec, i, cfg.threshold), ham, cfg.evolve_time);

      RandomStream sim_rng = rng.substream(0x200 + r);
      EmpiricalHistogram hist(n * n);
      for (std::int64_t t = 0; t < cfg.trials; ++t) {
        const SampledOutcome first = sample_outcome(psi0, dec, rules[r], cfg.threshold, sim_rng);
        const SampledOutcome second =
            sample_outcome(*evolved[static_cast<std::size_t>(first.branch_index)], dec, rules[r],
                           cfg.threshold, sim_rng);
        hist.record(first.branch_index * n + second.branch_index);
      }

      double observed_same = 0.0;
      for (int i = 0; i < n; ++i) observed_same += hist.frequency(i * n + i);
      const double expected_same = tables[r].trace();
      const double same_sigma = frequency_sigma(observed_same, expected_same, cfg.trials);
      worst_sigma = std::max(worst_sigma, same_sigma);
      report.empirical.push_back(
          EmpiricalEntry{rules[r].name() + ":p-same", observed_same, expected_same, same_sigma});

      std::vector<OutcomeProbability> flat;
      flat.reserve(static_cast<std::size_t>(n * n));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          std::vector<double> labels = dec.branch(i).labels;
          const auto& second_labels = dec.branch(j).labels;
          labels.insert(labels.end(), second_labels.begin(), second_labels.end());
          flat.push_back(OutcomeProbability{std::move(labels), tables[r](i, j)});
        }
      }
      const OutcomeDistribution joint_dist(std::move(flat));
      worst_sigma = std::max(worst_sigma, worst_bin_sigma(hist, joint_dist, cfg.trials));
      record_gof_diagnostic(report, rules[r].name() + ":joint", hist, joint_dist, cfg.trials);
    }
    report.add_verdict("sampled-frequencies-match-analytic", sigma_status(worst_sigma),
                       worst_sigma,
                       "worst joint-cell frequency deviation " + fmt(worst_sigma) +
                           " sigma over " + fmt(cfg.trials) + " trials");
  }
  return report;
}

// ----------------------------- perturbation -----------------------------

ExperimentReport perturbation_discontinuity(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "perturbation" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kPerturbation);

  const ObservableSet obs =
      cfg.observables ? *cfg.observables : ObservableSet({fine_pattern(cfg.dim)});
  const int d = obs.dim();
  if (d < 2)
    throw std::invalid_argument("perturbation_discontinuity: dimension must be at least 2");
  const ProjectorDecomposition dec = joint_decomposition(obs, cfg.tol_cluster);
  if (dec.branch_count() < 2)
    throw std::invalid_argument(
        "perturbation_discontinuity: the measurement must resolve at least two branches");

  const double tau = cfg.threshold.tau;
  const double band_lo = std::sqrt(tau) / 10.0;
  const double band_hi = std::sqrt(tau) * 10.0;
  report.add_scalar("threshold-tau", tau);

  // The anchor state lives in branch 0; each epsilon leaks amplitude into
  // branch 1. Squared leakage eps^2 against tau decides the support.
  const StateVector anchor = basis_state(d, 0);
  const Vector leak_dir = basis_state(d, 1).amps();

  double es_dev = 0.0;
  double born_dev = 0.0;
  bool any_in_band = false;
  double nearest_band_eps = 0.0;
  for (double eps : cfg.epsilons) {
    if (!std::isfinite(eps) || eps < 0.0)
      throw std::invalid_argument("perturbation_discontinuity: epsilons must be finite and >= 0");
    const StateVector psi =
        eps == 0.0 ? anchor : StateVector::normalized(anchor.amps() + eps * leak_dir);
    const bool in_band = eps >= band_lo && eps <= band_hi;
    if (in_band) {
      any_in_band = true;
      nearest_band_eps = eps;
    }
    const double w_leak = eps * eps / (1.0 + eps * eps);

    for (const auto& rule : rules) {
      const OutcomeDistribution dist = distribution(psi, dec, rule, cfg.threshold);
      const double p_leak = dist.probability(1);
      report.add_scalar(rule.name() + ":leaked-branch-probability(eps=" + fmt(eps) + ")", p_leak);
      if (in_band) continue;  // expectations are undefined astride the threshold
      if (rule.kind() == RuleKind::kEqualSupport) {
        const double expected = eps * eps > tau ? 0.5 : 0.0;
        es_dev = std::max(es_dev, std::abs(p_leak - expected));
      }
      if (rule.kind() == RuleKind::kBorn) {
        born_dev = std::max(born_dev, std::abs(p_leak - w_leak));
      }
    }
  }

  if (has_rule(rules, RuleKind::kEqualSupport)) {
    report.add_verdict("equal-support-jumps-at-support-threshold", es_dev <= 1e-12, es_dev,
                       "an arbitrarily small admixture above the support threshold moves the "
                       "probability from 0 to 1/2; max deviation from the step prediction " +
                           fmt(es_dev));
  }
  if (has_rule(rules, RuleKind::kBorn)) {
    report.add_verdict("born-probability-tracks-squared-amplitude", born_dev <= 1e-12, born_dev,
                       "probability follows eps^2/(1+eps^2) with max deviation " + fmt(born_dev));
  }
  report.add_verdict("epsilon-grid-clear-of-threshold-band",
                     any_in_band ? VerdictStatus::kFlag : VerdictStatus::kPass,
                     any_in_band ? nearest_band_eps : 0.0,
                     any_in_band
                         ? "an epsilon lies within [sqrt(tau)/10, 10*sqrt(tau)] where support "
                           "classification is numerically fragile"
                         : "all epsilons sit well clear of the support threshold");
  if (cfg.trials > 0)
    report.add_note("sampling skipped: the step is an analytic property and the leaked "
                    "probabilities are far below sampling resolution");
  return report;
}

// -------------------------------- payoff --------------------------------

ExperimentReport payoff_equivalence(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "payoff" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kPayoff);

  const ObservableSet fine_set =
      cfg.observables ? *cfg.observables : ObservableSet({fine_pattern(cfg.dim)});
  const int d = fine_set.dim();
  const PayoffMap payoff = cfg.payoff ? *cfg.payoff : default_payoff();
  const StateVector psi = cfg.state ? *cfg.state : uniform_state(d);
  const bool stock = !cfg.payoff && !cfg.state && !cfg.observables && cfg.dim == 5;

  const ProjectorDecomposition dec_fine = joint_decomposition(fine_set, cfg.tol_cluster);

  // The coarse route measures f applied to the observable: the operator
  // with value f(y) on the eigenspace of y. Equal payoffs merge branches.
  auto coarsened = [&](const PayoffMap& f) {
    Matrix z = Matrix::Zero(d, d);
    for (const auto& branch : dec_fine.branches())
      z += f.payoff_for(branch.labels[0]) * branch.projector.matrix();
    return ObservableSet({HermitianOperator(0.5 * (z + z.adjoint()))});
  };
  const ProjectorDecomposition dec_coarse =
      joint_decomposition(coarsened(payoff), cfg.tol_cluster);

  auto fine_expectation = [&](const MeasurementRule& rule, const PayoffMap& f) {
    const OutcomeDistribution dist = distribution(psi, dec_fine, rule, cfg.threshold);
    double e = 0.0;
    for (int i = 0; i < dist.size(); ++i)
      e += dist.probability(i) * f.payoff_for(dist.labels(i)[0]);
    return e;
  };
  auto coarse_expectation = [&](const MeasurementRule& rule, const ProjectorDecomposition& dec) {
    const OutcomeDistribution dist = distribution(psi, dec, rule, cfg.threshold);
    double e = 0.0;
    for (int i = 0; i < dist.size(); ++i) e += dist.probability(i) * dist.labels(i)[0];
    return e;
  };

  // Control: an injective relabeling merges nothing, so the two routes
  // must agree under every rule.
  std::vector<std::pair<double, double>> injective_entries;
  for (const auto& branch : dec_fine.branches())
    injective_entries.push_back({branch.labels[0], 10.0 * branch.labels[0]});
  const PayoffMap injective_payoff(std::move(injective_entries));
  const ProjectorDecomposition dec_injective =
      joint_decomposition(coarsened(injective_payoff), cfg.tol_cluster);

  double born_diff = 0.0;
  double es_diff = 0.0;
  double es_fine = 0.0, es_coarse = 0.0;
  double injective_dev = 0.0;
  std::vector<double> fine_exps(rules.size());
  std::vector<double> coarse_exps(rules.size());
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const double e_fine = fine_expectation(rules[r], payoff);
    const double e_coarse = coarse_expectation(rules[r], dec_coarse);
    fine_exps[r] = e_fine;
    coarse_exps[r] = e_coarse;
    const std::string& name = rules[r].name();
    report.add_scalar(name + ":fine-route-expectation", e_fine);
    report.add_scalar(name + ":coarse-route-expectation", e_coarse);
    report.add_scalar(name + ":route-difference", e_fine - e_coarse);

    const double e_fine_inj = fine_expectation(rules[r], injective_payoff);
    const double e_coarse_inj = coarse_expectation(rules[r], dec_injective);
    injective_dev = std::max(injective_dev, std::abs(e_fine_inj - e_coarse_inj));

    if (rules[r].kind() == RuleKind::kBorn) born_diff = std::abs(e_fine - e_coarse);
    if (rules[r].kind() == RuleKind::kEqualSupport) {
      es_diff = std::abs(e_fine - e_coarse);
      es_fine = e_fine;
      es_coarse = e_coarse;
    }
  }

  if (has_rule(rules, RuleKind::kBorn)) {
    report.add_verdict("born-payoff-routes-agree", born_diff <= 1e-10, born_diff,
                       "paying on the fine outcome equals measuring the coarsened payoff "
                       "observable, difference " + fmt(born_diff));
  }
  if (has_rule(rules, RuleKind::kEqualSupport) && !payoff.injective()) {
    report.add_verdict("equal-support-payoff-routes-differ", es_diff > kDetectableGap,
                       es_diff > kDetectableGap ? 0.0 : es_diff,
                       "expected payoff " + fmt(es_fine) + " when paying on the fine outcome vs " +
                           fmt(es_coarse) + " when measuring the merged payoff observable");
    if (stock) {
      const double dev = std::abs(es_diff - 3.0);
      report.add_verdict("equal-support-route-difference-matches-branch-counting", dev <= 1e-10,
                         dev,
                         "18 across five equal branches vs 15 across two, difference 3 within "
                         "1e-10");
    }
  }
  report.add_verdict("injective-payoff-routes-agree", injective_dev <= 1e-10, injective_dev,
                     "with no merged payoffs the two routes agree under every rule, max "
                     "difference " + fmt(injective_dev));

  if (cfg.trials > 0) {
    RandomStream rng = RandomStream(cfg.seed).substream(0x90);
    double worst_sigma = 0.0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (int route = 0; route < 2; ++route) {
        const ProjectorDecomposition& dec = route == 0 ? dec_fine : dec_coarse;
        RandomStream sim_rng = rng.substream(0x300 + 2 * r + static_cast<std::uint64_t>(route));
        double sum = 0.0, sum_sq = 0.0;
        for (std::int64_t t = 0; t < cfg.trials; ++t) {
          const SampledOutcome s = sample_outcome(psi, dec, rules[r], cfg.threshold, sim_rng);
          const double value = route == 0
                                   ? payoff.payoff_for(dec.branch(s.branch_index).labels[0])
                                   : dec.branch(s.branch_index).labels[0];
          sum += value;
          sum_sq += value * value;
        }
        const double trials = static_cast<double>(cfg.trials);
        const double mean = sum / trials;
        const double var = std::max(0.0, sum_sq / trials - mean * mean);
        const double se = std::sqrt(var / trials);
        const double expected = route == 0 ? fine_exps[r] : coarse_exps[r];
        const double diff = std::abs(mean - expected);
        const double sigma = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : 1e9);
        worst_sigma = std::max(worst_sigma, sigma);
        report.empirical.push_back(EmpiricalEntry{
            rules[r].name() + (route == 0 ? ":fine-route-expectation" : ":coarse-route-expectation"),
            mean, expected, sigma});
      }
    }
    report.add_verdict("sampled-payoffs-match-analytic", sigma_status(worst_sigma), worst_sigma,
                       "worst sample-mean deviation " + fmt(worst_sigma) + " standard errors over " +
                           fmt(cfg.trials) + " trials per route");
  }
  return report;
}

// ------------------------------ branch tree ------------------------------

namespace {

struct ScheduleLayout {
  std::vector<std::vector<EvolveStep>> pre;  // evolve steps before measure m
  std::vector<ProjectorDecomposition> decs;  // one per measure step
  std::vector<EvolveStep> tail;              // evolve steps after the last measure
};

ScheduleLayout layout_schedule(const std::vector<ScheduleStep>& schedule, double tol_cluster) {
  ScheduleLayout lay;
  std::vector<EvolveStep> pending;
  for (const auto& step : schedule) {
    if (const auto* ev = std::get_if<EvolveStep>(&step)) {
      pending.push_back(*ev);
    } else {
      const auto& m = std::get<MeasureStep>(step);
      lay.pre.push_back(std::move(pending));
      pending.clear();
      lay.decs.push_back(joint_decomposition(m.observables, tol_cluster));
    }
  }
  lay.tail = std::move(pending);
  if (static_cast<int>(lay.decs.size()) > kMaxScheduleDepth) {
    std::ostringstream msg;
    msg << "branch_tree: " << lay.decs.size() << " measurements exceed the depth cap "
        << kMaxScheduleDepth;
    throw LeafBudgetError(msg.str());
  }
  return lay;
}

StateVector apply_evolves(StateVector state, const std::vector<EvolveStep>& steps) {
  for (const auto& step : steps) state = evolve(state, step.hamiltonian, step.time);
  return state;
}

std::vector<ScheduleStep> default_schedule() {
  std::vector<ScheduleStep> schedule;
  schedule.push_back(MeasureStep{ObservableSet({pauli_z()})});
  schedule.push_back(EvolveStep{pauli_x(), kPiOverSix});
  schedule.push_back(MeasureStep{ObservableSet({pauli_z()})});
  return schedule;
}

void expand_tree(BranchNode& node, std::size_t m, const ScheduleLayout& lay,
                 const MeasurementRule& rule, const SupportThreshold& thr,
                 std::int64_t& leaves) {
  if (m == lay.decs.size()) {
    leaves += 1;
    if (leaves > kMaxLeaves) {
      std::ostringstream msg;
      msg << "branch_tree: leaf count exceeds the cap " << kMaxLeaves;
      throw LeafBudgetError(msg.str());
    }
    return;
  }
  const ProjectorDecomposition& dec = lay.decs[m];
  const OutcomeDistribution dist = distribution(node.state, dec, rule, thr);
  const SupportCount sc = support_count(node.state, dec, thr);
  const auto& next_evolves = m + 1 < lay.decs.size() ? lay.pre[m + 1] : lay.tail;
  for (int i = 0; i < dec.branch_count(); ++i) {
    if (!sc.on_support[i]) continue;
    node.children.push_back(
        BranchNode{node.depth + 1, dec.branch(i).labels, node.weight * dist.probability(i),
                   apply_evolves(collapse(node.state, dec, i, thr), next_evolves),
                   {}});
  }
  for (auto& child : node.children) expand_tree(child, m + 1, lay, rule, thr, leaves);
}

void collect_leaves(const BranchNode& node, std::vector<const BranchNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& child : node.children) collect_leaves(child, out);
}

double max_sibling_spread(const BranchNode& node) {
  double spread = 0.0;
  if (!node.children.empty()) {
    double lo = node.children.front().weight, hi = lo;
    for (const auto& child : node.children) {
      lo = std::min(lo, child.weight);
      hi = std::max(hi, child.weight);
    }
    spread = hi - lo;
  }
  for (const auto& child : node.children) spread = std::max(spread, max_sibling_spread(child));
  return spread;
}

// One sampled history down the tree. The walk recomputes each node's
// distribution, so it draws exactly what the analytic weights promise.
const BranchNode* sample_leaf(const BranchNode& node, std::size_t m, const ScheduleLayout& lay,
                              const MeasurementRule& rule, const SupportThreshold& thr,
                              RandomStream& rng) {
  if (m == lay.decs.size()) return &node;
  const ProjectorDecomposition& dec = lay.decs[m];
  const OutcomeDistribution dist = distribution(node.state, dec, rule, thr);
  const SupportCount sc = support_count(node.state, dec, thr);
  const double u = rng.uniform01();
  double cum = 0.0;
  int slot = -1;
  for (int i = 0; i < dec.branch_count(); ++i) {
    if (!sc.on_support[i]) continue;
    slot += 1;
    cum += dist.probability(i);
    if (u < cum) break;
  }
  return sample_leaf(node.children[static_cast<std::size_t>(slot)], m + 1, lay, rule, thr, rng);
}

}  // namespace

BranchNode branch_tree(const ExperimentConfig& cfg, const MeasurementRule& rule) {
  const std::vector<ScheduleStep> schedule =
      cfg.schedule.empty() ? default_schedule() : cfg.schedule;
  const ScheduleLayout lay = layout_schedule(schedule, cfg.tol_cluster);
  const StateVector psi0 = cfg.state ? *cfg.state : uniform_state(2);

  BranchNode root{0, {}, 1.0,
                  apply_evolves(psi0, lay.decs.empty() ? lay.tail : lay.pre[0]), {}};
  std::int64_t leaves = 0;
  expand_tree(root, 0, lay, rule, cfg.threshold, leaves);
  return root;
}

ExperimentReport branch_tree_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = cfg.name.empty() ? "branch-tree" : cfg.name;
  const auto rules = rules_for(cfg, ExperimentKind::kBranchTree);
  const bool stock = cfg.schedule.empty() && !cfg.state;

  double worst_total_dev = 0.0;
  double es_sibling_spread = 0.0;
  double born_stock_dev = 0.0;
  double es_stock_dev = 0.0;
  std::vector<BranchNode> trees;
  trees.reserve(rules.size());
  for (const auto& rule : rules) {
    trees.push_back(branch_tree(cfg, rule));
    const BranchNode& tree = trees.back();
    std::vector<const BranchNode*> leaves;
    collect_leaves(tree, leaves);
    double total = 0.0;
    for (const auto* leaf : leaves) total += leaf->weight;
    worst_total_dev = std::max(worst_total_dev, std::abs(total - 1.0));

    const std::string& name = rule.name();
    report.add_scalar(name + ":leaf-count", static_cast<double>(leaves.size()));
    report.add_scalar(name + ":leaf-weight-total", total);
    if (leaves.size() <= 16) {
      for (std::size_t j = 0; j < leaves.size(); ++j)
        report.add_scalar(name + ":leaf-weight[" + fmt(static_cast<double>(j)) + "]",
                          leaves[j]->weight);
    }

    if (rule.kind() == RuleKind::kEqualSupport) {
      es_sibling_spread = max_sibling_spread(tree);
      if (stock) {
        for (const auto* leaf : leaves)
          es_stock_dev = std::max(es_stock_dev, std::abs(leaf->weight - 0.25));
      }
    }
    if (rule.kind() == RuleKind::kBorn && stock) {
      const double expected[4] = {0.375, 0.125, 0.125, 0.375};
      for (std::size_t j = 0; j < leaves.size() && j < 4; ++j)
        born_stock_dev = std::max(born_stock_dev, std::abs(leaves[j]->weight - expected[j]));
      if (leaves.size() != 4) born_stock_dev = 1.0;
    }
  }

  report.add_verdict("leaf-weights-sum-to-one", worst_total_dev <= 1e-9, worst_total_dev,
                     "every rule's history weights total 1, max deviation " +
                         fmt(worst_total_dev));
  if (has_rule(rules, RuleKind::kEqualSupport)) {
    report.add_verdict("equal-support-sibling-weights-equal", es_sibling_spread <= 1e-12,
                       es_sibling_spread,
                       "all branches from one node carry the same weight, max spread " +
                           fmt(es_sibling_spread));
  }
  if (stock && has_rule(rules, RuleKind::kBorn)) {
    report.add_verdict("born-leaf-weights-match-prediction", born_stock_dev <= 1e-10,
                       born_stock_dev,
                       "two spin measurements around a pi/6 rotation weight the four histories "
                       "{0.375, 0.125, 0.125, 0.375}, deviation " + fmt(born_stock_dev));
  }
  if (stock && has_rule(rules, RuleKind::kEqualSupport)) {
    report.add_verdict("equal-support-leaf-weights-uniform", es_stock_dev <= 1e-10, es_stock_dev,
                       "four equally weighted histories at 1/4 each, deviation " +
                           fmt(es_stock_dev));
  }

  if (cfg.trials > 0) {
    const std::vector<ScheduleStep> schedule =
        cfg.schedule.empty() ? default_schedule() : cfg.schedule;
    const ScheduleLayout lay = layout_schedule(schedule, cfg.tol_cluster);
    RandomStream rng = RandomStream(cfg.seed).substream(0xA0);
    double worst_sigma = 0.0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const BranchNode& tree = trees[r];
      std::vector<const BranchNode*> leaves;
      collect_leaves(tree, leaves);

      RandomStream sim_rng = rng.substream(0x400 + r);
      EmpiricalHistogram hist(static_cast<int>(leaves.size()));
      for (std::int64_t t = 0; t < cfg.trials; ++t) {
        const BranchNode* leaf = sample_leaf(tree, 0, lay, rules[r], cfg.threshold, sim_rng);
        const auto it = std::find(leaves.begin(), leaves.end(), leaf);
        hist.record(static_cast<int>(it - leaves.begin()));
      }

      std::vector<OutcomeProbability> expected;
      expected.reserve(leaves.size());
      for (std::size_t j = 0; j < leaves.size(); ++j) {
        // Flattened history labels are unique per leaf, which is all the
        // distribution container needs.
        std::vector<double> labels;
        labels.push_back(static_cast<double>(j));
        expected.push_back(OutcomeProbability{std::move(labels), leaves[j]->weight});
      }
      const OutcomeDistribution leaf_dist(std::move(expected));

      worst_sigma = std::max(worst_sigma, worst_bin_sigma(hist, leaf_dist, cfg.trials));
      report.empirical.push_back(EmpiricalEntry{
          rules[r].name() + ":first-leaf-frequency", hist.frequency(0), leaves[0]->weight,
          frequency_sigma(hist.frequency(0), leaves[0]->weight, cfg.trials)});
      record_gof_diagnostic(report, rules[r].name() + ":leaves", hist, leaf_dist, cfg.trials);
    }
    report.add_verdict("sampled-leaf-frequencies-match-analytic", sigma_status(worst_sigma),
                       worst_sigma,
                       "worst leaf-frequency deviation " + fmt(worst_sigma) + " sigma over " +
                           fmt(cfg.trials) + " sampled histories");
  }
  return report;
}

// ------------------------------- dispatch -------------------------------

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (c.name.empty()) c.name = to_string(kind);
  switch (kind) {
    case ExperimentKind::kInvariance:
      return invariance_audit(c);
    case ExperimentKind::kEquivalence:
      if (c.observables && c.observables_b)
        return equivalence_audit(*c.observables, *c.observables_b, c);
      return equivalence_suite(c);
    case ExperimentKind::kContextuality:
      return contextuality_demo(c);
    case ExperimentKind::kNoncontextuality:
      return noncontextuality_suite(c);
    case ExperimentKind::kDecorrelation:
      return decorrelation_experiment(c);
    case ExperimentKind::kPerturbation:
      return perturbation_discontinuity(c);
    case ExperimentKind::kPayoff:
      return payoff_equivalence(c);
    case ExperimentKind::kBranchTree:
      return branch_tree_experiment(c);
  }
  throw std::invalid_argument("run_experiment: unknown experiment kind");
}

}  // namespace postlab
