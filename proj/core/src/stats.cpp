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

#include "postlab/stats.hpp"

#include <cmath>
#include <sstream>

#include "postlab/errors.hpp"

namespace postlab {

namespace {

// Chi-square critical values for tail probabilities 0.05 and 0.001,
// dof 1..64. Larger dof fall back to the Wilson-Hilferty cube
// approximation, which is accurate to ~1e-3 relative there.
constexpr int kCritTableSize = 64;

constexpr double kCrit05[kCritTableSize] = {
    3.841459,  5.991465,  7.814728,  9.487729,  11.070498, 12.591587, 14.067140, 15.507313,
    16.918978, 18.307038, 19.675138, 21.026070, 22.362032, 23.684791, 24.995790, 26.296228,
    27.587112, 28.869299, 30.143527, 31.410433, 32.670573, 33.924438, 35.172462, 36.415029,
    37.652484, 38.885139, 40.113272, 41.337138, 42.556968, 43.772972, 44.985343, 46.194260,
    47.399884, 48.602367, 49.801850, 50.998460, 52.192320, 53.383541, 54.572228, 55.758479,
    56.942387, 58.124038, 59.303512, 60.480887, 61.656233, 62.829620, 64.001112, 65.170769,
    66.338649, 67.504807, 68.669294, 69.832160, 70.993453, 72.153216, 73.311493, 74.468324,
    75.623748, 76.777803, 77.930524, 79.081944, 80.232098, 81.381015, 82.528727, 83.675261};

constexpr double kCrit001[kCritTableSize] = {
    10.827566,  13.815511,  16.266236,  18.466827,  20.515006,  22.457744,  24.321886,
    26.124482,  27.877165,  29.588298,  31.264134,  32.909490,  34.528179,  36.123274,
    37.697298,  39.252355,  40.790217,  42.312396,  43.820196,  45.314747,  46.797038,
    48.267942,  49.728232,  51.178598,  52.619656,  54.051962,  55.476020,  56.892285,
    58.301173,  59.703064,  61.098306,  62.487219,  63.870099,  65.247217,  66.618829,
    67.985168,  69.346452,  70.702887,  72.054663,  73.401958,  74.744938,  76.083763,
    77.418578,  78.749524,  80.076732,  81.400326,  82.720423,  84.037134,  85.350565,
    86.660815,  87.967980,  89.272151,  90.573412,  91.871847,  93.167533,  94.460545,
    95.750954,  97.038829,  98.324234,  99.607233,  100.887885, 102.166248, 103.442377,
    104.716325};

// Standard normal quantiles for the same two tail probabilities.
constexpr double kZ05 = 1.6448536269514722;
constexpr double kZ001 = 3.090232306167813;

double wilson_hilferty(int dof, double z) {
  const double c = 2.0 / (9.0 * dof);
  const double base = 1.0 - c + z * std::sqrt(c);
  return dof * base * base * base;
}

double critical_value(int dof, bool loose_tail) {
  if (dof <= kCritTableSize) return loose_tail ? kCrit05[dof - 1] : kCrit001[dof - 1];
  return wilson_hilferty(dof, loose_tail ? kZ05 : kZ001);
}

}  // namespace

EmpiricalHistogram::EmpiricalHistogram(int outcome_count) {
  if (outcome_count < 1)
    throw std::invalid_argument("EmpiricalHistogram: outcome count must be positive");
  counts_.assign(outcome_count, 0);
}

void EmpiricalHistogram::record(int outcome) {
  if (outcome < 0 || outcome >= outcome_count())
    throw std::invalid_argument("EmpiricalHistogram::record: outcome out of range");
  counts_[outcome] += 1;
  total_ += 1;
}

double EmpiricalHistogram::frequency(int outcome) const {
  if (outcome < 0 || outcome >= outcome_count())
    throw std::invalid_argument("EmpiricalHistogram::frequency: outcome out of range");
  if (total_ == 0)
    throw std::invalid_argument("EmpiricalHistogram::frequency: no trials recorded");
  return static_cast<double>(counts_[outcome]) / static_cast<double>(total_);
}

EmpiricalHistogram& EmpiricalHistogram::operator+=(const EmpiricalHistogram& other) {
  if (outcome_count() != other.outcome_count())
    throw std::invalid_argument("EmpiricalHistogram: cannot merge histograms of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

GofResult chi_square_gof(const EmpiricalHistogram& hist, const OutcomeDistribution& expected) {
  if (hist.outcome_count() != expected.size())
    throw std::invalid_argument("chi_square_gof: histogram and distribution sizes differ");
  if (hist.total() == 0)
    throw std::invalid_argument("chi_square_gof: no trials recorded");

  const double total = static_cast<double>(hist.total());
  double statistic = 0.0;
  int included = 0;
  for (int i = 0; i < expected.size(); ++i) {
    const double p = expected.probability(i);
    if (p == 0.0) {
      if (hist.count(i) != 0) {
        std::ostringstream msg;
        msg << "chi_square_gof: outcome " << i << " has expected probability 0 but was observed "
            << hist.count(i) << " times";
        throw InvariantViolationError(msg.str());
      }
      continue;
    }
    const double exp_count = p * total;
    if (exp_count < 5.0) {
      std::ostringstream msg;
      msg << "chi_square_gof: expected count " << exp_count << " for outcome " << i
          << " is below 5; raise the trial count";
      throw std::invalid_argument(msg.str());
    }
    const double diff = static_cast<double>(hist.count(i)) - exp_count;
    statistic += diff * diff / exp_count;
    included += 1;
  }

  GofResult out;
  out.statistic = statistic;
  out.dof = included - 1;
  if (out.dof <= 0) {
    out.band = GofBand::kConsistent;  // a single bin cannot disagree
    return out;
  }
  if (statistic < critical_value(out.dof, /*loose_tail=*/true))
    out.band = GofBand::kConsistent;
  else if (statistic < critical_value(out.dof, /*loose_tail=*/false))
    out.band = GofBand::kSuspect;
  else
    out.band = GofBand::kRejected;
  return out;
}

double mutual_information(const Eigen::MatrixXd& joint) {
  if (joint.rows() < 1 || joint.cols() < 1)
    throw std::invalid_argument("mutual_information: table must be nonempty");
  double total = 0.0;
  for (int i = 0; i < joint.rows(); ++i) {
    for (int j = 0; j < joint.cols(); ++j) {
      const double p = joint(i, j);
      if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("mutual_information: entries must be finite and >= 0");
      total += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "mutual_information: entries total " << total << ", expected 1";
    throw std::invalid_argument(msg.str());
  }

  const Eigen::VectorXd rows = joint.rowwise().sum();
  const Eigen::VectorXd cols = joint.colwise().sum();
  double mi = 0.0;
  for (int i = 0; i < joint.rows(); ++i) {
    for (int j = 0; j < joint.cols(); ++j) {
      const double p = joint(i, j);
      if (p > 0.0) mi += p * std::log(p / (rows(i) * cols(j)));
    }
  }
  return mi < 0.0 ? 0.0 : mi;  // roundoff can push an independent table below 0
}

double binomial_margin(double p, std::int64_t trials, double k_sigma) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw std::invalid_argument("binomial_margin: p must lie in [0, 1]");
  if (trials < 1) throw std::invalid_argument("binomial_margin: trials must be positive");
  if (!std::isfinite(k_sigma) || k_sigma <= 0.0)
    throw std::invalid_argument("binomial_margin: k_sigma must be positive");
  return k_sigma * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace postlab
