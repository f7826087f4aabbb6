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

#include "postlab/decomposition.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "postlab/random.hpp"

namespace postlab {

namespace {

// Fixed-seed probe vector, so validation is reproducible run to run.
Vector probe_vector(int dim) {
  RandomStream rng(0x70726f6265ull);  // arbitrary fixed seed
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

}  // namespace

ProjectorDecomposition::ProjectorDecomposition(int dim, std::vector<MeasurementBranch> branches)
    : dim_(dim), branches_(std::move(branches)) {
  if (dim_ < 1 || dim_ > kMaxDim)
    throw std::invalid_argument("ProjectorDecomposition: dimension out of range");
  if (branches_.empty())
    throw std::invalid_argument("ProjectorDecomposition: at least one branch is required");

  const std::size_t arity = branches_[0].labels.size();
  int rank_total = 0;
  for (const auto& b : branches_) {
    if (b.projector.dim() != dim_)
      throw DimensionMismatchError("ProjectorDecomposition: branch projector has wrong dimension");
    if (b.labels.size() != arity)
      throw std::invalid_argument("ProjectorDecomposition: branches have unequal label arity");
    rank_total += b.projector.rank();
  }

  for (std::size_t i = 0; i < branches_.size(); ++i) {
    for (std::size_t j = i + 1; j < branches_.size(); ++j) {
      if (branches_[i].labels == branches_[j].labels) {
        std::ostringstream msg;
        msg << "ProjectorDecomposition: branches " << i << " and " << j
            << " carry identical label tuples";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const auto& b : branches_) sum += b.projector.matrix();
  const double completeness_dev = max_abs(sum - Matrix::Identity(dim_, dim_));
  if (completeness_dev > kFamilyTol) {
    std::ostringstream msg;
    msg << "ProjectorDecomposition: projector sum deviates from the identity by "
        << completeness_dev;
    throw InvariantViolationError(msg.str());
  }
  if (rank_total != dim_) {
    std::ostringstream msg;
    msg << "ProjectorDecomposition: ranks total " << rank_total << ", expected " << dim_;
    throw InvariantViolationError(msg.str());
  }

  // Pairwise orthogonality, checked through the action on one probe
  // vector: |P_i P_j v| stays within the family tolerance.
  const Vector v = probe_vector(dim_);
  std::vector<Vector> projected;
  projected.reserve(branches_.size());
  for (const auto& b : branches_) projected.push_back(b.projector.matrix() * v);
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    for (std::size_t j = i + 1; j < branches_.size(); ++j) {
      const double dev = (branches_[i].projector.matrix() * projected[j]).norm();
      if (dev > kFamilyTol) {
        std::ostringstream msg;
        msg << "ProjectorDecomposition: branches " << i << " and " << j
            << " fail orthogonality on the probe vector by " << dev;
        throw InvariantViolationError(msg.str());
      }
    }
  }
}

ProjectorDecomposition ProjectorDecomposition::transformed(const UnitaryOperator& u) const {
  if (u.dim() != dim_)
    throw DimensionMismatchError("ProjectorDecomposition::transformed: dimensions differ");
  std::vector<MeasurementBranch> mapped;
  mapped.reserve(branches_.size());
  for (const auto& b : branches_) {
    Matrix m = u.matrix() * b.projector.matrix() * u.matrix().adjoint();
    m = 0.5 * (m + m.adjoint());
    mapped.push_back(MeasurementBranch{b.labels, Projector(std::move(m))});
  }
  return ProjectorDecomposition(dim_, std::move(mapped));
}

}  // namespace postlab
