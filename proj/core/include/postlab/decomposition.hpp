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

#include <vector>

#include "postlab/hilbert.hpp"

namespace postlab {

/// One measurement outcome: the eigenvalue tuple (one entry per operator
/// of the originating set) and the projector onto its common eigenspace.
struct MeasurementBranch {
  std::vector<double> labels;
  Projector projector;
};

/// Complete orthogonal family of labeled projectors.
///
/// Construction validates completeness (sum of projectors equals the
/// identity within kFamilyTol in max-entry norm), pairwise orthogonality
/// (checked through the action on a deterministic probe vector), and
/// that label tuples are pairwise distinct.
class ProjectorDecomposition {
 public:
  ProjectorDecomposition(int dim, std::vector<MeasurementBranch> branches);

  int dim() const { return dim_; }
  /// N, the number of branches.
  int branch_count() const { return static_cast<int>(branches_.size()); }
  const std::vector<MeasurementBranch>& branches() const { return branches_; }
  const MeasurementBranch& branch(int i) const { return branches_[i]; }

  /// How many operators labeled each branch.
  int label_arity() const { return branches_.empty() ? 0 : static_cast<int>(branches_[0].labels.size()); }

  /// The decomposition {U P_i U^dag} with labels kept; this is the image
  /// of the measurement under the isomorphism psi -> U psi.
  ProjectorDecomposition transformed(const UnitaryOperator& u) const;

 private:
  int dim_;
  std::vector<MeasurementBranch> branches_;
};

}  // namespace postlab
