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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "postlab/errors.hpp"
#include "postlab/random.hpp"

namespace postlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class RandomStream;
class ProjectorDecomposition;

// ----------------------------- tolerances -----------------------------
//
// All dense algebra is double precision; these constants pin down what
// "equal" means for each stored invariant. They are absolute.

inline constexpr int kMaxDim = 4096;            // dense algebra stays tractable
inline constexpr double kNormTol = 1e-10;       // squared-norm slack of a state
inline constexpr double kHermTol = 1e-10;       // per-entry Hermiticity slack
inline constexpr double kUnitaryTol = 1e-9;     // max-entry slack of U U^dag - I
inline constexpr double kCommuteTol = 1e-9;     // max-entry slack of [A, B]
inline constexpr double kProjectorTol = 1e-9;   // idempotence / integer-trace slack
inline constexpr double kFamilyTol = 1e-8;      // completeness of a projector family
inline constexpr double kDefaultClusterTol = 1e-8;  // eigenvalue clustering, relative

/// Largest entry magnitude of a matrix; 0 for an empty matrix.
double max_abs(const Matrix& m);

// ----------------------------- core types -----------------------------

/// Unit-norm vector in a d-dimensional complex Hilbert space.
///
/// The constructor rejects vectors whose squared norm strays from 1 by
/// more than kNormTol and vectors with non-finite entries. Immutable.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  /// Rescales an arbitrary nonzero vector to unit norm first.
  static StateVector normalized(Vector amplitudes);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amps() const { return amps_; }

  /// |<this|other>|, the overlap modulus. Global phase drops out.
  double overlap_with(const StateVector& other) const;

 private:
  Vector amps_;
};

/// Self-adjoint operator on a d-dimensional space.
/// Entries must satisfy a(i,j) == conj(a(j,i)) within kHermTol.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries);

  /// Operator with the given real diagonal in the computational basis.
  static HermitianOperator diagonal(const std::vector<double>& values);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }

 private:
  Matrix entries_;
};

/// Operator with U U^dag = I within kUnitaryTol in max-entry norm.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix entries);

  static UnitaryOperator identity(int dim);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }

 private:
  Matrix entries_;
};

/// Finite list of mutually commuting Hermitian operators on one space.
/// Pairwise commutators must vanish within kCommuteTol.
class ObservableSet {
 public:
  explicit ObservableSet(std::vector<HermitianOperator> operators);

  int dim() const;
  int size() const { return static_cast<int>(operators_.size()); }
  const std::vector<HermitianOperator>& operators() const { return operators_; }
  const HermitianOperator& operator[](int k) const { return operators_[k]; }

 private:
  std::vector<HermitianOperator> operators_;
};

/// Orthogonal projector: Hermitian, idempotent within kProjectorTol, with
/// trace equal to a nonnegative integer (its rank) within kProjectorTol.
class Projector {
 public:
  explicit Projector(Matrix entries);

  /// Projector onto the span of the given orthonormal columns.
  static Projector from_orthonormal_basis(const Matrix& basis);

  int dim() const { return static_cast<int>(entries_.rows()); }
  int rank() const { return rank_; }
  const Matrix& matrix() const { return entries_; }

  /// P |psi>, unnormalized.
  Vector apply(const StateVector& state) const;

 private:
  Matrix entries_;
  int rank_;
};

// ----------------------------- operations -----------------------------

/// Max-entry absolute value of AB - BA. Zero iff the operators commute
/// exactly.
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

/// One eigenvalue cluster of a Hermitian operator: the representative
/// value and an orthonormal basis (as columns) of its eigenspace.
struct Eigenspace {
  double eigenvalue;
  Matrix basis;

  int multiplicity() const { return static_cast<int>(basis.cols()); }
};

/// Spectral decomposition with eigenvalue clustering.
///
/// Eigenvalues closer than the absolute tolerance
///     tol_cluster * max(spectral range, 1)
/// are chained into one eigenspace, in ascending order of eigenvalue.
/// If chaining produces a cluster whose total spread reaches the
/// tolerance (two eigenvalues straddling it), a ClusterAmbiguityError
/// is raised rather than merging silently. The direct sum of the
/// returned eigenspaces spans the whole space.
std::vector<Eigenspace> eigendecompose(const HermitianOperator& a,
                                       double tol_cluster = kDefaultClusterTol);

/// Complete orthogonal family of projectors onto the common eigenspaces
/// of a commuting set, each labeled with its tuple of eigenvalues (one
/// per operator, in set order).
///
/// Works by spectral recursion: decompose the first operator, then
/// restrict each subsequent operator to each eigenspace found so far and
/// decompose the restriction. Branches come out sorted lexicographically
/// by label tuple. Within one decomposition, equal label components are
/// equal as doubles (they share a cluster representative), so labels can
/// be grouped by exact comparison.
ProjectorDecomposition joint_decomposition(const ObservableSet& obs,
                                           double tol_cluster = kDefaultClusterTol);

/// exp(-i H t) |psi> via the spectral decomposition of H. Exact
/// unitarity matters more than speed at this scale; the result is
/// checked to preserve the norm within 1e-9 and then renormalized.
StateVector evolve(const StateVector& state, const HermitianOperator& h, double t);

/// Haar-style random unitary: a seeded complex Gaussian matrix is
/// orthonormalized by QR with the R-diagonal phases folded back in.
/// Deterministic per seed.
UnitaryOperator random_unitary(int dim, std::uint64_t seed);
UnitaryOperator random_unitary(int dim, RandomStream& rng);

/// Normalized state with independent complex Gaussian amplitudes.
StateVector random_state(int dim, RandomStream& rng);

/// Commuting operators sharing the eigenbasis given by the columns of
/// `basis`: operator k takes the value labels_per_op[k][j] on column j.
ObservableSet commuting_set_from_labels(const UnitaryOperator& basis,
                                        const std::vector<std::vector<double>>& labels_per_op);

// ------------------------- small constructions -------------------------

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

/// Computational-basis state |index>.
StateVector basis_state(int dim, int index);

/// (1/sqrt(d)) sum_i |i>.
StateVector uniform_state(int dim);

}  // namespace postlab
