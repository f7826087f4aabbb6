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

#include "postlab/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "postlab/decomposition.hpp"

namespace postlab {

namespace {

void check_dim_in_range(int dim, const char* who) {
  if (dim < 1) throw std::invalid_argument(std::string(who) + ": dimension must be positive");
  if (dim > kMaxDim) {
    std::ostringstream msg;
    msg << who << ": dimension " << dim << " exceeds the dense-algebra cap " << kMaxDim;
    throw std::invalid_argument(msg.str());
  }
}

void check_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << who << ": matrix must be square, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(msg.str());
  }
  check_dim_in_range(static_cast<int>(m.rows()), who);
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": entries must be finite");
}

Matrix hermitized(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// ----------------------------- StateVector -----------------------------

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  check_dim_in_range(static_cast<int>(amps_.size()), "StateVector");
  if (!amps_.allFinite())
    throw std::invalid_argument("StateVector: amplitudes must be finite");
  const double n2 = amps_.squaredNorm();
  if (std::abs(n2 - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "StateVector: squared norm " << n2 << " deviates from 1 by more than " << kNormTol;
    throw std::invalid_argument(msg.str());
  }
}

StateVector StateVector::normalized(Vector amplitudes) {
  check_dim_in_range(static_cast<int>(amplitudes.size()), "StateVector::normalized");
  if (!amplitudes.allFinite())
    throw std::invalid_argument("StateVector::normalized: amplitudes must be finite");
  const double norm = amplitudes.norm();
  if (norm <= 0.0)
    throw std::invalid_argument("StateVector::normalized: vector must be nonzero");
  return StateVector(amplitudes / norm);
}

double StateVector::overlap_with(const StateVector& other) const {
  if (dim() != other.dim())
    throw DimensionMismatchError("StateVector::overlap_with: dimensions differ");
  return std::abs(amps_.dot(other.amps_));
}

// -------------------------- HermitianOperator --------------------------

HermitianOperator::HermitianOperator(Matrix entries) : entries_(std::move(entries)) {
  check_square(entries_, "HermitianOperator");
  const double dev = max_abs(entries_ - entries_.adjoint());
  if (dev > kHermTol) {
    std::ostringstream msg;
    msg << "HermitianOperator: entries deviate from Hermitian symmetry by " << dev;
    throw std::invalid_argument(msg.str());
  }
}

HermitianOperator HermitianOperator::diagonal(const std::vector<double>& values) {
  check_dim_in_range(static_cast<int>(values.size()), "HermitianOperator::diagonal");
  const int d = static_cast<int>(values.size());
  Matrix m = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("HermitianOperator::diagonal: values must be finite");
    m(i, i) = Complex(values[i], 0.0);
  }
  return HermitianOperator(std::move(m));
}

// --------------------------- UnitaryOperator ---------------------------

UnitaryOperator::UnitaryOperator(Matrix entries) : entries_(std::move(entries)) {
  check_square(entries_, "UnitaryOperator");
  const int d = static_cast<int>(entries_.rows());
  const double dev = max_abs(entries_ * entries_.adjoint() - Matrix::Identity(d, d));
  if (dev > kUnitaryTol) {
    std::ostringstream msg;
    msg << "UnitaryOperator: U U^dag deviates from the identity by " << dev;
    throw std::invalid_argument(msg.str());
  }
}

UnitaryOperator UnitaryOperator::identity(int dim) {
  check_dim_in_range(dim, "UnitaryOperator::identity");
  return UnitaryOperator(Matrix::Identity(dim, dim));
}

// ---------------------------- ObservableSet ----------------------------

ObservableSet::ObservableSet(std::vector<HermitianOperator> operators)
    : operators_(std::move(operators)) {
  if (operators_.empty())
    throw std::invalid_argument("ObservableSet: at least one operator is required");
  const int d = operators_[0].dim();
  for (const auto& op : operators_) {
    if (op.dim() != d)
      throw DimensionMismatchError("ObservableSet: operators act on spaces of different dimension");
  }
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    for (std::size_t j = i + 1; j < operators_.size(); ++j) {
      const double dev = commutator_norm(operators_[i], operators_[j]);
      if (dev > kCommuteTol) {
        std::ostringstream msg;
        msg << "ObservableSet: operators " << i << " and " << j
            << " fail to commute, max commutator entry " << dev;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

int ObservableSet::dim() const { return operators_[0].dim(); }

// ------------------------------ Projector ------------------------------

Projector::Projector(Matrix entries) : entries_(std::move(entries)), rank_(0) {
  check_square(entries_, "Projector");
  const double herm_dev = max_abs(entries_ - entries_.adjoint());
  if (herm_dev > kHermTol) {
    std::ostringstream msg;
    msg << "Projector: entries deviate from Hermitian symmetry by " << herm_dev;
    throw std::invalid_argument(msg.str());
  }
  const double idem_dev = max_abs(entries_ * entries_ - entries_);
  if (idem_dev > kProjectorTol) {
    std::ostringstream msg;
    msg << "Projector: P^2 deviates from P by " << idem_dev;
    throw std::invalid_argument(msg.str());
  }
  const Complex tr = entries_.trace();
  const double nearest = std::round(tr.real());
  if (std::abs(tr.imag()) > kProjectorTol || std::abs(tr.real() - nearest) > kProjectorTol ||
      nearest < 0.0 || nearest > static_cast<double>(entries_.rows())) {
    std::ostringstream msg;
    msg << "Projector: trace " << tr.real() << " is not a rank in [0, " << entries_.rows() << "]";
    throw std::invalid_argument(msg.str());
  }
  rank_ = static_cast<int>(nearest);
}

Projector Projector::from_orthonormal_basis(const Matrix& basis) {
  if (basis.rows() < 1 || basis.cols() < 1 || basis.cols() > basis.rows())
    throw std::invalid_argument(
        "Projector::from_orthonormal_basis: basis must be d x k with 1 <= k <= d");
  check_dim_in_range(static_cast<int>(basis.rows()), "Projector::from_orthonormal_basis");
  if (!basis.allFinite())
    throw std::invalid_argument("Projector::from_orthonormal_basis: entries must be finite");
  const int k = static_cast<int>(basis.cols());
  const double dev = max_abs(basis.adjoint() * basis - Matrix::Identity(k, k));
  if (dev > kUnitaryTol) {
    std::ostringstream msg;
    msg << "Projector::from_orthonormal_basis: columns deviate from orthonormality by " << dev;
    throw std::invalid_argument(msg.str());
  }
  return Projector(basis * basis.adjoint());
}

Vector Projector::apply(const StateVector& state) const {
  if (state.dim() != dim())
    throw DimensionMismatchError("Projector::apply: state and projector dimensions differ");
  return entries_ * state.amps();
}

// ------------------------------ operations ------------------------------

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatchError("commutator_norm: operator dimensions differ");
  return max_abs(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

std::vector<Eigenspace> eigendecompose(const HermitianOperator& a, double tol_cluster) {
  if (!std::isfinite(tol_cluster) || tol_cluster <= 0.0)
    throw std::invalid_argument("eigendecompose: tol_cluster must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success)
    throw NumericFailureError("eigendecompose: eigensolver failed to converge");
  const Eigen::VectorXd vals = solver.eigenvalues();  // ascending
  const Matrix& vecs = solver.eigenvectors();
  const int d = a.dim();
  const double range = vals(d - 1) - vals(0);
  const double t_abs = tol_cluster * std::max(range, 1.0);

  std::vector<Eigenspace> out;
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    if (i < d && vals(i) - vals(i - 1) < t_abs) continue;  // chain into the cluster
    const double spread = vals(i - 1) - vals(start);
    if (spread >= t_abs) {
      std::ostringstream msg;
      msg << "eigendecompose: eigenvalue cluster [" << vals(start) << ", " << vals(i - 1)
          << "] has spread " << spread << " >= tolerance " << t_abs
          << "; values straddle the clustering tolerance";
      throw ClusterAmbiguityError(msg.str());
    }
    Eigenspace es;
    es.eigenvalue = vals.segment(start, i - start).mean();
    es.basis = vecs.middleCols(start, i - start);
    out.push_back(std::move(es));
    start = i;
  }
  return out;
}

ProjectorDecomposition joint_decomposition(const ObservableSet& obs, double tol_cluster) {
  const int d = obs.dim();

  // Common eigenspaces by spectral recursion: each level refines every
  // subspace found so far by the next operator, restricted to it.
  struct Partial {
    std::vector<double> labels;
    Matrix basis;  // orthonormal columns
  };
  std::vector<Partial> parts;
  parts.push_back(Partial{{}, Matrix::Identity(d, d)});

  for (int k = 0; k < obs.size(); ++k) {
    std::vector<Partial> refined;
    refined.reserve(parts.size());
    for (const Partial& part : parts) {
      const Matrix restricted = hermitized(part.basis.adjoint() * obs[k].matrix() * part.basis);
      const auto spaces = eigendecompose(HermitianOperator(restricted), tol_cluster);
      for (const Eigenspace& es : spaces) {
        Partial next;
        next.labels = part.labels;
        next.labels.push_back(es.eigenvalue);
        next.basis = part.basis * es.basis;
        refined.push_back(std::move(next));
      }
    }
    parts = std::move(refined);
  }

  // eigendecompose returns ascending eigenvalues, so the recursion leaves
  // the branches sorted lexicographically by label tuple already.
  std::vector<MeasurementBranch> branches;
  branches.reserve(parts.size());
  for (const Partial& part : parts)
    branches.push_back(MeasurementBranch{part.labels, Projector::from_orthonormal_basis(part.basis)});
  return ProjectorDecomposition(d, std::move(branches));
}

StateVector evolve(const StateVector& state, const HermitianOperator& h, double t) {
  if (state.dim() != h.dim())
    throw DimensionMismatchError("evolve: state and Hamiltonian dimensions differ");
  if (!std::isfinite(t)) throw std::invalid_argument("evolve: time must be finite");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success)
    throw NumericFailureError("evolve: eigensolver failed to converge");
  Vector coeffs = solver.eigenvectors().adjoint() * state.amps();
  for (int i = 0; i < state.dim(); ++i)
    coeffs(i) *= std::exp(Complex(0.0, -solver.eigenvalues()(i) * t));
  Vector out = solver.eigenvectors() * coeffs;
  const double n2 = out.squaredNorm();
  if (std::abs(n2 - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "evolve: norm drifted to " << std::sqrt(n2) << ", eigenbasis is not unitary enough";
    throw NumericFailureError(msg.str());
  }
  return StateVector(out / std::sqrt(n2));
}

UnitaryOperator random_unitary(int dim, RandomStream& rng) {
  check_dim_in_range(dim, "random_unitary");
  // Ginibre ensemble followed by QR; folding the R-diagonal phases back
  // into Q makes the distribution basis independent. Entries are drawn
  // in column-major order so the result is a pure function of the
  // stream position.
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return UnitaryOperator(std::move(q));
}

UnitaryOperator random_unitary(int dim, std::uint64_t seed) {
  RandomStream rng(seed);
  return random_unitary(dim, rng);
}

StateVector random_state(int dim, RandomStream& rng) {
  check_dim_in_range(dim, "random_state");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return StateVector::normalized(std::move(v));
}

ObservableSet commuting_set_from_labels(const UnitaryOperator& basis,
                                        const std::vector<std::vector<double>>& labels_per_op) {
  if (labels_per_op.empty())
    throw std::invalid_argument("commuting_set_from_labels: at least one label list is required");
  const int d = basis.dim();
  std::vector<HermitianOperator> ops;
  ops.reserve(labels_per_op.size());
  for (const auto& labels : labels_per_op) {
    if (static_cast<int>(labels.size()) != d)
      throw DimensionMismatchError(
          "commuting_set_from_labels: label list length must equal the basis dimension");
    Vector diag(d);
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(labels[i]))
        throw std::invalid_argument("commuting_set_from_labels: labels must be finite");
      diag(i) = Complex(labels[i], 0.0);
    }
    const Matrix m = basis.matrix() * diag.asDiagonal() * basis.matrix().adjoint();
    ops.emplace_back(hermitized(m));
  }
  return ObservableSet(std::move(ops));
}

// -------------------------- small constructions --------------------------

HermitianOperator pauli_x() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
  return HermitianOperator(std::move(m));
}

HermitianOperator pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return HermitianOperator(std::move(m));
}

HermitianOperator pauli_z() {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return HermitianOperator(std::move(m));
}

StateVector basis_state(int dim, int index) {
  check_dim_in_range(dim, "basis_state");
  if (index < 0 || index >= dim)
    throw std::invalid_argument("basis_state: index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = Complex(1.0, 0.0);
  return StateVector(std::move(v));
}

StateVector uniform_state(int dim) {
  check_dim_in_range(dim, "uniform_state");
  Vector v = Vector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
  return StateVector::normalized(std::move(v));
}

}  // namespace postlab
