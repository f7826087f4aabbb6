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

#include <stdexcept>
#include <string>

namespace postlab {

/// Base class for every error raised by the library. Precondition
/// violations (bad arguments) use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two objects with incompatible Hilbert-space dimensions were combined.
class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// A stored value failed one of its declared invariants (normalization,
/// Hermiticity, completeness, probability totals, ...).
class InvariantViolationError : public Error {
 public:
  using Error::Error;
};

/// An underlying numerical routine failed to converge or produced a
/// result outside its guaranteed accuracy.
class NumericFailureError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue clustering could not decide whether two close eigenvalues
/// belong to the same eigenspace. Raised instead of guessing.
class ClusterAmbiguityError : public Error {
 public:
  using Error::Error;
};

/// A collapse was requested onto a branch whose projection of the state
/// falls below the support threshold.
class OffSupportError : public Error {
 public:
  using Error::Error;
};

/// A branch tree grew past its configured leaf budget.
class LeafBudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace postlab
