// Copyright 2026 The h2ion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "h2ion/operators.hpp"

namespace h2ion {

/// Settings of the increment-doubling exponential. The inner step is
/// dt / 2^doublings.
struct PtsimConfig {
  int doublings = 20;
  int taylor_terms = 4;

  void validate() const;
};

/// exp(A dt) by increment doubling: seed T = sum_{j=1..taylor_terms} (A eps)^j / j!
/// with eps = dt / 2^doublings, iterate T <- 2T + T*T, and return I + T. The
/// identity is added only after the last doubling so that the small increment
/// never gets rounded against 1.
DenseMatrix ptsim_expm(const DenseMatrix& a, double dt, const PtsimConfig& config = {});

/// Same seed, but repeatedly squares (I + T). Kept to compare rounding error
/// against the increment form.
DenseMatrix naive_squaring_expm(const DenseMatrix& a, double dt, const PtsimConfig& config = {});

/// exp(-i H dt) via Hermitian eigendecomposition. Throws when H deviates from
/// Hermitian by more than 1e-12.
DenseMatrix oracle_expm(const DenseMatrix& h, double dt);

/// Index sets of the connected components of a sparse matrix's symmetric
/// support. Every index appears in exactly one component, in ascending order.
std::vector<std::vector<Eigen::Index>> connected_components(const SparseMatrix& m);

/// One-step evolution operator exp(-i H dt / hbar) of a time-independent H.
///
/// H is split into its connected components and each block is exponentiated
/// on its own; the result is stored sparse.
struct Propagator {
  SparseMatrix u;
  PtsimConfig config;
  double dt = 0.0;
  std::uint64_t source_hash = 0;
};

Propagator make_propagator(const OperatorMatrix& h, double dt, const PtsimConfig& config = {}, double hbar = 1.0);

/// FNV-1a digest of a sparse matrix's entries.
std::uint64_t matrix_hash(const SparseMatrix& m);

/// max |U^dag U - I|.
double unitarity_defect(const DenseMatrix& u);

double max_abs(const DenseMatrix& m);

}  // namespace h2ion
