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

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "h2ion/hilbert.hpp"

namespace h2ion {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;

/// A square operator over a StateSpace, stored sparse.
struct OperatorMatrix {
  SparseMatrix m;
  std::string label;

  Eigen::Index dim() const { return m.rows(); }
  OperatorMatrix adjoint() const;
  DenseMatrix dense() const { return DenseMatrix(m); }
};

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);

/// (row, col) positions of the stored nonzeros.
std::vector<std::pair<std::size_t, std::size_t>> support(const SparseMatrix& m);

/// How the nuclei register enters the tunneling term.
enum class TunnelingForm {
  /// zeta (s_n^+ s_n + s_n s_n^+) s_w^+ s_w, which reduces to zeta on broken-bond states.
  Printed,
  /// zeta (s_n + s_n^+) s_w^+ s_w: the nuclei hop between cavities while the bond is broken.
  Hopping,
};

/// Physical constants in internal units (hbar = 1, frequencies relative to a
/// reference frequency).
struct ModelParams {
  double hbar = 1.0;
  double omega01_up = 1.0;
  double omega01_dn = 1.0;
  double omega12_up = 1.0;
  double omega12_dn = 1.0;
  double omega_ph = 0.1;
  double g01_up = 0.02;
  double g01_dn = 0.02;
  double g12_up = 0.02;
  double g12_dn = 0.02;
  double g_omega = 0.02;
  double zeta = 0.01;
  /// Use (omega01_dn + omega12_dn) for the spin-down Phi2 energy instead of the
  /// spin-up sum.
  bool atom_energy_spin_symmetric = false;
  TunnelingForm tunneling = TunnelingForm::Hopping;
  /// Gate the bond exchange term by the nuclei-together projector.
  bool bond_requires_nuclei_together = true;

  void validate() const;
};

enum class Transition { Phi1ToPhi0, Phi2ToPhi1 };

OperatorMatrix ladder_annihilate(const StateSpace& space, Mode mode);
/// Adjoint of ladder_annihilate; annihilates states at the cutoff.
OperatorMatrix ladder_create(const StateSpace& space, Mode mode);
OperatorMatrix number_operator(const StateSpace& space, Mode mode);

/// sigma for one spin and one relaxation step, e.g. Phi1 -> Phi0.
OperatorMatrix electron_lower(const StateSpace& space, Spin spin, Transition transition);
/// Phi2 -> Detached on one spin. Images outside the space are dropped.
OperatorMatrix electron_detach(const StateSpace& space, Spin spin);

/// Lowers L: broken (1) -> formed (0).
OperatorMatrix bond_sigma(const StateSpace& space);
/// Lowers k: scattered (1) -> together (0).
OperatorMatrix nuclei_sigma(const StateSpace& space);

OperatorMatrix identity(const StateSpace& space);

/// Diagonal operator with entries f(state).
template <typename F>
OperatorMatrix diagonal_operator(const StateSpace& space, F&& f, std::string label) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const double v = f(space.state(i));
    if (v != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(v, 0.0));
  }
  SparseMatrix m(static_cast<Eigen::Index>(space.dim()), static_cast<Eigen::Index>(space.dim()));
  m.setFromTriplets(t.begin(), t.end());
  return {std::move(m), std::move(label)};
}

/// Matrix elements of `op` (defined on `parent`) between states of `sub`.
OperatorMatrix restrict_operator(const OperatorMatrix& op, const StateSpace& parent, const StateSpace& sub);

/// The five Hamiltonian terms, kept separate for inspection.
struct HamiltonianTerms {
  OperatorMatrix atom, field, interaction, bond, tunneling;
  OperatorMatrix total() const;
};

HamiltonianTerms hamiltonian_terms(const StateSpace& space, const ModelParams& params);
OperatorMatrix assemble_hamiltonian(const StateSpace& space, const ModelParams& params);

/// Photon number in the four optical modes plus electron excitation quanta
/// (Phi1 -> 1, Phi2 and Detached -> 2). Commutes with the RWA terms.
OperatorMatrix excitation_number(const StateSpace& space);

/// Max-norm of H - H^dagger.
double hermiticity_defect(const SparseMatrix& h);

/// Text dump: '#' header naming the basis hash, then "row col re im" per
/// nonzero in row-major order.
void write_operator(std::ostream& os, const OperatorMatrix& op, const StateSpace& space);

}  // namespace h2ion
