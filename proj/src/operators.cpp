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

#include "h2ion/operators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace h2ion {

namespace {

// Builds the operator sending each state s to amplitude * image(s), where
// `fn` returns 0 when s has no image. Images outside the space are dropped.
template <typename F>
OperatorMatrix map_states(const StateSpace& space, F&& fn, std::string label) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(space.dim());
  for (std::size_t col = 0; col < space.dim(); ++col) {
    BasisState image = space.state(col);
    const double amp = fn(image);
    if (amp == 0.0) continue;
    if (auto row = space.find(image)) {
      t.emplace_back(static_cast<int>(*row), static_cast<int>(col), Complex(amp, 0.0));
    }
  }
  const auto n = static_cast<Eigen::Index>(space.dim());
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return {std::move(m), std::move(label)};
}

const char* spin_tag(Spin s) { return s == Spin::Up ? "up" : "dn"; }

void check_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("parameter ") + name + " must be finite and non-negative");
}

}  // namespace

OperatorMatrix OperatorMatrix::adjoint() const { return {SparseMatrix(m.adjoint()), label + "^dag"}; }

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  return {SparseMatrix(a.m * b.m), a.label + "*" + b.label};
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  return {SparseMatrix(a.m + b.m), a.label + "+" + b.label};
}

std::vector<std::pair<std::size_t, std::size_t>> support(const SparseMatrix& m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != Complex(0.0, 0.0))
        out.emplace_back(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()));
  return out;
}

void ModelParams::validate() const {
  if (!(hbar > 0.0)) throw std::invalid_argument("parameter hbar must be positive");
  check_nonnegative(omega01_up, "omega01_up");
  check_nonnegative(omega01_dn, "omega01_dn");
  check_nonnegative(omega12_up, "omega12_up");
  check_nonnegative(omega12_dn, "omega12_dn");
  check_nonnegative(omega_ph, "omega_ph");
  check_nonnegative(g01_up, "g01_up");
  check_nonnegative(g01_dn, "g01_dn");
  check_nonnegative(g12_up, "g12_up");
  check_nonnegative(g12_dn, "g12_dn");
  check_nonnegative(g_omega, "g_omega");
  check_nonnegative(zeta, "zeta");
}

OperatorMatrix ladder_annihilate(const StateSpace& space, Mode mode) {
  return map_states(
      space,
      [mode](BasisState& s) {
        const int p = s.count(mode);
        if (p == 0) return 0.0;
        s.count(mode) = p - 1;
        return std::sqrt(static_cast<double>(p));
      },
      "a_" + to_string(mode));
}

OperatorMatrix ladder_create(const StateSpace& space, Mode mode) {
  auto a = ladder_annihilate(space, mode);
  return {SparseMatrix(a.m.adjoint()), "a+_" + to_string(mode)};
}

OperatorMatrix number_operator(const StateSpace& space, Mode mode) {
  return diagonal_operator(
      space, [mode](const BasisState& s) { return static_cast<double>(s.count(mode)); }, "n_" + to_string(mode));
}

OperatorMatrix electron_lower(const StateSpace& space, Spin spin, Transition transition) {
  const ElectronLevel from = transition == Transition::Phi1ToPhi0 ? ElectronLevel::Phi1 : ElectronLevel::Phi2;
  const ElectronLevel to = transition == Transition::Phi1ToPhi0 ? ElectronLevel::Phi0 : ElectronLevel::Phi1;
  return map_states(
      space,
      [=](BasisState& s) {
        if (s.level(spin) != from) return 0.0;
        s.level(spin) = to;
        return is_allowed(s) ? 1.0 : 0.0;
      },
      std::string(transition == Transition::Phi1ToPhi0 ? "sigma01_" : "sigma12_") + spin_tag(spin));
}

OperatorMatrix electron_detach(const StateSpace& space, Spin spin) {
  return map_states(
      space,
      [=](BasisState& s) {
        if (s.level(spin) != ElectronLevel::Phi2) return 0.0;
        s.level(spin) = ElectronLevel::Detached;
        return is_allowed(s) ? 1.0 : 0.0;
      },
      std::string("detach_") + spin_tag(spin));
}

OperatorMatrix bond_sigma(const StateSpace& space) {
  return map_states(
      space,
      [](BasisState& s) {
        if (s.bond != 1) return 0.0;
        s.bond = 0;
        return 1.0;
      },
      "sigma_bond");
}

OperatorMatrix nuclei_sigma(const StateSpace& space) {
  return map_states(
      space,
      [](BasisState& s) {
        if (s.nuclei != 1) return 0.0;
        s.nuclei = 0;
        return 1.0;
      },
      "sigma_nuclei");
}

OperatorMatrix identity(const StateSpace& space) {
  return diagonal_operator(space, [](const BasisState&) { return 1.0; }, "I");
}

OperatorMatrix HamiltonianTerms::total() const {
  return {SparseMatrix(atom.m + field.m + interaction.m + bond.m + tunneling.m), "H"};
}

OperatorMatrix restrict_operator(const OperatorMatrix& op, const StateSpace& parent, const StateSpace& sub) {
  if (op.dim() != static_cast<Eigen::Index>(parent.dim())) throw std::invalid_argument("operator does not match parent space");
  std::vector<std::ptrdiff_t> to_sub(parent.dim(), -1);
  for (std::size_t i = 0; i < sub.dim(); ++i) to_sub[parent.index_of(sub.state(i))] = static_cast<std::ptrdiff_t>(i);
  std::vector<Eigen::Triplet<Complex>> t;
  for (Eigen::Index k = 0; k < op.m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.m, k); it; ++it) {
      const auto r = to_sub[static_cast<std::size_t>(it.row())], c = to_sub[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
    }
  const auto n = static_cast<Eigen::Index>(sub.dim());
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return {std::move(m), op.label};
}

HamiltonianTerms hamiltonian_terms(const StateSpace& space, const ModelParams& p) {
  p.validate();
  if (space.dim() == 0) throw std::invalid_argument("cannot assemble a Hamiltonian on an empty space");
  const StateSpace parent = build_state_space(space.cutoffs());
  if (parent.dim() != space.dim()) {
    // Products of single-register operators pass through intermediate states
    // that a pruned space may lack; assemble on the full basis and restrict.
    HamiltonianTerms full = hamiltonian_terms(parent, p);
    for (auto* term : {&full.atom, &full.field, &full.interaction, &full.bond, &full.tunneling})
      *term = restrict_operator(*term, parent, space);
    return full;
  }
  const double hb = p.hbar;

  const auto s01u = electron_lower(space, Spin::Up, Transition::Phi1ToPhi0);
  const auto s01d = electron_lower(space, Spin::Down, Transition::Phi1ToPhi0);
  const auto s12u = electron_lower(space, Spin::Up, Transition::Phi2ToPhi1);
  const auto s12d = electron_lower(space, Spin::Down, Transition::Phi2ToPhi1);
  const auto sw = bond_sigma(space);
  const auto sn = nuclei_sigma(space);
  const auto a12u = ladder_annihilate(space, Mode::Omega12Up);
  const auto a12d = ladder_annihilate(space, Mode::Omega12Dn);
  const auto a01u = ladder_annihilate(space, Mode::Omega01Up);
  const auto a01d = ladder_annihilate(space, Mode::Omega01Dn);
  const auto aw = ladder_annihilate(space, Mode::Phonon);

  for (const auto* op : {&s01u, &s01d, &s12u, &s12d, &sw, &sn, &a12u, &a12d, &a01u, &a01d, &aw}) {
    if (op->dim() != static_cast<Eigen::Index>(space.dim())) throw std::logic_error("operator dimension mismatch");
  }

  auto proj = [](const OperatorMatrix& s) -> SparseMatrix { return SparseMatrix(s.m.adjoint() * s.m); };
  auto exchange = [](const OperatorMatrix& a, const OperatorMatrix& s) -> SparseMatrix {
    // a^dag s + a s^dag
    SparseMatrix x = SparseMatrix(a.m.adjoint()) * s.m;
    return SparseMatrix(x + SparseMatrix(x.adjoint()));
  };

  const double phi2_dn_energy = p.atom_energy_spin_symmetric ? p.omega01_dn + p.omega12_dn : p.omega01_up + p.omega12_up;
  const double phi2_up_energy = p.omega01_up + p.omega12_up;

  HamiltonianTerms h;
  SparseMatrix atom = hb * p.omega01_up * proj(s01u) + hb * p.omega01_dn * proj(s01d) +
                      hb * phi2_up_energy * proj(s12u) + hb * phi2_dn_energy * proj(s12d);
  // The detached level carries the energy of the Phi2 level it came from.
  atom += hb * diagonal_operator(
                   space,
                   [&](const BasisState& s) {
                     double e = 0.0;
                     if (s.up == ElectronLevel::Detached) e += phi2_up_energy;
                     if (s.dn == ElectronLevel::Detached) e += phi2_dn_energy;
                     return e;
                   },
                   "")
                   .m;
  h.atom = {std::move(atom), "H_atom"};

  h.field = {SparseMatrix(hb * p.omega01_up * proj(a01u) + hb * p.omega01_dn * proj(a01d) +
                          hb * p.omega12_up * proj(a12u) + hb * p.omega12_dn * proj(a12d)),
             "H_field"};

  const SparseMatrix bond_formed = SparseMatrix(sw.m * SparseMatrix(sw.m.adjoint()));
  const SparseMatrix bond_broken = proj(sw);
  const SparseMatrix nuclei_together = SparseMatrix(sn.m * SparseMatrix(sn.m.adjoint()));

  SparseMatrix coupling = p.g01_up * exchange(a01u, s01u) + p.g01_dn * exchange(a01d, s01d) +
                          p.g12_up * exchange(a12u, s12u) + p.g12_dn * exchange(a12d, s12d);
  h.interaction = {SparseMatrix(coupling * bond_formed), "H_int"};

  SparseMatrix bond_exchange = exchange(aw, sw);
  if (p.bond_requires_nuclei_together) bond_exchange = SparseMatrix(bond_exchange * nuclei_together);
  h.bond = {SparseMatrix(hb * p.omega_ph * proj(aw) + hb * p.omega_ph * bond_broken + p.g_omega * bond_exchange),
            "H_bond"};

  SparseMatrix nuclei_part = p.tunneling == TunnelingForm::Printed
                                 ? SparseMatrix(proj(sn) + nuclei_together)
                                 : SparseMatrix(sn.m + SparseMatrix(sn.m.adjoint()));
  h.tunneling = {SparseMatrix(p.zeta * nuclei_part * bond_broken), "H_tun"};

  for (auto* term : {&h.atom, &h.field, &h.interaction, &h.bond, &h.tunneling}) term->m.prune(Complex(0.0, 0.0));
  return h;
}

OperatorMatrix assemble_hamiltonian(const StateSpace& space, const ModelParams& params) {
  auto h = hamiltonian_terms(space, params).total();
  h.m.prune(Complex(0.0, 0.0));
  return h;
}

OperatorMatrix excitation_number(const StateSpace& space) {
  auto weight = [](ElectronLevel l) {
    switch (l) {
      case ElectronLevel::Phi0: return 0.0;
      case ElectronLevel::Phi1: return 1.0;
      case ElectronLevel::Phi2: return 2.0;
      case ElectronLevel::Detached: return 2.0;
    }
    return 0.0;
  };
  return diagonal_operator(
      space,
      [&](const BasisState& s) {
        return static_cast<double>(s.count(Mode::Omega12Up) + s.count(Mode::Omega12Dn) + s.count(Mode::Omega01Up) +
                                   s.count(Mode::Omega01Dn)) +
               weight(s.up) + weight(s.dn);
      },
      "N_exc");
}

double hermiticity_defect(const SparseMatrix& h) {
  SparseMatrix d = h - SparseMatrix(h.adjoint());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

void write_operator(std::ostream& os, const OperatorMatrix& op, const StateSpace& space) {
  if (op.dim() != static_cast<Eigen::Index>(space.dim())) throw std::invalid_argument("operator/space dimension mismatch");
  std::vector<std::tuple<Eigen::Index, Eigen::Index, Complex>> entries;
  for (Eigen::Index k = 0; k < op.m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.m, k); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  os << "# operator " << op.label << '\n';
  os << "# dim " << space.dim() << '\n';
  os << "# basis_hash " << std::hex << std::setw(16) << std::setfill('0') << space.ordering_hash() << std::dec
     << std::setfill(' ') << '\n';
  os << "# columns row col re im\n";
  os << std::setprecision(17);
  for (const auto& [r, c, v] : entries) os << r << ' ' << c << ' ' << v.real() << ' ' << v.imag() << '\n';
}

}  // namespace h2ion
