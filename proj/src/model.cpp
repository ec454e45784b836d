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

#include "h2ion/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace h2ion {

std::string to_string(InitialStateId id) { return "Psi" + std::to_string(static_cast<int>(id)); }

std::optional<InitialStateId> initial_state_from_string(const std::string& name) {
  for (auto id : kAllInitialStates)
    if (to_string(id) == name) return id;
  return std::nullopt;
}

std::string to_string(SubspaceLabel label) {
  switch (label) {
    case SubspaceLabel::Atoms: return "atoms";
    case SubspaceLabel::Molecule: return "molecule";
    case SubspaceLabel::Cation: return "cation";
    case SubspaceLabel::Other: return "other";
  }
  return "?";
}

SubspaceLabel classify(const BasisState& s) {
  if (s.bond == 1) return SubspaceLabel::Atoms;
  if (s.nuclei != 0) return SubspaceLabel::Other;
  const bool up_gone = s.up == ElectronLevel::Detached;
  const bool dn_gone = s.dn == ElectronLevel::Detached;
  if (!up_gone && !dn_gone) return SubspaceLabel::Molecule;
  if (up_gone != dn_gone) return SubspaceLabel::Cation;
  return SubspaceLabel::Other;
}

namespace {

struct PhotonTerm {
  int p1;
  int p2;
  double amplitude;
};

std::vector<PhotonTerm> photon_part(InitialStateId id) {
  const double r2 = 1.0 / std::sqrt(2.0);
  switch (id) {
    case InitialStateId::Psi0: return {{1, 0, 1.0}};
    case InitialStateId::Psi1: return {{0, 1, 1.0}};
    case InitialStateId::Psi2: return {{1, 0, r2}, {0, 1, r2}};
    case InitialStateId::Psi3: return {{2, 0, 1.0}};
    case InitialStateId::Psi4: return {{0, 2, 1.0}};
    case InitialStateId::Psi5: return {{1, 1, 1.0}};
    case InitialStateId::Psi6: return {{2, 0, 0.5}, {0, 2, 0.5}, {1, 1, r2}};
    case InitialStateId::Psi7: return {{0, 0, 1.0}};
  }
  return {};
}

}  // namespace

Eigen::VectorXcd initial_amplitudes(const StateSpace& space, InitialStateId id) {
  const auto photons = photon_part(id);
  for (const auto& t : photons) {
    if (t.p1 > space.cutoffs().omega12) {
      throw std::invalid_argument(to_string(id) + " needs cutoff >= " + std::to_string(t.p1) + " on register " +
                                  to_string(Mode::Omega12Up));
    }
    if (t.p2 > space.cutoffs().omega12) {
      throw std::invalid_argument(to_string(id) + " needs cutoff >= " + std::to_string(t.p2) + " on register " +
                                  to_string(Mode::Omega12Dn));
    }
  }
  // Atomic orbitals 0_1 0_2 expanded in the molecular basis.
  struct ElectronTerm {
    ElectronLevel up, dn;
    double amplitude;
  };
  const ElectronTerm electrons[] = {{ElectronLevel::Phi0, ElectronLevel::Phi0, 0.5},
                                    {ElectronLevel::Phi0, ElectronLevel::Phi1, -0.5},
                                    {ElectronLevel::Phi1, ElectronLevel::Phi0, 0.5},
                                    {ElectronLevel::Phi1, ElectronLevel::Phi1, -0.5}};
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dim()));
  for (const auto& ph : photons) {
    for (const auto& el : electrons) {
      BasisState s;
      s.count(Mode::Omega12Up) = ph.p1;
      s.count(Mode::Omega12Dn) = ph.p2;
      s.bond = 1;
      s.nuclei = 1;
      s.up = el.up;
      s.dn = el.dn;
      auto i = space.find(s);
      if (!i) throw std::invalid_argument(to_string(id) + " has a component outside the space: " + describe(s));
      psi(static_cast<Eigen::Index>(*i)) += ph.amplitude * el.amplitude;
    }
  }
  return psi;
}

DensityMatrix build_initial_state(const StateSpace& space, InitialStateId id) {
  return DensityMatrix::pure(initial_amplitudes(space, id));
}

SubspaceProbabilities subspace_probabilities(const DensityMatrix& rho, const StateSpace& space) {
  if (rho.rho.rows() != static_cast<Eigen::Index>(space.dim())) throw std::invalid_argument("density matrix does not match the space");
  SubspaceProbabilities p;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const double v = rho.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    switch (classify(space.state(i))) {
      case SubspaceLabel::Atoms: p.atoms += v; break;
      case SubspaceLabel::Molecule: p.molecule += v; break;
      case SubspaceLabel::Cation: p.cation += v; break;
      case SubspaceLabel::Other: p.other += v; break;
    }
  }
  return p;
}

std::vector<Observable> subspace_observables(const StateSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  std::vector<Observable> obs = {{kAtomsColumn, Eigen::VectorXd::Zero(n)},
                                 {kMoleculeColumn, Eigen::VectorXd::Zero(n)},
                                 {kCationColumn, Eigen::VectorXd::Zero(n)},
                                 {kOtherColumn, Eigen::VectorXd::Zero(n)}};
  for (Eigen::Index i = 0; i < n; ++i) obs[static_cast<std::size_t>(classify(space.state(static_cast<std::size_t>(i))))].weights(i) = 1.0;
  return obs;
}

SubspaceProbabilities probabilities_at(const TimeSeries& series, std::size_t sample) {
  auto col = [&](const char* name) {
    auto c = series.column(name);
    if (!c) throw std::invalid_argument(std::string("time series has no column ") + name);
    return series.samples.at(sample).values.at(*c);
  };
  return {col(kAtomsColumn), col(kMoleculeColumn), col(kCationColumn), col(kOtherColumn)};
}

SubspaceProbabilities final_probabilities(const TimeSeries& series) {
  if (series.samples.empty()) throw std::invalid_argument("empty time series");
  return probabilities_at(series, series.samples.size() - 1);
}

StabilizationResult detect_stabilization(const TimeSeries& series, double threshold) {
  if (series.samples.empty()) throw std::invalid_argument("cannot detect stabilization on an empty series");
  const auto mol = series.column(kMoleculeColumn);
  const auto cat = series.column(kCationColumn);
  if (!mol || !cat) throw std::invalid_argument("time series lacks molecule/cation columns");
  StabilizationResult r;
  r.threshold = threshold;
  if (series.samples.size() > 1) r.resolution = series.samples[1].time - series.samples[0].time;
  r.final_probs = final_probabilities(series);
  std::optional<std::size_t> first;
  for (std::size_t i = series.samples.size(); i-- > 0;) {
    const auto& v = series.samples[i].values;
    if (v[*mol] + v[*cat] > threshold) first = i;
    else break;
  }
  if (first) r.t_stb = series.samples[*first].time;
  return r;
}

std::vector<ChannelConfig> anode_channels(const StateSpace& space, double gamma_e) {
  if (!(gamma_e >= 0.0)) throw std::invalid_argument("anode absorption rate must be non-negative");
  return {make_channel(space, Channel::ElectronUp, gamma_e, 0.0), make_channel(space, Channel::ElectronDn, gamma_e, 0.0)};
}

PreparedRun prepare_run(const Cutoffs& cutoffs, const ModelParams& params, InitialStateId initial,
                        const std::vector<ChannelRates>& rates, bool prune) {
  StateSpace full = build_state_space(cutoffs);
  StateSpace space = full;
  if (prune) {
    const OperatorMatrix h = assemble_hamiltonian(full, params);
    auto edges = support(h.m);
    for (const auto& r : rates) {
      if (r.gamma <= 0.0) continue;
      auto e = support(channel_jump(full, r.channel).m);
      edges.insert(edges.end(), e.begin(), e.end());
    }
    const Eigen::VectorXcd psi = initial_amplitudes(full, initial);
    std::vector<std::size_t> seed;
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      if (psi(i) != Complex(0.0, 0.0)) seed.push_back(static_cast<std::size_t>(i));
    space = reachable_subspace(full, edges, seed);
  }
  PreparedRun run;
  run.full_dim = full.dim();
  run.hamiltonian = assemble_hamiltonian(space, params);
  for (const auto& r : rates) run.channels.push_back(make_channel(space, r.channel, r.gamma, r.mu));
  run.rho0 = build_initial_state(space, initial);
  run.observables = subspace_observables(space);
  run.space = std::move(space);
  return run;
}

double default_time_step(const OperatorMatrix& h, const std::vector<ChannelConfig>& channels, double hbar) {
  const auto n = h.dim();
  Eigen::VectorXd coupling = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < h.m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h.m, k); it; ++it)
      if (it.row() != it.col()) coupling(it.col()) += std::abs(it.value()) / hbar;
  Eigen::VectorXd escape = Eigen::VectorXd::Zero(n);
  for (const auto& ch : channels) {
    const SparseMatrix& a = ch.jump.m;
    SparseMatrix loss = SparseMatrix(a.adjoint()) * a;
    SparseMatrix gain = a * SparseMatrix(a.adjoint());
    for (Eigen::Index i = 0; i < n; ++i)
      escape(i) += (ch.gamma * loss.coeff(i, i).real() + ch.influx_rate() * gain.coeff(i, i).real()) / hbar;
  }
  const double scale = std::max(n > 0 ? coupling.maxCoeff() : 0.0, n > 0 ? escape.maxCoeff() : 0.0);
  if (scale <= 0.0) return 1.0;
  return 0.05 / scale;
}

PlateauResult run_to_plateau(Evolution& evolution, const std::string& column, double t_end, double t_max,
                             double tolerance, double window) {
  auto col = evolution.series().column(column);
  if (!col) throw std::invalid_argument("unknown column " + column);
  PlateauResult r;
  double target = t_end;
  for (;;) {
    evolution.advance_to(target);
    const auto& s = evolution.series().samples;
    const double t_now = s.back().time;
    double lo = s.back().values[*col], hi = lo;
    for (std::size_t i = s.size(); i-- > 0;) {
      if (s[i].time < (1.0 - window) * t_now) break;
      lo = std::min(lo, s[i].values[*col]);
      hi = std::max(hi, s[i].values[*col]);
    }
    r.value = s.back().values[*col];
    r.settled = (hi - lo) < tolerance;
    if (r.settled || target >= t_max) break;
    target = std::min(2.0 * target, t_max);
  }
  r.series = evolution.series();
  return r;
}

}  // namespace h2ion
