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


#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "h2ion/model.hpp"

using namespace h2ion;

namespace {

TimeSeries series_of(const std::vector<double>& bound) {
  TimeSeries ts;
  ts.names = {kAtomsColumn, kMoleculeColumn, kCationColumn, kOtherColumn};
  for (std::size_t i = 0; i < bound.size(); ++i) {
    Sample s;
    s.time = 0.5 * static_cast<double>(i);
    s.values = {1.0 - bound[i], bound[i] * 0.75, bound[i] * 0.25, 0.0};
    s.trace = 1.0;
    ts.samples.push_back(s);
  }
  return ts;
}

std::vector<ChannelRates> all_channels(double gamma, double mu = 0.0) {
  std::vector<ChannelRates> r;
  for (Channel c : kAllChannels) r.push_back({c, gamma, mu});
  return r;
}

double max_column_gap(const TimeSeries& a, const TimeSeries& b) {
  REQUIRE(a.samples.size() == b.samples.size());
  double w = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    for (std::size_t j = 0; j < a.names.size(); ++j) w = std::max(w, std::abs(a.samples[k].values[j] - b.samples[k].values[j]));
  return w;
}

}  // namespace

TEST_CASE("Psi7 amplitudes") {
  const auto space = build_state_space({});
  const auto psi = initial_amplitudes(space, InitialStateId::Psi7);
  int nonzero = 0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (psi(i) == Complex(0.0, 0.0)) continue;
    ++nonzero;
    CHECK(std::abs(std::abs(psi(i)) - 0.5) == 0.0);
    const auto& s = space.state(static_cast<std::size_t>(i));
    CHECK(s.count(Mode::Omega12Up) == 0);
    CHECK(s.count(Mode::Omega12Dn) == 0);
    CHECK(s.bond == 1);
    CHECK(s.nuclei == 1);
  }
  CHECK(nonzero == 4);
  // sign pattern +, -, +, - over (00, 01, 10, 11)
  auto amp = [&](ElectronLevel u, ElectronLevel d) {
    BasisState s;
    s.bond = s.nuclei = 1;
    s.up = u;
    s.dn = d;
    return psi(static_cast<Eigen::Index>(space.index_of(s))).real();
  };
  CHECK(amp(ElectronLevel::Phi0, ElectronLevel::Phi0) == 0.5);
  CHECK(amp(ElectronLevel::Phi0, ElectronLevel::Phi1) == -0.5);
  CHECK(amp(ElectronLevel::Phi1, ElectronLevel::Phi0) == 0.5);
  CHECK(amp(ElectronLevel::Phi1, ElectronLevel::Phi1) == -0.5);
}

TEST_CASE("Psi2 amplitudes") {
  const auto space = build_state_space({});
  const auto psi = initial_amplitudes(space, InitialStateId::Psi2);
  int nonzero = 0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (psi(i) == Complex(0.0, 0.0)) continue;
    ++nonzero;
    CHECK(std::abs(psi(i)) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
  }
  CHECK(nonzero == 8);
}

TEST_CASE("initial states are normalized and all atoms") {
  const auto space = build_state_space({});
  for (auto id : kAllInitialStates) {
    CAPTURE(to_string(id));
    CHECK(std::abs(initial_amplitudes(space, id).squaredNorm() - 1.0) <= 1e-14);
    const auto rho = build_initial_state(space, id);
    const auto p = subspace_probabilities(rho, space);
    CHECK(p.atoms == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.molecule == 0.0);
    CHECK(p.cation == 0.0);
    CHECK(p.other == 0.0);
  }
}

TEST_CASE("Psi6 is a coherent superposition") {
  const auto space = build_state_space({});
  const auto rho = build_initial_state(space, InitialStateId::Psi6);
  const double purity = (rho.rho * rho.rho).trace().real();
  CHECK(purity == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("insufficient cutoff names the register") {
  const auto space = build_state_space({1, 1});
  CHECK_THROWS_WITH_AS(initial_amplitudes(space, InitialStateId::Psi3), doctest::Contains("omega12_up"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(initial_amplitudes(space, InitialStateId::Psi4), doctest::Contains("omega12_dn"),
                       std::invalid_argument);
  CHECK_NOTHROW(initial_amplitudes(space, InitialStateId::Psi5));
}

TEST_CASE("initial state names") {
  for (auto id : kAllInitialStates) CHECK(initial_state_from_string(to_string(id)) == id);
  CHECK_FALSE(initial_state_from_string("Psi8").has_value());
}

TEST_CASE("classification") {
  BasisState s;
  s.bond = 1;
  s.nuclei = 0;
  s.up = ElectronLevel::Detached;
  CHECK(classify(s) == SubspaceLabel::Atoms);
  s.nuclei = 1;
  CHECK(classify(s) == SubspaceLabel::Atoms);

  BasisState m;
  m.up = ElectronLevel::Phi0;
  m.dn = ElectronLevel::Phi1;
  CHECK(classify(m) == SubspaceLabel::Molecule);

  BasisState c;
  c.up = ElectronLevel::Detached;
  c.dn = ElectronLevel::Phi0;
  CHECK(classify(c) == SubspaceLabel::Cation);
  c.up = ElectronLevel::Phi2;
  c.dn = ElectronLevel::Detached;
  CHECK(classify(c) == SubspaceLabel::Cation);

  BasisState o;
  o.nuclei = 1;
  CHECK(classify(o) == SubspaceLabel::Other);
}

TEST_CASE("subspace probabilities") {
  const auto space = build_state_space({0, 0});
  for (std::size_t i = 0; i < space.dim(); i += 5) {
    DensityMatrix rho{DenseMatrix::Zero(static_cast<Eigen::Index>(space.dim()), static_cast<Eigen::Index>(space.dim()))};
    rho.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    const auto p = subspace_probabilities(rho, space);
    const double expect[] = {p.atoms, p.molecule, p.cation, p.other};
    for (int k = 0; k < 4; ++k) CHECK(expect[k] == (k == static_cast<int>(classify(space.state(i))) ? 1.0 : 0.0));
  }
  DensityMatrix mixed{DenseMatrix::Identity(56, 56) * (1.0 / 56.0)};
  const auto p = subspace_probabilities(mixed, space);
  CHECK(std::abs(p.total() - mixed.trace()) <= 1e-12);
  CHECK(p.other > 0.0);
}

TEST_CASE("stabilization detector") {
  SUBCASE("never latched") {
    const auto r = detect_stabilization(series_of(std::vector<double>(20, 0.5)));
    CHECK_FALSE(r.t_stb.has_value());
    CHECK(r.resolution == 0.5);
  }
  SUBCASE("step at sample 7") {
    std::vector<double> v(20, 0.0);
    for (std::size_t i = 7; i < v.size(); ++i) v[i] = 1.0;
    const auto r = detect_stabilization(series_of(v));
    REQUIRE(r.t_stb.has_value());
    CHECK(*r.t_stb == 3.5);
  }
  SUBCASE("dip and re-cross latches on the second crossing") {
    std::vector<double> v = {0.0, 0.5, 0.9995, 0.9995, 0.998, 0.9992, 0.9999, 0.9999};
    const auto r = detect_stabilization(series_of(v));
    REQUIRE(r.t_stb.has_value());
    CHECK(*r.t_stb == 2.5);
  }
  SUBCASE("empty") { CHECK_THROWS_AS(detect_stabilization(TimeSeries{}), std::invalid_argument); }
}

TEST_CASE("anode channels") {
  const auto space = build_state_space({0, 0});
  const auto ch = anode_channels(space, 0.2);
  REQUIRE(ch.size() == 2);
  CHECK(ch[0].channel == Channel::ElectronUp);
  CHECK(ch[1].channel == Channel::ElectronDn);
  for (const auto& c : ch) {
    CHECK(c.gamma == 0.2);
    CHECK(c.influx_rate() == 0.0);
  }
  CHECK_THROWS_AS(anode_channels(space, -1.0), std::invalid_argument);
}

TEST_CASE("Psi7 reachable set is a strict subset under dissipation") {
  const auto run = prepare_run({}, ModelParams{}, InitialStateId::Psi7, all_channels(0.1));
  CHECK(run.full_dim == 4032);
  CHECK(run.space.dim() < run.full_dim);
}

TEST_CASE("reachability pruning does not change the dynamics") {
  const Cutoffs cut{1, 0};
  const auto rates = all_channels(0.05, 0.2);
  const auto full = prepare_run(cut, ModelParams{}, InitialStateId::Psi2, rates, false);
  const auto pruned = prepare_run(cut, ModelParams{}, InitialStateId::Psi2, rates, true);
  CHECK(pruned.space.dim() < full.space.dim());
  EvolveConfig cfg;
  cfg.dt = 0.25;
  cfg.t_end = 25.0;
  cfg.stride = 5;
  cfg.engine = Engine::Dense;
  const auto a = evolve(full.rho0, full.hamiltonian, full.channels, cfg, full.observables);
  cfg.engine = Engine::Sectors;
  const auto b = evolve(pruned.rho0, pruned.hamiltonian, pruned.channels, cfg, pruned.observables);
  CHECK(max_column_gap(a, b) <= 1e-12);
}

TEST_CASE("spin swap symmetry") {
  EvolveConfig cfg;
  cfg.dt = 0.5;
  cfg.t_end = 400.0;
  cfg.stride = 4;
  auto series = [&](InitialStateId id) {
    const auto run = prepare_run({}, ModelParams{}, id, {});
    return evolve(run.rho0, run.hamiltonian, run.channels, cfg, run.observables);
  };
  CHECK(max_column_gap(series(InitialStateId::Psi0), series(InitialStateId::Psi1)) <= 1e-10);
  CHECK(max_column_gap(series(InitialStateId::Psi3), series(InitialStateId::Psi4)) <= 1e-10);
}

TEST_CASE("closed Psi7 stays between atoms and molecule") {
  const auto run = prepare_run({}, ModelParams{}, InitialStateId::Psi7, {});
  EvolveConfig cfg;
  cfg.dt = 0.5;
  cfg.t_end = 1000.0;
  cfg.stride = 4;
  const auto ts = evolve(run.rho0, run.hamiltonian, run.channels, cfg, run.observables);
  double lo = 1.0;
  for (const auto& s : ts.samples) {
    CHECK(std::abs(s.values[0] + s.values[1] - 1.0) <= 1e-10);
    CHECK(s.values[2] == 0.0);
    lo = std::min(lo, s.values[0]);
  }
  CHECK(lo < 0.9);
}

TEST_CASE("time step policy") {
  const auto run = prepare_run({}, ModelParams{}, InitialStateId::Psi5, all_channels(0.1));
  const double dt = default_time_step(run.hamiltonian, run.channels);
  CHECK(dt > 0.0);
  // doubling every rate at most halves the step
  auto faster = run.channels;
  for (auto& c : faster) c.gamma *= 2.0;
  CHECK(default_time_step(run.hamiltonian, faster) <= dt);
  CHECK(default_time_step(run.hamiltonian, faster) >= 0.5 * dt * (1 - 1e-12));
  const OperatorMatrix none{SparseMatrix(3, 3), "0"};
  CHECK(default_time_step(none, {}) == 1.0);
}
