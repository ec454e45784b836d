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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "h2ion/hilbert.hpp"
#include "h2ion/lindblad.hpp"
#include "h2ion/operators.hpp"

namespace h2ion {

enum class InitialStateId { Psi0, Psi1, Psi2, Psi3, Psi4, Psi5, Psi6, Psi7 };

inline constexpr std::array<InitialStateId, 8> kAllInitialStates = {
    InitialStateId::Psi0, InitialStateId::Psi1, InitialStateId::Psi2, InitialStateId::Psi3,
    InitialStateId::Psi4, InitialStateId::Psi5, InitialStateId::Psi6, InitialStateId::Psi7};

std::string to_string(InitialStateId id);
std::optional<InitialStateId> initial_state_from_string(const std::string& name);

enum class SubspaceLabel { Atoms, Molecule, Cation, Other };

std::string to_string(SubspaceLabel label);

/// L=1 -> Atoms; L=0, k=0 with both electrons bound -> Molecule; L=0, k=0
/// with exactly one electron detached -> Cation; anything else -> Other.
SubspaceLabel classify(const BasisState& s);

/// Amplitudes of the initial ket: photon part in (p1, p2) times the fixed
/// part |000>|L=1>|k=1> (x) (|Phi0 Phi0> - |Phi0 Phi1> + |Phi1 Phi0> - |Phi1 Phi1>)/2.
/// Throws std::invalid_argument naming the register whose cutoff is too low.
Eigen::VectorXcd initial_amplitudes(const StateSpace& space, InitialStateId id);
DensityMatrix build_initial_state(const StateSpace& space, InitialStateId id);

struct SubspaceProbabilities {
  double atoms = 0.0;
  double molecule = 0.0;
  double cation = 0.0;
  double other = 0.0;

  double total() const { return atoms + molecule + cation + other; }
};

SubspaceProbabilities subspace_probabilities(const DensityMatrix& rho, const StateSpace& space);

/// Indicator observables named P_atoms, P_molecule, P_cation, P_other.
std::vector<Observable> subspace_observables(const StateSpace& space);

inline constexpr const char* kAtomsColumn = "P_atoms";
inline constexpr const char* kMoleculeColumn = "P_molecule";
inline constexpr const char* kCationColumn = "P_cation";
inline constexpr const char* kOtherColumn = "P_other";

SubspaceProbabilities probabilities_at(const TimeSeries& series, std::size_t sample);
SubspaceProbabilities final_probabilities(const TimeSeries& series);

struct StabilizationResult {
  /// First recorded time after which P(molecule) + P(cation) stays above the
  /// threshold; empty when never latched.
  std::optional<double> t_stb;
  double threshold = 0.999;
  /// Spacing of the recorded samples, i.e. the resolution of t_stb.
  double resolution = 0.0;
  SubspaceProbabilities final_probs;
};

StabilizationResult detect_stabilization(const TimeSeries& series, double threshold = 0.999);

/// The two electron-absorption channels of the anode model; no photon or
/// phonon losses.
std::vector<ChannelConfig> anode_channels(const StateSpace& space, double gamma_e);

/// Rate and influx ratio for one channel, before binding to a space.
struct ChannelRates {
  Channel channel = Channel::Phonon;
  double gamma = 0.0;
  double mu = 0.0;
};

/// A ready-to-run simulation on the part of the basis reachable from the
/// initial state.
struct PreparedRun {
  StateSpace space;
  std::size_t full_dim = 0;
  OperatorMatrix hamiltonian;
  std::vector<ChannelConfig> channels;
  DensityMatrix rho0;
  std::vector<Observable> observables;
};

PreparedRun prepare_run(const Cutoffs& cutoffs, const ModelParams& params, InitialStateId initial,
                        const std::vector<ChannelRates>& rates, bool prune = true);

/// 0.05 divided by the fastest non-diagonal rate: the largest off-diagonal
/// row sum of H (coupling strength) or the largest total escape rate of a
/// basis state. Diagonal energies do not enter since the unitary substep is
/// exact.
double default_time_step(const OperatorMatrix& h, const std::vector<ChannelConfig>& channels, double hbar = 1.0);

struct PlateauResult {
  TimeSeries series;
  bool settled = false;
  double value = 0.0;
};

/// Advances from t_end in doublings up to t_max until `column` varies by less
/// than `tolerance` over the final `window` fraction of the run.
PlateauResult run_to_plateau(Evolution& evolution, const std::string& column, double t_end, double t_max,
                             double tolerance = 1e-5, double window = 0.1);

}  // namespace h2ion
