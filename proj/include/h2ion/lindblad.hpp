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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2ion/operators.hpp"
#include "h2ion/propagator.hpp"

namespace h2ion {

/// Thrown when a step leaves the trace tolerance band.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { Photon12Up, Photon12Dn, Photon01Up, Photon01Dn, Phonon, ElectronUp, ElectronDn };

inline constexpr std::array<Channel, 7> kAllChannels = {Channel::Photon12Up, Channel::Photon12Dn, Channel::Photon01Up,
                                                        Channel::Photon01Dn, Channel::Phonon,     Channel::ElectronUp,
                                                        Channel::ElectronDn};

std::string to_string(Channel c);
std::optional<Channel> channel_from_string(const std::string& name);

/// One dissipation channel with rate `gamma` and optional influx at rate
/// mu * gamma through the adjoint jump.
struct ChannelConfig {
  Channel channel = Channel::Phonon;
  double gamma = 0.0;
  double mu = 0.0;
  OperatorMatrix jump;

  double influx_rate() const { return mu * gamma; }
};

/// Jump operator for a channel: the mode's annihilator for photons and
/// phonons, Phi2 -> Detached for electrons.
OperatorMatrix channel_jump(const StateSpace& space, Channel channel);
ChannelConfig make_channel(const StateSpace& space, Channel channel, double gamma, double mu = 0.0);

struct DensityMatrix {
  DenseMatrix rho;
  double time = 0.0;

  static DensityMatrix pure(const Eigen::VectorXcd& psi, double time = 0.0);
  double trace() const { return rho.trace().real(); }
};

/// How the dissipator advances rho~ over one step h.
enum class DissipatorStep {
  /// rho~ + h L(rho~). Not positivity preserving; the negative part grows
  /// like h.
  Euler,
  /// e^{-hA/2} rho~ e^{-hA/2} + sum_k r_k J_k G rho~ G J_k^+, with
  /// A = sum_k r_k J_k^+ J_k and G = sqrt((1 - e^{-hA}) / A). Same first-order
  /// accuracy as Euler, but completely positive and trace preserving.
  Kraus,
};

std::string to_string(DissipatorStep s);

/// L(rho) summed over all channels: decay terms gamma (A rho A^+ - {rho, A^+A}/2)
/// and influx terms gamma' (A^+ rho A - {rho, A A^+}/2).
class Dissipator {
 public:
  Dissipator() = default;
  explicit Dissipator(std::span<const ChannelConfig> channels);

  DenseMatrix apply(const DenseMatrix& rho) const;
  /// One Kraus substep of length h (see DissipatorStep::Kraus). The factors
  /// are computed on first use for a given h and cached.
  DenseMatrix kraus_step(const DenseMatrix& rho, double h) const;
  Eigen::Index dim() const { return dim_; }
  bool empty() const { return terms_.empty(); }

 private:
  struct Term {
    double rate;
    SparseMatrix jump;
    SparseMatrix jump_adj;
  };
  std::vector<Term> terms_;
  SparseMatrix anti_;  // sum_k rate_k J_k^+ J_k
  Eigen::Index dim_ = -1;
  // Kraus factors for the last h; not shared between threads.
  mutable double kraus_h_ = 0.0;
  mutable DenseMatrix keep_;
  mutable DenseMatrix gain_;
};

DenseMatrix dissipator_apply(const DensityMatrix& rho, std::span<const ChannelConfig> channels);

struct StepOptions {
  double trace_tol = 1e-4;
  double hbar = 1.0;
  DissipatorStep dissipator_step = DissipatorStep::Kraus;
};

/// rho~ = U rho U^+, then the dissipator substep of length dt / hbar, then
/// (rho + rho^+)/2.
/// Throws IntegrationError when |tr rho - 1| exceeds the tolerance.
DensityMatrix step(const DensityMatrix& rho, const Propagator& u, const Dissipator& dissipator,
                   const StepOptions& options = {}, double* presym_defect = nullptr);
DensityMatrix step(const DensityMatrix& rho, const Propagator& u, std::span<const ChannelConfig> channels,
                   const StepOptions& options = {});

/// Expectation sum_i w_i Re(rho_ii) of a diagonal observable.
struct Observable {
  std::string name;
  Eigen::VectorXd weights;
};

struct Sample {
  double time = 0.0;
  std::vector<double> values;
  double trace = 0.0;
};

struct TimeSeries {
  std::vector<std::string> names;
  std::vector<Sample> samples;
  std::size_t steps = 0;
  double dt = 0.0;
  /// Largest |rho - rho^+| seen before symmetrization.
  double max_presym_defect = 0.0;
  /// Largest |tr rho - 1| over all steps, recorded or not.
  double max_trace_defect = 0.0;

  std::optional<std::size_t> column(const std::string& name) const;
};

/// View of the state handed to probes at each recorded sample.
struct Snapshot {
  double time = 0.0;
  double trace = 0.0;
  Eigen::VectorXd populations;
  /// Smallest eigenvalue of rho (or of each retained block); computed on demand.
  std::function<double()> min_eigenvalue;
  /// max |rho - rho^+| of the stored state.
  std::function<double()> hermiticity_defect;
};

using Probe = std::function<void(const Snapshot&)>;

enum class Engine {
  /// Full dense rho.
  Dense,
  /// Only the sector-diagonal blocks of rho; exact for populations.
  Sectors,
};

struct EvolveConfig {
  double dt = 0.0;
  double t_end = 0.0;
  int stride = 100;
  PtsimConfig ptsim;
  double trace_tol = 1e-4;
  double hbar = 1.0;
  Engine engine = Engine::Sectors;
  DissipatorStep dissipator_step = DissipatorStep::Kraus;

  void validate() const;
};

/// Coarsest-needed partition of the basis into sectors such that H and every
/// J^+J are block diagonal and every jump J maps each sector into a single
/// sector, injectively. The sector-diagonal part of rho then evolves on its
/// own.
struct SectorPartition {
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<std::size_t> block_of;

  std::size_t largest_block() const;
};

SectorPartition lindblad_sectors(const SparseMatrix& h, std::span<const ChannelConfig> channels);

/// rho restricted to the diagonal blocks of a SectorPartition.
struct BlockDensityMatrix {
  std::vector<DenseMatrix> blocks;
  double time = 0.0;

  static BlockDensityMatrix pinch(const DenseMatrix& rho, const SectorPartition& partition, double time = 0.0);
  DenseMatrix expand(const SectorPartition& partition) const;
  Eigen::VectorXd populations(const SectorPartition& partition) const;
  double trace() const;
  double min_eigenvalue() const;
  double hermiticity_defect() const;
};

/// Split-step integrator acting block by block.
class SectorStepper {
 public:
  SectorStepper(const OperatorMatrix& h, std::span<const ChannelConfig> channels, SectorPartition partition,
                double dt, const PtsimConfig& ptsim, const StepOptions& options);

  void step(BlockDensityMatrix& rho, double* presym_defect = nullptr) const;
  const SectorPartition& partition() const { return partition_; }
  double dt() const { return dt_; }

 private:
  struct Entry {
    Eigen::Index row;
    Eigen::Index col;
    Complex amp;
  };
  struct Transfer {
    std::size_t from;
    std::size_t to;
    double rate;
    std::vector<Entry> entries;  // rows in `to`, columns in `from`
  };
  SectorPartition partition_;
  std::vector<DenseMatrix> unitaries_;
  std::vector<bool> trivial_;  // 1x1 block: the unitary substep is the identity on rho
  std::vector<Eigen::VectorXd> decay_;  // diagonal of sum rate J^+J on the block
  std::vector<DenseMatrix> anti_;  // same, for blocks where it is not diagonal
  // Kraus substep factors e^{-hd/2} and sqrt((1 - e^{-hd}) / d); the gain is
  // sqrt(h) under Euler. Dense versions for the non-diagonal blocks.
  std::vector<Eigen::VectorXd> keep_;
  std::vector<Eigen::VectorXd> gain_;
  std::vector<DenseMatrix> keep_dense_;
  std::vector<DenseMatrix> gain_dense_;
  mutable std::vector<DenseMatrix> jumped_;  // G rho~ G^+ on the non-diagonal blocks
  std::vector<Transfer> transfers_;
  mutable std::vector<DenseMatrix> tilde_;
  mutable DenseMatrix scratch_;
  double dt_;
  StepOptions options_;
};

/// Resumable time stepping with observable recording. Samples are taken at
/// t = 0, every `stride` steps, and at the end of each advance() call.
class Evolution {
 public:
  Evolution(const DensityMatrix& rho0, const OperatorMatrix& h, std::span<const ChannelConfig> channels,
            const EvolveConfig& config, std::vector<Observable> observables, std::vector<Probe> probes = {});
  ~Evolution();
  Evolution(Evolution&&) noexcept;
  Evolution& operator=(Evolution&&) noexcept;

  void advance(std::size_t steps);
  void advance_to(double t_end);
  double time() const;
  const TimeSeries& series() const { return series_; }
  TimeSeries take_series() { return std::move(series_); }
  /// Current state; for the sector engine the off-sector coherences are zero.
  DenseMatrix state() const;

 private:
  struct Impl;
  void record();
  std::unique_ptr<Impl> impl_;
  TimeSeries series_;
  std::vector<Observable> observables_;
  std::vector<Probe> probes_;
  std::size_t step_count_ = 0;
  std::size_t last_recorded_ = 0;
};

/// Applies `step` until t_end, recording observables every `stride` steps and
/// after the final step.
TimeSeries evolve(const DensityMatrix& rho0, const OperatorMatrix& h, std::span<const ChannelConfig> channels,
                  const EvolveConfig& config, std::span<const Observable> observables,
                  std::span<const Probe> probes = {});

}  // namespace h2ion
