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

#include "h2ion/lindblad.hpp"
#include "h2ion/model.hpp"

namespace h2ion {

std::string version();

enum class Scenario { Unitary, Dissipative, Influx, Anode };

std::string to_string(Scenario s);

/// Rate of one channel as a log10 exponent of gamma_unit (empty = off), plus
/// the influx ratio.
struct ChannelSetting {
  std::optional<double> log10_gamma;
  double mu = 0.0;
};

struct SweepAxis {
  enum class Quantity { Gamma, Mu };
  Quantity quantity = Quantity::Gamma;
  /// Channel or group name as written in the config.
  std::string target;
  std::vector<Channel> channels;
  /// log10 exponents for Gamma, plain ratios for Mu.
  std::vector<double> values;
};

struct IntegrationSettings {
  /// Empty means default_time_step().
  std::optional<double> dt;
  double t_end = 2000.0;
  /// Anode runs keep doubling t_end up to t_max until the cation column settles.
  std::optional<double> t_max;
  double plateau_tolerance = 1e-5;
  double plateau_window = 0.1;
  int stride = 100;
  PtsimConfig ptsim;
  double trace_tol = 1e-4;
  Engine engine = Engine::Sectors;
  DissipatorStep dissipator_step = DissipatorStep::Kraus;
  bool prune = true;
  double stabilization_threshold = 0.999;
};

struct OutputSettings {
  std::string prefix = "h2ion";
  bool dump_hamiltonian = false;
};

struct RunConfig {
  Scenario scenario = Scenario::Unitary;
  InitialStateId initial_state = InitialStateId::Psi6;
  ModelParams params;
  Cutoffs cutoffs;
  /// Internal rate is gamma_unit * 10^exponent.
  double gamma_unit = 1e-8;
  std::array<ChannelSetting, 7> channels{};
  IntegrationSettings integration;
  std::vector<SweepAxis> sweep;
  OutputSettings output;

  ChannelSetting& channel(Channel c) { return channels[static_cast<std::size_t>(c)]; }
  const ChannelSetting& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }
  /// Internal rates of the channels that are switched on.
  std::vector<ChannelRates> rates() const;
  /// Scenario-level checks; parse_config runs them, sweeps rerun them per cell.
  void validate() const;
  /// Every setting, defaults included, as a JSON document.
  std::string resolved_json(int indent = 2) const;
};

/// Channel groups accepted wherever a channel name is: photon (all four
/// optical modes), electron (both spins), phonon.
std::vector<Channel> channels_for(const std::string& name);

/// Parses a JSON document with sections model, channels, integration, sweep,
/// output (plus top-level scenario and initial_state). Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace h2ion
