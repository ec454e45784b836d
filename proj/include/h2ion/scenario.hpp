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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "h2ion/config.hpp"

namespace h2ion {

struct RunResult {
  TimeSeries series;
  StabilizationResult stabilization;
  std::size_t full_dim = 0;
  std::size_t dim = 0;
  std::size_t sectors = 0;
  std::size_t largest_sector = 0;
  std::uint64_t basis_hash = 0;
  double dt = 0.0;
  /// Anode runs: whether the cation column settled before t_max.
  bool settled = true;
};

/// Runs one scenario in memory. Sweep axes are ignored. Probes see every
/// recorded sample.
RunResult run_scenario(const RunConfig& config, std::vector<Probe> probes = {});

struct CellResult {
  std::vector<std::size_t> index;
  std::vector<double> coords;
  bool ok = false;
  std::string error;
  SubspaceProbabilities final_probs;
  std::optional<double> t_stb;
  double trace_defect = 0.0;
};

struct SweepGrid {
  std::vector<SweepAxis> axes;
  std::vector<CellResult> cells;  // row-major, last axis fastest

  std::size_t failures() const;
};

/// The config of one grid cell: the axis values written into the channel table.
RunConfig cell_config(const RunConfig& config, const std::vector<std::size_t>& index);

/// Runs every cell of the sweep on `threads` workers. Cell results do not
/// depend on the thread count.
SweepGrid run_sweep(const RunConfig& config, int threads);

/// Header lines (without the trailing data) shared by all output files.
std::string output_header(const RunConfig& config, const RunResult* run = nullptr);

/// Formats with 9 significant digits.
std::string format_value(double v);

void write_time_series(std::ostream& os, const TimeSeries& series, const std::string& header);

/// Writes <prefix>_{atoms,molecule,cation,t_stb,cells}.dat; returns the paths.
std::vector<std::string> write_grid_files(const std::string& prefix, const SweepGrid& grid, const std::string& header);

}  // namespace h2ion
