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


#include "h2ion/scenario.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace h2ion {

namespace {

std::string prefixed(const std::string& text) {
  std::ostringstream out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
  return out.str();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RunResult run_scenario(const RunConfig& config, std::vector<Probe> probes) {
  config.validate();
  auto prepared = prepare_run(config.cutoffs, config.params, config.initial_state, config.rates(), config.integration.prune);
  RunResult r;
  r.full_dim = prepared.full_dim;
  r.dim = prepared.space.dim();
  r.basis_hash = prepared.space.ordering_hash();
  const auto part = lindblad_sectors(prepared.hamiltonian.m, prepared.channels);
  r.sectors = config.integration.engine == Engine::Sectors ? part.blocks.size() : 1;
  r.largest_sector = config.integration.engine == Engine::Sectors ? part.largest_block() : r.dim;

  EvolveConfig ev;
  ev.dt = config.integration.dt.value_or(
      default_time_step(prepared.hamiltonian, prepared.channels, config.params.hbar));
  ev.t_end = config.integration.t_end;
  ev.stride = config.integration.stride;
  ev.ptsim = config.integration.ptsim;
  ev.trace_tol = config.integration.trace_tol;
  ev.hbar = config.params.hbar;
  ev.engine = config.integration.engine;
  ev.dissipator_step = config.integration.dissipator_step;
  r.dt = ev.dt;

  Evolution evolution(prepared.rho0, prepared.hamiltonian, prepared.channels, ev, prepared.observables,
                      std::move(probes));
  if (config.scenario == Scenario::Anode) {
    auto plateau = run_to_plateau(evolution, kCationColumn, config.integration.t_end,
                                  config.integration.t_max.value_or(config.integration.t_end),
                                  config.integration.plateau_tolerance, config.integration.plateau_window);
    r.settled = plateau.settled;
    r.series = std::move(plateau.series);
  } else {
    evolution.advance_to(config.integration.t_end);
    r.series = evolution.take_series();
  }
  r.stabilization = detect_stabilization(r.series, config.integration.stabilization_threshold);
  return r;
}

std::size_t SweepGrid::failures() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.ok ? 0 : 1;
  return n;
}

RunConfig cell_config(const RunConfig& config, const std::vector<std::size_t>& index) {
  if (index.size() != config.sweep.size()) throw std::invalid_argument("cell index does not match the sweep axes");
  RunConfig c = config;
  for (std::size_t a = 0; a < index.size(); ++a) {
    const auto& axis = config.sweep[a];
    const double v = axis.values.at(index[a]);
    for (Channel ch : axis.channels) {
      if (axis.quantity == SweepAxis::Quantity::Gamma) c.channel(ch).log10_gamma = v;
      else c.channel(ch).mu = v;
    }
  }
  c.sweep.clear();
  return c;
}

SweepGrid run_sweep(const RunConfig& config, int threads) {
  if (config.sweep.empty()) throw std::invalid_argument("sweep needs at least one axis");
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  SweepGrid grid;
  grid.axes = config.sweep;
  std::size_t total = 1;
  for (const auto& a : config.sweep) total *= a.values.size();
  grid.cells.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    auto& cell = grid.cells[k];
    std::size_t rest = k;
    cell.index.assign(config.sweep.size(), 0);
    for (std::size_t a = config.sweep.size(); a-- > 0;) {
      cell.index[a] = rest % config.sweep[a].values.size();
      rest /= config.sweep[a].values.size();
    }
    for (std::size_t a = 0; a < config.sweep.size(); ++a) cell.coords.push_back(config.sweep[a].values[cell.index[a]]);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      auto& cell = grid.cells[k];
      try {
        const auto r = run_scenario(cell_config(config, cell.index));
        cell.final_probs = final_probabilities(r.series);
        cell.t_stb = r.stabilization.t_stb;
        cell.trace_defect = r.series.max_trace_defect;
        cell.ok = true;
      } catch (const std::exception& e) {
        std::ostringstream where;
        where << "cell (";
        for (std::size_t a = 0; a < cell.coords.size(); ++a)
          where << (a ? ", " : "") << config.sweep[a].target << '=' << format_value(cell.coords[a]);
        where << "): " << e.what();
        cell.error = where.str();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), total);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return grid;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string output_header(const RunConfig& config, const RunResult* run) {
  std::ostringstream h;
  h << "# h2ion " << version() << '\n';
  h << "# config\n" << prefixed(config.resolved_json(2));
  if (run) {
    h << "# basis_dim " << run->full_dim << '\n';
    h << "# reachable_dim " << run->dim << '\n';
    h << "# basis_hash " << hex(run->basis_hash) << '\n';
    h << "# sectors " << run->sectors << " largest " << run->largest_sector << '\n';
    h << "# dt " << format_value(run->dt) << '\n';
    h << "# steps " << run->series.steps << '\n';
    h << "# max_trace_defect " << format_value(run->series.max_trace_defect) << '\n';
    if (run->stabilization.t_stb) {
      h << "# t_stb " << format_value(*run->stabilization.t_stb) << " resolution "
        << format_value(run->stabilization.resolution) << '\n';
    } else {
      h << "# t_stb not_reached\n";
    }
    if (config.scenario == Scenario::Anode) h << "# plateau " << (run->settled ? "settled" : "not_settled") << '\n';
  } else {
    h << "# basis_dim " << build_state_space(config.cutoffs).dim() << '\n';
  }
  return h.str();
}

void write_time_series(std::ostream& os, const TimeSeries& series, const std::string& header) {
  os << header;
  os << "# time P_atoms P_molecule P_cation P_other trace\n";
  const char* cols[] = {kAtomsColumn, kMoleculeColumn, kCationColumn, kOtherColumn};
  std::vector<std::size_t> idx;
  for (const char* c : cols) {
    auto i = series.column(c);
    if (!i) {
      if (series.samples.empty()) return;
      throw std::invalid_argument(std::string("time series lacks column ") + c);
    }
    idx.push_back(*i);
  }
  for (const auto& s : series.samples) {
    os << format_value(s.time);
    for (auto i : idx) os << ' ' << format_value(s.values[i]);
    os << ' ' << format_value(s.trace) << '\n';
  }
}

std::vector<std::string> write_grid_files(const std::string& prefix, const SweepGrid& grid, const std::string& header) {
  struct Column {
    const char* suffix;
    double (*get)(const CellResult&);
  };
  const Column cols[] = {
      {"atoms", [](const CellResult& c) { return c.final_probs.atoms; }},
      {"molecule", [](const CellResult& c) { return c.final_probs.molecule; }},
      {"cation", [](const CellResult& c) { return c.final_probs.cation; }},
      {"t_stb", [](const CellResult& c) { return c.t_stb.value_or(NAN); }},
  };
  std::string axes_line = "#";
  for (const auto& a : grid.axes)
    axes_line += std::string(" ") + (a.quantity == SweepAxis::Quantity::Gamma ? "log10_gamma_" : "mu_") + a.target;

  std::vector<std::string> paths;
  auto open = [&](const std::string& suffix) {
    const std::string path = prefix + "_" + suffix + ".dat";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header;
    paths.push_back(path);
    return out;
  };
  for (const auto& col : cols) {
    auto out = open(col.suffix);
    out << "# failed cells and, for t_stb, cells that never stabilized hold nan\n";
    out << axes_line << ' ' << col.suffix << '\n';
    for (const auto& c : grid.cells) {
      for (double v : c.coords) out << format_value(v) << ' ';
      out << format_value(c.ok ? col.get(c) : NAN) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + paths.back());
  }
  auto out = open("cells");
  out << axes_line << " status P_atoms P_molecule P_cation P_other t_stb max_trace_defect\n";
  for (const auto& c : grid.cells) {
    for (double v : c.coords) out << format_value(v) << ' ';
    if (!c.ok) {
      out << "failed nan nan nan nan nan nan  # " << c.error << '\n';
      continue;
    }
    const auto& p = c.final_probs;
    out << "ok " << format_value(p.atoms) << ' ' << format_value(p.molecule) << ' ' << format_value(p.cation) << ' '
        << format_value(p.other) << ' ' << format_value(c.t_stb.value_or(NAN)) << ' ' << format_value(c.trace_defect)
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + paths.back());
  return paths;
}

}  // namespace h2ion
