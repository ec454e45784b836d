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


// Command-line front end: run, sweep, validate.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "h2ion/scenario.hpp"

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int cmd_validate(const h2ion::RunConfig& cfg) {
  std::cout << cfg.resolved_json(2) << '\n';
  std::size_t cells = 1;
  for (const auto& a : cfg.sweep) cells *= a.values.size();
  std::cout << "# basis_dim " << h2ion::build_state_space(cfg.cutoffs).dim() << '\n';
  if (!cfg.sweep.empty()) std::cout << "# sweep_cells " << cells << '\n';
  return 0;
}

int cmd_run(const h2ion::RunConfig& cfg) {
  const auto result = h2ion::run_scenario(cfg);
  const std::string path = cfg.output.prefix + ".dat";
  auto out = open_output(path);
  h2ion::write_time_series(out, result.series, h2ion::output_header(cfg, &result));
  if (!out) throw std::runtime_error("write failed for " + path);
  std::cerr << "wrote " << path << '\n';
  if (cfg.output.dump_hamiltonian) {
    const auto prepared = h2ion::prepare_run(cfg.cutoffs, cfg.params, cfg.initial_state, cfg.rates(), cfg.integration.prune);
    const std::string hpath = cfg.output.prefix + "_hamiltonian.txt";
    auto hout = open_output(hpath);
    h2ion::write_operator(hout, prepared.hamiltonian, prepared.space);
    std::cerr << "wrote " << hpath << '\n';
  }
  return 0;
}

int cmd_sweep(const h2ion::RunConfig& cfg, int threads) {
  if (cfg.sweep.empty()) throw std::invalid_argument("sweep: the config has no sweep.axes");
  const auto grid = h2ion::run_sweep(cfg, threads);
  for (const auto& p : h2ion::write_grid_files(cfg.output.prefix, grid, h2ion::output_header(cfg)))
    std::cerr << "wrote " << p << '\n';
  if (const auto n = grid.failures()) {
    for (const auto& c : grid.cells)
      if (!c.ok) std::cerr << "error: " << c.error << '\n';
    std::cerr << n << " of " << grid.cells.size() << " cells failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lindblad simulation of hydrogen-molecule ionization in a cavity"};
  app.set_version_flag("--version", h2ion::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_prefix;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_prefix, "output path prefix (overrides output.prefix)");
  };
  auto* run = app.add_subcommand("run", "run one scenario and write a time series");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write one file per observable");
  add_common(sweep);
  sweep->add_option("--threads", threads, "worker threads for grid cells")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "parse the config and print every resolved setting");
  validate->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = h2ion::load_config(config_path);
    if (!out_prefix.empty()) cfg.output.prefix = out_prefix;
    if (validate->parsed()) return cmd_validate(cfg);
    if (run->parsed()) return cmd_run(cfg);
    return cmd_sweep(cfg, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
