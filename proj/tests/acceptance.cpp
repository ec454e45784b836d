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


// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Indented lines are diagnostics. Exit status is the number of failures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "h2ion/config.hpp"
#include "h2ion/propagator.hpp"
#include "h2ion/scenario.hpp"
#include "test_util.hpp"

using namespace h2ion;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok) {
  std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", id, name.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

__attribute__((format(printf, 1, 2))) void note(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  std::printf("    ");
  std::vprintf(fmt, args);
  std::printf("\n");
  std::fflush(stdout);
  va_end(args);
}

// Physicality bookkeeping shared by every run below.
struct Audit {
  std::mutex mu;
  std::size_t runs = 0;
  std::size_t samples = 0;
  std::size_t spot_checks = 0;
  double trace = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = 0.0;
  double partition = 0.0;  // |sum of subspace columns - trace|

  // Trace and hermiticity at every sample; the spectrum at 10 times spread
  // over [0, t_end].
  Probe probe(double t_end) {
    auto next = std::make_shared<int>(0);
    {
      std::lock_guard lock(mu);
      ++runs;
    }
    return [this, t_end, next](const Snapshot& s) {
      double eig = 0.0;
      bool spot = *next < 10 && s.time >= *next * t_end / 9.0 - 1e-6 * t_end;
      if (spot) {
        eig = s.min_eigenvalue();
        while (*next < 10 && s.time >= *next * t_end / 9.0 - 1e-6 * t_end) ++*next;
      }
      const double herm = s.hermiticity_defect();
      std::lock_guard lock(mu);
      ++samples;
      trace = std::max(trace, std::abs(s.trace - 1.0));
      hermiticity = std::max(hermiticity, herm);
      if (spot) {
        ++spot_checks;
        min_eigenvalue = std::min(min_eigenvalue, eig);
      }
    };
  }

  void add_series(const TimeSeries& ts) {
    std::lock_guard lock(mu);
    for (const auto& s : ts.samples) {
      double sum = 0.0;
      for (double v : s.values) sum += v;
      partition = std::max(partition, std::abs(sum - s.trace));
    }
  }
};

Audit g_audit;

RunResult audited_run(const RunConfig& cfg) {
  auto r = run_scenario(cfg, {g_audit.probe(cfg.integration.t_end)});
  g_audit.add_series(r.series);
  return r;
}

std::vector<double> column(const TimeSeries& ts, const char* name) {
  const auto c = ts.column(name);
  std::vector<double> out;
  for (const auto& s : ts.samples) out.push_back(s.values[*c]);
  return out;
}

// Runs fn(i) for i in [0, n) on all hardware threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct GridCell {
  RunResult run;
  SubspaceProbabilities final_probs;
};

// 5x5 (or whatever the axes say) grid, each cell audited.
std::vector<GridCell> run_grid(const RunConfig& cfg) {
  const std::size_t n0 = cfg.sweep[0].values.size(), n1 = cfg.sweep[1].values.size();
  std::vector<GridCell> cells(n0 * n1);
  parallel_for(cells.size(), [&](std::size_t i) {
    auto c = cell_config(cfg, {i / n1, i % n1});
    cells[i].run = audited_run(c);
    cells[i].final_probs = final_probabilities(cells[i].run.series);
  });
  return cells;
}

// ---------------------------------------------------------------------------

void anode_limits() {
  const double expect[] = {0.5, 0.5, 0.5, 0.5, 0.5, 0.75, 0.625, 0.0};
  bool ok = true;
  for (auto id : kAllInitialStates) {
    const int k = static_cast<int>(id);
    auto cfg = parse_config(R"({"scenario": "anode", "initial_state": ")" + to_string(id) + R"(",
      "channels": {"electron": {"gamma": 7}},
      "integration": {"t_end": 4000, "t_max": 64000, "stride": 100}})");
    // P(one electron detached), whatever L and k are.
    const auto prepared = prepare_run(cfg.cutoffs, cfg.params, id, cfg.rates());
    Eigen::VectorXd detached = Eigen::VectorXd::Zero(prepared.space.dim());
    for (std::size_t i = 0; i < prepared.space.dim(); ++i) {
      const auto& s = prepared.space.state(i);
      if ((s.up == ElectronLevel::Detached) != (s.dn == ElectronLevel::Detached)) detached[i] = 1.0;
    }
    auto last = std::make_shared<double>(0.0);
    auto r = run_scenario(cfg, {g_audit.probe(cfg.integration.t_end),
                                [&, last](const Snapshot& s) { *last = detached.dot(s.populations); }});
    g_audit.add_series(r.series);
    const double cat = final_probabilities(r.series).cation;
    const bool pass = id == InitialStateId::Psi7 ? cat <= 1e-12 : std::abs(cat - expect[k]) <= 0.01;
    ok = ok && pass;
    note("%s: P_cation %.6f (target %.3f) %s at t=%.0f; P(one detached) %.6f", to_string(id).c_str(), cat, expect[k],
         r.settled ? "settled" : "not settled", r.series.samples.back().time, *last);
  }
  report(1, "anode asymptotic P(cation) 1/2, 3/4, 5/8, 0", ok);
}

void degeneracy() {
  const double g = ModelParams{}.g_omega;
  const double t_end = 50.0 * std::numbers::pi / g;
  std::vector<std::vector<double>> atoms;
  for (int k = 0; k <= 4; ++k) {
    auto cfg = parse_config(R"({"scenario": "unitary", "initial_state": "Psi)" + std::to_string(k) + R"(",
      "integration": {"dt": 0.05, "stride": 20, "t_end": )" + std::to_string(t_end) + "}}");
    atoms.push_back(column(audited_run(cfg).series, kAtomsColumn));
  }
  double worst = 0.0;
  for (int a = 0; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) {
      double d = 0.0;
      for (std::size_t i = 0; i < atoms[a].size(); ++i) d = std::max(d, std::abs(atoms[a][i] - atoms[b][i]));
      note("Psi%d vs Psi%d: max |dP_atoms| %.3e", a, b, d);
      worst = std::max(worst, d);
    }
  report(2, "closed-system degeneracy of Psi0-Psi4 over 50 Rabi periods", worst <= 1e-8);
}

void psi7_lockout() {
  const char* channel_sets[] = {
      R"("photon": {"gamma": 7}, "phonon": {"gamma": 7}, "electron": {"gamma": 7})",
      R"("photon": {"gamma": 4}, "phonon": {"gamma": 6}, "electron": {"gamma": 7.5})",
  };
  double worst = 0.0;
  for (const char* ch : channel_sets) {
    auto cfg = parse_config(std::string(R"({"scenario": "dissipative", "initial_state": "Psi7", "channels": {)") + ch +
                            R"(}, "integration": {"t_end": 3000, "stride": 10}})");
    const auto r = audited_run(cfg);
    for (double v : column(r.series, kCationColumn)) worst = std::max(worst, v);
  }
  note("max P_cation %.3e", worst);
  report(3, "Psi7 ionization lockout", worst <= 1e-12);
}

void influx_row() {
  bool ok = true;
  for (double mu_w : {0.0, 0.9}) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.1f", mu_w);
    auto cfg = parse_config(std::string(R"({"scenario": "influx", "initial_state": "Psi6",
      "channels": {"photon": {"gamma": 7}, "electron": {"gamma": 7}, "phonon": {"gamma": 7, "mu": )") + buf + R"(}},
      "integration": {"t_end": 2000, "stride": 10},
      "sweep": {"axes": [
        {"quantity": "mu", "channel": "photon", "values": [0, 0.2, 0.4, 0.6, 0.8]},
        {"quantity": "mu", "channel": "electron", "values": [0, 0.2, 0.4, 0.6, 0.8]}]}})");
    const auto cells = run_grid(cfg);
    double lo = 1.0, hi = 0.0;
    for (const auto& c : cells) {
      lo = std::min(lo, c.final_probs.atoms);
      hi = std::max(hi, c.final_probs.atoms);
    }
    note("mu_omega=%s: final P_atoms in [%.3e, %.3e]", buf, lo, hi);
    ok = ok && (mu_w == 0.0 ? hi <= 0.001 : hi >= 0.01);
  }
  report(4, "influx: mu_omega=0 drains the atoms subspace, 0.9 does not", ok);
}

void dissipative_trends() {
  auto cfg = parse_config(R"({"scenario": "dissipative", "initial_state": "Psi6",
    "channels": {"photon": {"gamma": 7}, "electron": {"gamma": 7}, "phonon": {"gamma": 7}},
    "integration": {"t_end": 3000, "stride": 10},
    "sweep": {"axes": [
      {"quantity": "gamma", "channel": "photon", "from": 4, "to": 7, "count": 5},
      {"quantity": "gamma", "channel": "electron", "from": 4, "to": 7, "count": 5}]}})");
  const auto cells = run_grid(cfg);
  const std::size_t n = 5, mid = 2;
  auto at = [&](std::size_t o, std::size_t e) -> const GridCell& { return cells[o * n + e]; };

  note("rows log10 gamma_Omega, columns log10 gamma_e: P_molecule / P_cation / t_stb");
  for (std::size_t o = 0; o < n; ++o) {
    std::string line;
    for (std::size_t e = 0; e < n; ++e) {
      const auto& c = at(o, e);
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %.4f/%.4f/%.0f", c.final_probs.molecule, c.final_probs.cation,
                    c.run.stabilization.t_stb.value_or(NAN));
      line += buf;
    }
    note("%.2f%s", cfg.sweep[0].values[o], line.c_str());
  }
  double atoms = 0.0;
  for (const auto& c : cells) atoms = std::max(atoms, c.final_probs.atoms);
  note("max final P_atoms over the grid %.3e", atoms);

  // 5: gamma_Omega axis at the centre gamma_e, gamma_e axis at the centre gamma_Omega.
  auto down_in_omega = [&](std::size_t e) {
    for (std::size_t o = 1; o < n; ++o)
      if (at(o, e).final_probs.cation > at(o - 1, e).final_probs.cation) return false;
    return true;
  };
  auto up_in_e = [&](std::size_t o) {
    for (std::size_t e = 1; e < n; ++e)
      if (at(o, e).final_probs.cation < at(o, e - 1).final_probs.cation) return false;
    return true;
  };
  std::string cols, rows;
  for (std::size_t i = 0; i < n; ++i) {
    cols += down_in_omega(i) ? '+' : '-';
    rows += up_in_e(i) ? '+' : '-';
  }
  note("non-increasing in gamma_Omega per gamma_e column: %s", cols.c_str());
  note("non-decreasing in gamma_e per gamma_Omega row: %s", rows.c_str());
  report(5, "P(cation) falls with gamma_Omega, rises with gamma_e", down_in_omega(mid) && up_in_e(mid));

  std::size_t bad = 0;
  for (const auto& c : cells) bad += c.final_probs.molecule > c.final_probs.cation ? 0 : 1;
  note("%zu of %zu cells with P_molecule <= P_cation", bad, cells.size());
  report(6, "P(molecule) > P(cation) in every cell", bad == 0);

  bool ok = true;
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t o = 1; o < n; ++o) {
      const auto a = at(o - 1, e).run.stabilization.t_stb, b = at(o, e).run.stabilization.t_stb;
      if (!a || !b || *b > *a) ok = false;
    }
  note("t_stb resolution %.3g", cells[0].run.stabilization.resolution);
  report(7, "t_stb non-increasing in gamma_Omega", ok);
}

void ptsim_oracle() {
  std::mt19937_64 rng(20260);
  std::uniform_int_distribution<int> dim(4, 64);
  std::uniform_real_distribution<double> norm(0.05, 2.0);
  double err = 0.0, group = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng);
    const double dt = 0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    const DenseMatrix h = testing::random_hermitian(rng, n, norm(rng) / dt);
    const DenseMatrix a = Complex(0, -1) * h;
    const DenseMatrix u = ptsim_expm(a, dt);
    err = std::max(err, max_abs(u - oracle_expm(h, dt)));
    group = std::max(group, max_abs(u * u - ptsim_expm(a, 2 * dt)));
  }
  note("max |ptsim - oracle| %.3e, max |U(dt)^2 - U(2dt)| %.3e", err, group);
  report(8, "PTSIM matches the eigendecomposition oracle", err <= 1e-10 && group <= 1e-9);
}

void trace_neutrality() {
  std::mt19937_64 rng(1616);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> rate(0.0, 2.0), ratio(0.0, 0.99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ChannelConfig> ch;
    for (int k = count(rng); k > 0; --k) {
      ChannelConfig c;
      c.gamma = rate(rng);
      c.mu = ratio(rng);
      c.jump = {testing::random_complex(rng, 16, 16).sparseView(), "J"};
      ch.push_back(c);
    }
    DensityMatrix rho{testing::random_density(rng, 16)};
    worst = std::max(worst, std::abs(dissipator_apply(rho, ch).trace()));
  }
  note("max |tr L(rho)| %.3e", worst);
  report(10, "dissipator trace neutrality", worst <= 1e-12);
}

void conservation() {
  const auto space = build_state_space({});
  ModelParams p;
  p.zeta = 0.0;
  p.g_omega = 0.0;
  const auto h = assemble_hamiltonian(space, p);
  const auto n = excitation_number(space);
  SparseMatrix comm = h.m * n.m - n.m * h.m;
  double c = 0.0;
  for (int k = 0; k < comm.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(comm, k); it; ++it) c = std::max(c, std::abs(it.value()));

  for (auto id : {InitialStateId::Psi2, InitialStateId::Psi6}) {
    auto cfg = parse_config(R"({"scenario": "unitary", "initial_state": ")" + to_string(id) + R"(",
      "model": {"zeta": 0, "g_omega": 0}, "integration": {"t_end": 1000, "stride": 10}})");
    audited_run(cfg);
  }
  note("max |[H, N]| %.3e; max |sum P - tr rho| over all runs %.3e", c, g_audit.partition);
  report(11, "closed-system conservation", c == 0.0 && g_audit.partition <= 1e-12);
}

std::vector<std::string> sweep_bytes(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto grid = run_sweep(cfg, 2);
  std::vector<std::string> out;
  for (const auto& p : write_grid_files((dir / "grid").string(), grid, output_header(cfg))) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back(ss.str());
  }
  return out;
}

void determinism() {
  auto cfg = parse_config(R"({"scenario": "dissipative", "initial_state": "Psi6",
    "channels": {"photon": {"gamma": 7}, "electron": {"gamma": 7}, "phonon": {"gamma": 7}},
    "integration": {"t_end": 200, "stride": 10},
    "sweep": {"axes": [
      {"quantity": "gamma", "channel": "photon", "values": [5, 7]},
      {"quantity": "gamma", "channel": "electron", "values": [5, 7]}]}})");
  const auto root = std::filesystem::temp_directory_path() / "h2ion_acceptance";
  const auto a = sweep_bytes(cfg, root / "a");
  const auto b = sweep_bytes(cfg, root / "b");
  std::filesystem::remove_all(root);
  note("%zu grid files compared", a.size());
  report(12, "repeated sweeps are byte-identical", !a.empty() && a == b);
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto timed = [&](void (*fn)()) {
    const auto s = clock::now();
    fn();
    note("(%.1f s)", std::chrono::duration<double>(clock::now() - s).count());
  };
  std::printf("h2ion %s acceptance\n", version().c_str());
  timed(anode_limits);
  timed(degeneracy);
  timed(psi7_lockout);
  timed(influx_row);
  timed(dissipative_trends);
  timed(ptsim_oracle);
  // 9 collects from every run above and from 11.
  timed(trace_neutrality);
  timed(conservation);
  timed(determinism);
  note("%zu runs, %zu samples, %zu spot checks", g_audit.runs, g_audit.samples, g_audit.spot_checks);
  note("max |tr rho - 1| %.3e, max |rho - rho^+| %.3e, min eigenvalue %.3e", g_audit.trace, g_audit.hermiticity,
       g_audit.min_eigenvalue);
  const bool spots = g_audit.spot_checks >= 10 * g_audit.runs;
  report(9, "physicality of every acceptance run",
         spots && g_audit.trace <= 1e-4 && g_audit.hermiticity == 0.0 && g_audit.min_eigenvalue >= -1e-8);
  std::printf("%d failed, total %.0f s\n", g_failures, std::chrono::duration<double>(clock::now() - t0).count());
  return g_failures;
}
