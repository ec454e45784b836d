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

#include "h2ion/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace h2ion {

std::string to_string(Channel c) {
  switch (c) {
    case Channel::Photon12Up: return "photon12_up";
    case Channel::Photon12Dn: return "photon12_dn";
    case Channel::Photon01Up: return "photon01_up";
    case Channel::Photon01Dn: return "photon01_dn";
    case Channel::Phonon: return "phonon";
    case Channel::ElectronUp: return "electron_up";
    case Channel::ElectronDn: return "electron_dn";
  }
  return "?";
}

std::optional<Channel> channel_from_string(const std::string& name) {
  for (Channel c : kAllChannels)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

OperatorMatrix channel_jump(const StateSpace& space, Channel channel) {
  switch (channel) {
    case Channel::Photon12Up: return ladder_annihilate(space, Mode::Omega12Up);
    case Channel::Photon12Dn: return ladder_annihilate(space, Mode::Omega12Dn);
    case Channel::Photon01Up: return ladder_annihilate(space, Mode::Omega01Up);
    case Channel::Photon01Dn: return ladder_annihilate(space, Mode::Omega01Dn);
    case Channel::Phonon: return ladder_annihilate(space, Mode::Phonon);
    case Channel::ElectronUp: return electron_detach(space, Spin::Up);
    case Channel::ElectronDn: return electron_detach(space, Spin::Down);
  }
  throw std::invalid_argument("unknown channel");
}

ChannelConfig make_channel(const StateSpace& space, Channel channel, double gamma, double mu) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("channel rate must be non-negative");
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw std::invalid_argument("influx ratio mu for " + to_string(channel) +
                                " must lie in [0, 1): influx weaker than dissipation");
  }
  return {channel, gamma, mu, channel_jump(space, channel)};
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi, double time) {
  return {psi * psi.adjoint(), time};
}

Dissipator::Dissipator(std::span<const ChannelConfig> channels) {
  for (const auto& ch : channels) {
    const Eigen::Index n = ch.jump.dim();
    if (dim_ < 0) {
      dim_ = n;
      anti_.resize(n, n);
    } else if (n != dim_) {
      throw std::invalid_argument("jump operators disagree on dimension");
    }
    SparseMatrix a = ch.jump.m;
    SparseMatrix a_adj = a.adjoint();
    if (ch.gamma > 0.0) {
      terms_.push_back({ch.gamma, a, a_adj});
      anti_ += ch.gamma * SparseMatrix(a_adj * a);
    }
    if (ch.influx_rate() > 0.0) {
      terms_.push_back({ch.influx_rate(), a_adj, a});
      anti_ += ch.influx_rate() * SparseMatrix(a * a_adj);
    }
  }
}

DenseMatrix Dissipator::apply(const DenseMatrix& rho) const {
  if (dim_ >= 0 && (rho.rows() != dim_ || rho.cols() != dim_)) {
    throw std::invalid_argument("density matrix and jump operators disagree on dimension");
  }
  DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
  if (terms_.empty()) return out;
  for (const auto& t : terms_) {
    DenseMatrix x = t.jump * rho;                         // J rho
    out += t.rate * DenseMatrix((t.jump * x.adjoint()).adjoint());  // J rho J^+
  }
  DenseMatrix left = anti_ * rho;
  DenseMatrix right = DenseMatrix((anti_ * rho.adjoint()).adjoint());  // rho K, K Hermitian
  out -= 0.5 * (left + right);
  return out;
}

namespace {

// sqrt((1 - e^{-h a}) / a), which tends to sqrt(h) as a -> 0.
double kraus_gain(double a, double h) {
  if (a * h < 1e-300) return std::sqrt(h);
  return std::sqrt(-std::expm1(-h * a) / a);
}

// f(A) for Hermitian positive semidefinite A.
template <class F>
DenseMatrix hermitian_function(const DenseMatrix& a, F&& f) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(std::max(d[i], 0.0));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::string to_string(DissipatorStep s) { return s == DissipatorStep::Euler ? "euler" : "kraus"; }

DenseMatrix Dissipator::kraus_step(const DenseMatrix& rho, double h) const {
  if (dim_ >= 0 && (rho.rows() != dim_ || rho.cols() != dim_)) {
    throw std::invalid_argument("density matrix and jump operators disagree on dimension");
  }
  if (terms_.empty()) return rho;
  if (kraus_h_ != h || keep_.rows() != dim_) {
    const DenseMatrix a = DenseMatrix(anti_);
    keep_ = hermitian_function(a, [h](double x) { return std::exp(-0.5 * h * x); });
    gain_ = hermitian_function(a, [h](double x) { return kraus_gain(x, h); });
    kraus_h_ = h;
  }
  DenseMatrix out = keep_ * rho * keep_.adjoint();
  const DenseMatrix inner = gain_ * rho * gain_.adjoint();
  for (const auto& t : terms_) {
    DenseMatrix x = t.jump * inner;
    out += t.rate * DenseMatrix((t.jump * x.adjoint()).adjoint());
  }
  return out;
}

DenseMatrix dissipator_apply(const DensityMatrix& rho, std::span<const ChannelConfig> channels) {
  return Dissipator(channels).apply(rho.rho);
}

namespace {

double presym(const DenseMatrix& m) {
  double d = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = c; r < m.rows(); ++r) d = std::max(d, std::abs(m(r, c) - std::conj(m(c, r))));
  return d;
}

void check_trace(double trace, double tol, double time) {
  if (!(std::abs(trace - 1.0) <= tol)) {
    std::ostringstream os;
    os << "step size too large for dissipator Euler substep (trace " << trace << " at t=" << time << ")";
    throw IntegrationError(os.str());
  }
}

}  // namespace

DensityMatrix step(const DensityMatrix& rho, const Propagator& u, const Dissipator& dissipator,
                   const StepOptions& options, double* presym_defect) {
  if (u.u.rows() != rho.rho.rows()) throw std::invalid_argument("propagator and density matrix disagree on dimension");
  DenseMatrix x = u.u * rho.rho;
  DenseMatrix tilde = DenseMatrix((u.u * x.adjoint()).adjoint());
  DensityMatrix next{tilde, rho.time + u.dt};
  if (!dissipator.empty()) {
    const double h = u.dt / options.hbar;
    if (options.dissipator_step == DissipatorStep::Euler) {
      next.rho += dissipator.apply(tilde) * h;
    } else {
      next.rho = dissipator.kraus_step(tilde, h);
    }
  }
  if (presym_defect) *presym_defect = std::max(*presym_defect, presym(next.rho));
  next.rho = 0.5 * (next.rho + next.rho.adjoint()).eval();
  check_trace(next.trace(), options.trace_tol, next.time);
  return next;
}

DensityMatrix step(const DensityMatrix& rho, const Propagator& u, std::span<const ChannelConfig> channels,
                   const StepOptions& options) {
  return step(rho, u, Dissipator(channels), options);
}

std::optional<std::size_t> TimeSeries::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

void EvolveConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("end time must be non-negative");
  if (stride < 1) throw std::invalid_argument("observer stride must be >= 1");
  if (!(trace_tol > 0.0)) throw std::invalid_argument("trace tolerance must be positive");
  ptsim.validate();
}

std::size_t SectorPartition::largest_block() const {
  std::size_t m = 0;
  for (const auto& b : blocks) m = std::max(m, b.size());
  return m;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

void unite_support(UnionFind& uf, const SparseMatrix& m) {
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != Complex(0.0, 0.0)) uf.unite(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()));
}

// Enforces that `jump` maps every block into one block and that no two blocks
// share a target block. Returns true if any merge happened.
bool unite_jump(UnionFind& uf, const SparseMatrix& jump) {
  const std::size_t n = uf.parent.size();
  bool changed = false;
  std::vector<std::ptrdiff_t> image_of(n, -1), preimage_of(n, -1);
  for (Eigen::Index col = 0; col < jump.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(jump, col); it; ++it) {
      if (it.value() == Complex(0.0, 0.0)) continue;
      const std::size_t src = uf.find(static_cast<std::size_t>(col));
      const std::size_t dst = uf.find(static_cast<std::size_t>(it.row()));
      if (image_of[src] < 0) {
        image_of[src] = static_cast<std::ptrdiff_t>(dst);
      } else if (uf.find(static_cast<std::size_t>(image_of[src])) != dst) {
        changed |= uf.unite(static_cast<std::size_t>(image_of[src]), dst);
      }
      const std::size_t dst_root = uf.find(dst);
      if (preimage_of[dst_root] < 0) {
        preimage_of[dst_root] = static_cast<std::ptrdiff_t>(src);
      } else if (uf.find(static_cast<std::size_t>(preimage_of[dst_root])) != uf.find(src)) {
        changed |= uf.unite(static_cast<std::size_t>(preimage_of[dst_root]), src);
      }
    }
  }
  return changed;
}

}  // namespace

SectorPartition lindblad_sectors(const SparseMatrix& h, std::span<const ChannelConfig> channels) {
  const auto n = static_cast<std::size_t>(h.rows());
  UnionFind uf(n);
  unite_support(uf, h);
  std::vector<SparseMatrix> jumps;
  for (const auto& ch : channels) {
    if (ch.jump.dim() != h.rows()) throw std::invalid_argument("jump operator and Hamiltonian disagree on dimension");
    if (ch.gamma > 0.0) jumps.push_back(ch.jump.m);
    if (ch.influx_rate() > 0.0) jumps.push_back(SparseMatrix(ch.jump.m.adjoint()));
  }
  for (const auto& j : jumps) unite_support(uf, SparseMatrix(SparseMatrix(j.adjoint()) * j));
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& j : jumps) changed |= unite_jump(uf, j);
  }
  SectorPartition p;
  p.block_of.assign(n, 0);
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(p.blocks.size());
      p.blocks.emplace_back();
    }
    p.block_of[i] = static_cast<std::size_t>(slot[r]);
    p.blocks[p.block_of[i]].push_back(static_cast<Eigen::Index>(i));
  }
  return p;
}

BlockDensityMatrix BlockDensityMatrix::pinch(const DenseMatrix& rho, const SectorPartition& partition, double time) {
  BlockDensityMatrix out;
  out.time = time;
  out.blocks.reserve(partition.blocks.size());
  for (const auto& idx : partition.blocks) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    DenseMatrix b(k, k);
    for (Eigen::Index c = 0; c < k; ++c)
      for (Eigen::Index r = 0; r < k; ++r) b(r, c) = rho(idx[r], idx[c]);
    out.blocks.push_back(std::move(b));
  }
  return out;
}

DenseMatrix BlockDensityMatrix::expand(const SectorPartition& partition) const {
  const auto n = static_cast<Eigen::Index>(partition.block_of.size());
  DenseMatrix rho = DenseMatrix::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = partition.blocks[b];
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < idx.size(); ++r)
        rho(idx[r], idx[c]) = blocks[b](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return rho;
}

Eigen::VectorXd BlockDensityMatrix::populations(const SectorPartition& partition) const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(partition.block_of.size()));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = partition.blocks[b];
    for (std::size_t r = 0; r < idx.size(); ++r)
      p(idx[r]) = blocks[b](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)).real();
  }
  return p;
}

double BlockDensityMatrix::trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

double BlockDensityMatrix::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(b, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

double BlockDensityMatrix::hermiticity_defect() const {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, presym(b));
  return m;
}

namespace {

DenseMatrix sub_block(const SparseMatrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m.coeff(rows[r], cols[c]);
  return out;
}

}  // namespace

namespace {

// t = u r u^dagger for Hermitian r, filling the lower triangle from the upper.
// Blocks are small (tens of states) so plain loops beat the blocked GEMM path.
void conjugate(const DenseMatrix& u, const DenseMatrix& r, DenseMatrix& s, DenseMatrix& t) {
  const Eigen::Index k = u.rows();
  s.resize(k, k);
  t.resize(k, k);
  const Complex* U = u.data();
  const Complex* R = r.data();
  Complex* S = s.data();
  Complex* T = t.data();
  // s = u r, column by column
  for (Eigen::Index c = 0; c < k; ++c) {
    Complex* sc = S + c * k;
    for (Eigen::Index i = 0; i < k; ++i) sc[i] = Complex(0.0, 0.0);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Complex rj = R[j + c * k];
      if (rj == Complex(0.0, 0.0)) continue;
      const Complex* uj = U + j * k;
      for (Eigen::Index i = 0; i < k; ++i) sc[i] += uj[i] * rj;
    }
  }
  // t(i, c) = sum_j s(i, j) conj(u(c, j)) for i >= c
  for (Eigen::Index c = 0; c < k; ++c) {
    Complex* tc = T + c * k;
    for (Eigen::Index i = c; i < k; ++i) tc[i] = Complex(0.0, 0.0);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Complex w = std::conj(U[c + j * k]);
      if (w == Complex(0.0, 0.0)) continue;
      const Complex* sj = S + j * k;
      for (Eigen::Index i = c; i < k; ++i) tc[i] += sj[i] * w;
    }
  }
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index i = c + 1; i < k; ++i) T[c + i * k] = std::conj(T[i + c * k]);
}

}  // namespace

SectorStepper::SectorStepper(const OperatorMatrix& h, std::span<const ChannelConfig> channels,
                             SectorPartition partition, double dt, const PtsimConfig& ptsim,
                             const StepOptions& options)
    : partition_(std::move(partition)), dt_(dt), options_(options) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t nb = partition_.blocks.size();
  const Complex scale(0.0, -1.0 / options.hbar);
  unitaries_.reserve(nb);
  trivial_.assign(nb, false);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& idx = partition_.blocks[b];
    unitaries_.push_back(ptsim_expm(scale * sub_block(h.m, idx, idx), dt, ptsim));
    trivial_[b] = idx.size() == 1;
  }

  anti_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto k = static_cast<Eigen::Index>(partition_.blocks[b].size());
    anti_[b] = DenseMatrix::Zero(k, k);
  }
  auto add_jump = [&](const SparseMatrix& j, double rate) {
    SparseMatrix jj = SparseMatrix(j.adjoint()) * j;
    for (std::size_t b = 0; b < nb; ++b) anti_[b] += rate * sub_block(jj, partition_.blocks[b], partition_.blocks[b]);
    std::vector<std::ptrdiff_t> target(nb, -1);
    for (Eigen::Index col = 0; col < j.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(j, col); it; ++it)
        if (it.value() != Complex(0.0, 0.0))
          target[partition_.block_of[static_cast<std::size_t>(col)]] =
              static_cast<std::ptrdiff_t>(partition_.block_of[static_cast<std::size_t>(it.row())]);
    for (std::size_t b = 0; b < nb; ++b) {
      if (target[b] < 0) continue;
      const auto to = static_cast<std::size_t>(target[b]);
      const DenseMatrix sub = sub_block(j, partition_.blocks[to], partition_.blocks[b]);
      Transfer t{b, to, rate, {}};
      for (Eigen::Index c = 0; c < sub.cols(); ++c)
        for (Eigen::Index r = 0; r < sub.rows(); ++r)
          if (sub(r, c) != Complex(0.0, 0.0)) t.entries.push_back({r, c, sub(r, c)});
      transfers_.push_back(std::move(t));
    }
  };
  for (const auto& ch : channels) {
    if (ch.jump.dim() != h.dim()) throw std::invalid_argument("jump operator and Hamiltonian disagree on dimension");
    if (ch.gamma > 0.0) add_jump(ch.jump.m, ch.gamma);
    if (ch.influx_rate() > 0.0) add_jump(SparseMatrix(ch.jump.m.adjoint()), ch.influx_rate());
  }
  // Jumps built from ladder and level operators give a diagonal J^+J; keep the
  // dense form only where that fails.
  decay_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    DenseMatrix off = anti_[b];
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() == 0.0 || off.size() == 0) {
      decay_[b] = anti_[b].diagonal().real();
      anti_[b].resize(0, 0);
    }
  }
  const double step = dt / options.hbar;
  const bool kraus = options.dissipator_step == DissipatorStep::Kraus;
  keep_.resize(nb);
  gain_.resize(nb);
  keep_dense_.resize(nb);
  gain_dense_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    if (anti_[b].size() == 0) {
      const Eigen::VectorXd& d = decay_[b];
      keep_[b] = d.unaryExpr([step](double x) { return std::exp(-0.5 * step * x); });
      if (kraus) gain_[b] = d.unaryExpr([step](double x) { return kraus_gain(x, step); });
      else gain_[b] = Eigen::VectorXd::Constant(d.size(), std::sqrt(step));
    } else {
      const auto k = anti_[b].rows();
      keep_dense_[b] = hermitian_function(anti_[b], [step](double x) { return std::exp(-0.5 * step * x); });
      gain_dense_[b] = kraus ? hermitian_function(anti_[b], [step](double x) { return kraus_gain(x, step); })
                             : DenseMatrix(std::sqrt(step) * DenseMatrix::Identity(k, k));
    }
  }
  tilde_.resize(nb);
  jumped_.resize(nb);
}

void SectorStepper::step(BlockDensityMatrix& rho, double* presym_defect) const {
  const std::size_t nb = partition_.blocks.size();
  if (rho.blocks.size() != nb) throw std::invalid_argument("block density matrix does not match the partition");
  for (std::size_t b = 0; b < nb; ++b) {
    const DenseMatrix& r = rho.blocks[b];
    DenseMatrix& t = tilde_[b];
    if (trivial_[b]) {
      t = r;
      continue;
    }
    conjugate(unitaries_[b], r, scratch_, t);
  }
  const double h = dt_ / options_.hbar;
  const bool kraus = options_.dissipator_step == DissipatorStep::Kraus;
  for (std::size_t b = 0; b < nb; ++b) {
    const DenseMatrix& t = tilde_[b];
    DenseMatrix& out = rho.blocks[b];
    const Eigen::Index k = t.rows();
    if (anti_[b].size() == 0) {
      if (kraus) {
        const Eigen::VectorXd& e = keep_[b];
        for (Eigen::Index c = 0; c < k; ++c)
          for (Eigen::Index r = 0; r < k; ++r) out(r, c) = t(r, c) * (e(r) * e(c));
      } else {
        const Eigen::VectorXd& d = decay_[b];
        for (Eigen::Index c = 0; c < k; ++c)
          for (Eigen::Index r = 0; r < k; ++r) out(r, c) = t(r, c) * (1.0 - 0.5 * h * (d(r) + d(c)));
      }
    } else {
      DenseMatrix scratch;
      conjugate(gain_dense_[b], t, scratch, jumped_[b]);
      if (kraus) {
        conjugate(keep_dense_[b], t, scratch, out);
      } else {
        scratch_.noalias() = anti_[b] * t;
        out = t - 0.5 * h * (scratch_ + scratch_.adjoint());
      }
    }
  }
  for (const auto& tr : transfers_) {
    DenseMatrix& dst = rho.blocks[tr.to];
    const double w = tr.rate;
    if (anti_[tr.from].size() == 0) {
      const DenseMatrix& src = tilde_[tr.from];
      const Eigen::VectorXd& g = gain_[tr.from];
      for (const auto& e1 : tr.entries)
        for (const auto& e2 : tr.entries)
          dst(e1.row, e2.row) += w * (g(e1.col) * g(e2.col)) * e1.amp * src(e1.col, e2.col) * std::conj(e2.amp);
    } else {
      const DenseMatrix& src = jumped_[tr.from];
      for (const auto& e1 : tr.entries)
        for (const auto& e2 : tr.entries) dst(e1.row, e2.row) += w * e1.amp * src(e1.col, e2.col) * std::conj(e2.amp);
    }
  }
  double trace = 0.0;
  for (auto& b : rho.blocks) {
    if (b.size() == 0) continue;
    if (presym_defect) *presym_defect = std::max(*presym_defect, presym(b));
    const Eigen::Index k = b.rows();
    for (Eigen::Index c = 0; c < k; ++c) {
      b(c, c) = Complex(b(c, c).real(), 0.0);
      for (Eigen::Index r = c + 1; r < k; ++r) {
        const Complex v = 0.5 * (b(r, c) + std::conj(b(c, r)));
        b(r, c) = v;
        b(c, r) = std::conj(v);
      }
      trace += b(c, c).real();
    }
  }
  rho.time += dt_;
  check_trace(trace, options_.trace_tol, rho.time);
}

struct Evolution::Impl {
  EvolveConfig config;
  double t0 = 0.0;
  // dense engine
  std::optional<Propagator> propagator;
  Dissipator dissipator;
  DensityMatrix dense;
  // sector engine
  std::unique_ptr<SectorStepper> stepper;
  BlockDensityMatrix blocks;
};

Evolution::Evolution(const DensityMatrix& rho0, const OperatorMatrix& h, std::span<const ChannelConfig> channels,
                     const EvolveConfig& config, std::vector<Observable> observables, std::vector<Probe> probes)
    : impl_(std::make_unique<Impl>()), observables_(std::move(observables)), probes_(std::move(probes)) {
  config.validate();
  const Eigen::Index n = h.dim();
  if (rho0.rho.rows() != n || rho0.rho.cols() != n) {
    throw std::invalid_argument("initial state and Hamiltonian disagree on dimension");
  }
  for (const auto& o : observables_)
    if (o.weights.size() != n) throw std::invalid_argument("observable " + o.name + " has the wrong dimension");
  impl_->config = config;
  impl_->t0 = rho0.time;
  series_.dt = config.dt;
  for (const auto& o : observables_) series_.names.push_back(o.name);
  const StepOptions opts{config.trace_tol, config.hbar, config.dissipator_step};
  if (config.engine == Engine::Dense) {
    impl_->propagator = make_propagator(h, config.dt, config.ptsim, config.hbar);
    impl_->dissipator = Dissipator(channels);
    impl_->dense = rho0;
  } else {
    impl_->stepper = std::make_unique<SectorStepper>(h, channels, lindblad_sectors(h.m, channels), config.dt,
                                                     config.ptsim, opts);
    impl_->blocks = BlockDensityMatrix::pinch(rho0.rho, impl_->stepper->partition(), rho0.time);
  }
  record();
}

Evolution::~Evolution() = default;
Evolution::Evolution(Evolution&&) noexcept = default;
Evolution& Evolution::operator=(Evolution&&) noexcept = default;

double Evolution::time() const { return impl_->t0 + static_cast<double>(step_count_) * impl_->config.dt; }

DenseMatrix Evolution::state() const {
  if (impl_->stepper) return impl_->blocks.expand(impl_->stepper->partition());
  return impl_->dense.rho;
}

void Evolution::record() {
  const double t = time();
  Eigen::VectorXd pops;
  double tr = 0.0;
  std::function<double()> min_eig, herm;
  if (impl_->stepper) {
    const auto& b = impl_->blocks;
    pops = b.populations(impl_->stepper->partition());
    tr = b.trace();
    min_eig = [&b] { return b.min_eigenvalue(); };
    herm = [&b] { return b.hermiticity_defect(); };
  } else {
    const auto& r = impl_->dense;
    pops = r.rho.diagonal().real();
    tr = r.trace();
    min_eig = [&r] {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(r.rho, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    };
    herm = [&r] { return presym(r.rho); };
  }
  series_.max_trace_defect = std::max(series_.max_trace_defect, std::abs(tr - 1.0));
  Sample s;
  s.time = t;
  s.trace = tr;
  for (const auto& o : observables_) s.values.push_back(o.weights.dot(pops));
  series_.samples.push_back(std::move(s));
  if (!probes_.empty()) {
    Snapshot snap{t, tr, std::move(pops), std::move(min_eig), std::move(herm)};
    for (const auto& p : probes_) p(snap);
  }
  last_recorded_ = step_count_;
}

void Evolution::advance(std::size_t steps) {
  const auto stride = static_cast<std::size_t>(impl_->config.stride);
  const StepOptions opts{impl_->config.trace_tol, impl_->config.hbar, impl_->config.dissipator_step};
  for (std::size_t k = 0; k < steps; ++k) {
    double tr;
    if (impl_->stepper) {
      impl_->stepper->step(impl_->blocks, &series_.max_presym_defect);
      tr = impl_->blocks.trace();
    } else {
      impl_->dense = step(impl_->dense, *impl_->propagator, impl_->dissipator, opts, &series_.max_presym_defect);
      tr = impl_->dense.trace();
    }
    ++step_count_;
    impl_->dense.time = impl_->blocks.time = time();
    series_.max_trace_defect = std::max(series_.max_trace_defect, std::abs(tr - 1.0));
    if (step_count_ % stride == 0) record();
  }
  series_.steps = step_count_;
  if (last_recorded_ != step_count_) record();
}

void Evolution::advance_to(double t_end) {
  const double remaining = t_end - time();
  if (remaining <= 0.0) return;
  advance(static_cast<std::size_t>(std::ceil(remaining / impl_->config.dt - 1e-9)));
}

TimeSeries evolve(const DensityMatrix& rho0, const OperatorMatrix& h, std::span<const ChannelConfig> channels,
                  const EvolveConfig& config, std::span<const Observable> observables,
                  std::span<const Probe> probes) {
  Evolution ev(rho0, h, channels, config, {observables.begin(), observables.end()}, {probes.begin(), probes.end()});
  ev.advance_to(rho0.time + config.t_end);
  return ev.take_series();
}

}  // namespace h2ion
