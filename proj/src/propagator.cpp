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

#include "h2ion/propagator.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace h2ion {

void PtsimConfig::validate() const {
  if (doublings < 1) throw std::invalid_argument("ptsim doublings must be >= 1");
  if (taylor_terms < 1) throw std::invalid_argument("ptsim taylor_terms must be >= 1");
}

namespace {

DenseMatrix taylor_increment(const DenseMatrix& a, double dt, const PtsimConfig& config) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix exponential needs a square matrix");
  config.validate();
  const double eps = std::ldexp(dt, -config.doublings);
  const DenseMatrix step = a * eps;
  DenseMatrix term = step;
  DenseMatrix t = step;
  for (int j = 2; j <= config.taylor_terms; ++j) {
    term = (term * step) / static_cast<double>(j);
    t += term;
  }
  return t;
}

}  // namespace

DenseMatrix ptsim_expm(const DenseMatrix& a, double dt, const PtsimConfig& config) {
  DenseMatrix t = taylor_increment(a, dt, config);
  DenseMatrix sq(t.rows(), t.cols());
  for (int n = 0; n < config.doublings; ++n) {
    sq.noalias() = t * t;
    t = 2.0 * t + sq;
  }
  t.diagonal().array() += 1.0;
  return t;
}

DenseMatrix naive_squaring_expm(const DenseMatrix& a, double dt, const PtsimConfig& config) {
  DenseMatrix s = taylor_increment(a, dt, config);
  s.diagonal().array() += 1.0;
  DenseMatrix sq(s.rows(), s.cols());
  for (int n = 0; n < config.doublings; ++n) {
    sq.noalias() = s * s;
    s = sq;
  }
  return s;
}

DenseMatrix oracle_expm(const DenseMatrix& h, double dt) {
  if (h.rows() != h.cols()) throw std::invalid_argument("oracle_expm needs a square matrix");
  if (max_abs(h - h.adjoint()) > 1e-12) throw std::invalid_argument("oracle_expm needs a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(1.0, -lambda(i) * dt);
  const DenseMatrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

std::vector<std::vector<Eigen::Index>> connected_components(const SparseMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value() == Complex(0.0, 0.0)) continue;
      auto a = find(it.row()), b = find(it.col());
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<std::ptrdiff_t> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return groups;
}

Propagator make_propagator(const OperatorMatrix& h, double dt, const PtsimConfig& config, double hbar) {
  if (h.m.rows() != h.m.cols()) throw std::invalid_argument("Hamiltonian must be square");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  config.validate();
  const Complex scale(0.0, -1.0 / hbar);
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (const auto& comp : connected_components(h.m)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    DenseMatrix block = DenseMatrix::Zero(k, k);
    for (Eigen::Index c = 0; c < k; ++c)
      for (Eigen::Index r = 0; r < k; ++r) block(r, c) = h.m.coeff(comp[r], comp[c]);
    const DenseMatrix u = ptsim_expm(scale * block, dt, config);
    for (Eigen::Index c = 0; c < k; ++c)
      for (Eigen::Index r = 0; r < k; ++r)
        if (u(r, c) != Complex(0.0, 0.0)) triplets.emplace_back(comp[r], comp[c], u(r, c));
  }
  Propagator p;
  p.u.resize(h.m.rows(), h.m.cols());
  p.u.setFromTriplets(triplets.begin(), triplets.end());
  p.config = config;
  p.dt = dt;
  p.source_hash = matrix_hash(h.m);
  return p;
}

std::uint64_t matrix_hash(const SparseMatrix& m) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const auto rows = m.rows();
  mix(&rows, sizeof rows);
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const Eigen::Index r = it.row(), c = it.col();
      const double re = it.value().real(), im = it.value().imag();
      mix(&r, sizeof r);
      mix(&c, sizeof c);
      mix(&re, sizeof re);
      mix(&im, sizeof im);
    }
  return h;
}

double unitarity_defect(const DenseMatrix& u) {
  DenseMatrix d = u.adjoint() * u;
  d.diagonal().array() -= 1.0;
  return max_abs(d);
}

double max_abs(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace h2ion
