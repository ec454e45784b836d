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

#include <random>

#include <Eigen/Eigenvalues>

#include "h2ion/operators.hpp"

namespace h2ion::testing {

inline DenseMatrix random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

/// Random Hermitian matrix rescaled to spectral norm `norm`.
inline DenseMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n, double norm) {
  DenseMatrix a = random_complex(rng, n, n);
  DenseMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  const double s = es.eigenvalues().cwiseAbs().maxCoeff();
  h *= norm / s;
  return 0.5 * (h + h.adjoint());
}

/// Random density matrix of full rank.
inline DenseMatrix random_density(std::mt19937_64& rng, Eigen::Index n) {
  DenseMatrix a = random_complex(rng, n, n);
  DenseMatrix r = a * a.adjoint();
  r /= r.trace().real();
  return 0.5 * (r + r.adjoint());
}

}  // namespace h2ion::testing
