// Copyright 2026 The spdcwerner Authors
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

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "spdcwerner/fock.hpp"

namespace spdcwerner::testing {

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = {nd(rng), nd(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
  return q;
}

/// Random full-rank-ish density matrix (Ginibre ensemble).
inline Eigen::MatrixXcd random_density(int n, std::mt19937_64& rng, int rank = -1) {
  if (rank < 0) rank = n;
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd g(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = {nd(rng), nd(rng)};
  Eigen::MatrixXcd r = g * g.adjoint();
  r /= r.trace().real();
  return (r + r.adjoint()) / 2.0;
}

/// Random single-qubit mixed state with Bloch radius <= 1.
inline Eigen::Matrix2cd random_qubit_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d r;
  do {
    r = {u(rng), u(rng), u(rng)};
  } while (r.norm() > 1.0);
  Eigen::Matrix2cd m;
  m << (1 + r(2)) / 2, std::complex<double>(r(0), -r(1)) / 2.0,
      std::complex<double>(r(0), r(1)) / 2.0, (1 - r(2)) / 2;
  return m;
}

}  // namespace spdcwerner::testing
