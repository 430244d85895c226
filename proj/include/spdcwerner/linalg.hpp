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

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"

namespace spdcwerner {

using cplx = std::complex<double>;

/// Eigenvalues below this are treated as numerical noise around zero.
inline constexpr double kPhysicalityTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

namespace linalg {

/// Ascending eigenvalues of a Hermitian matrix.
inline Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("hermitian eigendecomposition failed");
  }
  return es.eigenvalues();
}

inline double max_hermitian_defect(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Eigenvalues at or below this are rounding noise around zero.
inline double noise_floor(const Eigen::VectorXd& ev) {
  const double scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
}

/// Tr sqrt(m) for a positive semidefinite Hermitian m.
inline double trace_sqrt(const Eigen::MatrixXcd& m) {
  const Eigen::VectorXd ev = hermitian_eigenvalues((m + m.adjoint()) / 2.0);
  const double floor = noise_floor(ev);
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > floor) s += std::sqrt(ev(i));
  }
  return s;
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in [-kPhysicalityTol, 0) are zeroed; anything more negative is
/// rejected as unphysical.
inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("hermitian eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues();
  // Eigenvalues within rounding noise of zero would otherwise contribute
  // sqrt(noise) ~ 1e-8 to the root.
  const double floor = noise_floor(ev);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kPhysicalityTol) {
      throw PhysicalityError("matrix square root of a matrix with eigenvalue " +
                             std::to_string(ev(i)));
    }
    ev(i) = ev(i) <= floor ? 0.0 : std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Transpose of the second qubit of a 4x4 two-qubit operator.
inline Eigen::Matrix4cd partial_transpose_second(const Eigen::Matrix4cd& m) {
  Eigen::Matrix4cd out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp)
          out(2 * a + b, 2 * ap + bp) = m(2 * a + bp, 2 * ap + b);
  return out;
}

}  // namespace linalg
}  // namespace spdcwerner
