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
#include <array>
#include <optional>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"
#include "spdcwerner/linalg.hpp"
#include "spdcwerner/two_qubit.hpp"

namespace spdcwerner {

/// p = rho_22 + rho_33 - rho_11 - rho_44 in the (HH, HV, VH, VV) basis.
inline double singlet_weight_extract(const DensityMatrix& rho) {
  const Eigen::Matrix4cd m = rho.as_two_qubit();
  const cplx p = m(1, 1) + m(2, 2) - m(0, 0) - m(3, 3);
  if (std::abs(p.imag()) > kPhysicalityTol) {
    throw ContractError("diagonal of density matrix has an imaginary part");
  }
  return p.real();
}

struct Concurrence {
  double concurrence = 0.0;
  double tangle = 0.0;
};

/// Wootters concurrence and tangle of a two-qubit state.
///
/// The spin-flip eigenvalues are obtained from the Hermitian matrix
/// sqrt(rho) rho~ sqrt(rho), which shares its spectrum with rho rho~.
inline Concurrence concurrence_tangle(const DensityMatrix& rho) {
  const Eigen::Matrix4cd m = rho.as_two_qubit();
  rho.require_physical();
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = yy(3, 0) = -1.0;
  yy(1, 2) = yy(2, 1) = 1.0;
  const Eigen::Matrix4cd flipped = yy * m.conjugate() * yy;
  const Eigen::Matrix4cd root = linalg::psd_sqrt(m);
  const Eigen::Matrix4cd h = root * flipped * root;
  const Eigen::VectorXd ev = linalg::hermitian_eigenvalues((h + h.adjoint()) / 2.0);
  const double floor = linalg::noise_floor(ev);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double c = std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
  return {c, c * c};
}

/// S = d/(d-1) (1 - Tr rho^2); d defaults to the matrix dimension.
inline double linear_entropy(const DensityMatrix& rho, int dim = 0) {
  const double d = dim > 0 ? dim : static_cast<double>(rho.dim());
  if (d < 2) throw DomainError("linear entropy needs dimension >= 2");
  const double purity = (rho.entries() * rho.entries()).trace().real();
  return d / (d - 1.0) * (1.0 - purity);
}

/// Tangle of a Werner state as a function of its linear entropy.
inline double tangle_from_entropy_werner(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("linear entropy must lie in [0, 1], got " + std::to_string(s));
  }
  if (s >= 8.0 / 9.0) return 0.0;
  const double t = 1.0 - 3.0 * std::sqrt(1.0 - s);
  return 0.25 * t * t;
}

/// Werner witness: half the sum of the HH, VV, DD, FF projectors minus the
/// LR and RL projectors.
inline Eigen::Matrix4cd witness_operator() {
  const auto proj = [](char a, char b) {
    const Eigen::Vector4cd v = product_ket(Polarization::named(a), Polarization::named(b));
    return Eigen::Matrix4cd(v * v.adjoint());
  };
  const Eigen::Matrix4cd w = proj('H', 'H') + proj('V', 'V') + proj('D', 'D') + proj('F', 'F') -
                             proj('L', 'R') - proj('R', 'L');
  return 0.5 * w;
}

inline double witness_expectation(const DensityMatrix& rho) {
  static const Eigen::Matrix4cd w = witness_operator();
  return (w * rho.as_two_qubit()).trace().real();
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("fidelity of matrices with dimensions " + std::to_string(rho.dim()) +
                         " and " + std::to_string(sigma.dim()));
  }
  const Eigen::MatrixXcd root = linalg::psd_sqrt(rho.entries());
  const double tr = linalg::trace_sqrt(root * sigma.entries() * root);
  return std::clamp(tr * tr, 0.0, 1.0);
}

/// Peres-Horodecki test on the transpose of the second qubit.
inline bool is_entangled_ppt(const DensityMatrix& rho) {
  const Eigen::Matrix4cd pt = linalg::partial_transpose_second(rho.as_two_qubit());
  return linalg::hermitian_eigenvalues(pt).minCoeff() < -kPhysicalityTol;
}

/// Werner family quantities as functions of the singlet weight.
struct WernerDescriptor {
  double p;

  bool entangled() const { return p > 1.0 / 3.0; }
  double linear_entropy() const { return 1.0 - p * p; }
  double witness() const { return (1.0 - 3.0 * p) / 4.0; }
  double concurrence() const { return std::max(0.0, (3.0 * p - 1.0) / 2.0); }
  double tangle() const { return concurrence() * concurrence(); }
};

struct MetricsReport {
  double p = 0.0;
  double tangle = 0.0;
  double linear_entropy = 0.0;
  double witness = 0.0;
  bool ppt_entangled = false;
  std::optional<double> fidelity_vs_theory;
};

inline MetricsReport metrics_report(const DensityMatrix& rho,
                                    const DensityMatrix* theory = nullptr) {
  MetricsReport r;
  r.p = singlet_weight_extract(rho);
  r.tangle = concurrence_tangle(rho).tangle;
  r.linear_entropy = linear_entropy(rho, 4);
  r.witness = witness_expectation(rho);
  r.ppt_entangled = is_entangled_ppt(rho);
  if (theory) r.fidelity_vs_theory = fidelity(*theory, rho);
  return r;
}

}  // namespace spdcwerner
