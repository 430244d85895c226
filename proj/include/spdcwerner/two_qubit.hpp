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
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"

namespace spdcwerner {

/// Single-photon polarization state in the (H, V) basis.
class Polarization {
 public:
  /// Named states H, V, D, F, L, R.
  static Polarization named(char name) {
    const double s = 1.0 / std::sqrt(2.0);
    const cplx i{0.0, 1.0};
    switch (name) {
      case 'H': return Polarization("H", {1.0, 0.0});
      case 'V': return Polarization("V", {0.0, 1.0});
      case 'D': return Polarization("D", {s, s});
      case 'F': return Polarization("F", {s, -s});
      case 'L': return Polarization("L", {s, s * i});
      case 'R': return Polarization("R", {s, -s * i});
      default: throw DomainError(std::string("unknown polarization '") + name + "'");
    }
  }

  /// Pure state with Bloch vector (x, y, z); z = +1 is H, y = +1 is L.
  static Polarization bloch(double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    if (!(r > 0.0)) throw DomainError("Bloch vector must be non-zero");
    x /= r;
    y /= r;
    z /= r;
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    const double phi = std::atan2(y, x);
    char buf[96];
    std::snprintf(buf, sizeof buf, "bloch:%.12g:%.12g:%.12g", x, y, z);
    return Polarization(buf, {std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)});
  }

  const std::string& name() const { return name_; }
  const Eigen::Vector2cd& ket() const { return ket_; }

  Eigen::Vector3d bloch_vector() const {
    const cplx a = ket_(0), b = ket_(1);
    const cplx ab = std::conj(a) * b;
    return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
  }

 private:
  Polarization(std::string name, Eigen::Vector2cd ket) : name_(std::move(name)), ket_(ket) {
    ket_.normalize();
  }

  std::string name_;
  Eigen::Vector2cd ket_;
};

inline Eigen::Vector4cd product_ket(const Polarization& a, const Polarization& b) {
  Eigen::Vector4cd v;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) v(2 * i + j) = a.ket()(i) * b.ket()(j);
  return v;
}

/// (|HV> - |VH>) / sqrt(2)
inline Eigen::Vector4cd singlet_ket() {
  const double s = 1.0 / std::sqrt(2.0);
  return Eigen::Vector4cd(0.0, s, -s, 0.0);
}

/// p |singlet><singlet| + (1 - p) I / 4
inline DensityMatrix werner_state(double p) {
  const Eigen::Vector4cd s = singlet_ket();
  const Eigen::Matrix4cd m =
      p * (s * s.adjoint()) + (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity();
  return DensityMatrix::two_qubit(m);
}

inline DensityMatrix maximally_mixed_two_qubit() {
  return DensityMatrix::two_qubit(Eigen::Matrix4cd::Identity() / 4.0);
}

}  // namespace spdcwerner
