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
#include <compare>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/linalg.hpp"

namespace spdcwerner {

// Mode slots are ordered (1H, 1V, 2H, 2V) for the transmitted modes, followed
// by the same four slots for the reflected modes when present.
inline constexpr std::size_t kTransmittedModeCount = 4;
inline constexpr std::size_t kFullModeCount = 8;
inline constexpr std::array<std::size_t, 4> kTransmittedSlots{0, 1, 2, 3};

/// Photon numbers, one per mode slot.
class OccupationTuple {
 public:
  OccupationTuple() = default;
  explicit OccupationTuple(std::vector<int> occupations)
      : occ_(std::move(occupations)) {
    for (int n : occ_) {
      if (n < 0) throw DomainError("negative photon number in occupation tuple");
    }
  }
  OccupationTuple(std::initializer_list<int> occupations)
      : OccupationTuple(std::vector<int>(occupations)) {}

  std::size_t size() const { return occ_.size(); }
  int operator[](std::size_t slot) const { return occ_.at(slot); }
  const std::vector<int>& values() const { return occ_; }

  int total() const {
    int s = 0;
    for (int n : occ_) s += n;
    return s;
  }

  /// Restriction to the given slots, in the order given.
  OccupationTuple select(std::span<const std::size_t> slots) const {
    std::vector<int> out;
    out.reserve(slots.size());
    for (std::size_t s : slots) out.push_back(occ_.at(s));
    return OccupationTuple(std::move(out));
  }

  std::string label() const {
    std::string s = "|";
    for (std::size_t i = 0; i < occ_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(occ_[i]);
    }
    return s + ">";
  }

  auto operator<=>(const OccupationTuple&) const = default;
  bool operator==(const OccupationTuple&) const = default;

 private:
  std::vector<int> occ_;
};

/// Sparse pure state over a fixed number of mode slots. Tuples are kept in
/// lexicographic order, which fixes the basis order of derived matrices.
class PureState {
 public:
  using Amplitudes = std::map<OccupationTuple, cplx>;

  explicit PureState(std::size_t modeCount) : modes_(modeCount) {}
  PureState(std::size_t modeCount, Amplitudes amplitudes)
      : modes_(modeCount), amps_(std::move(amplitudes)) {
    for (const auto& [t, a] : amps_) {
      if (t.size() != modes_) {
        throw DimensionError("occupation tuple of length " + std::to_string(t.size()) +
                             " in a " + std::to_string(modes_) + "-mode state");
      }
    }
  }

  std::size_t mode_count() const { return modes_; }
  const Amplitudes& amplitudes() const { return amps_; }
  std::size_t support_size() const { return amps_.size(); }

  cplx amplitude(const OccupationTuple& t) const {
    auto it = amps_.find(t);
    return it == amps_.end() ? cplx{} : it->second;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [t, a] : amps_) s += std::norm(a);
    return s;
  }

  PureState normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw DegenerateInputError("cannot normalize a zero state");
    const double inv = 1.0 / std::sqrt(n2);
    Amplitudes out;
    for (const auto& [t, a] : amps_) out.emplace(t, a * inv);
    return PureState(modes_, std::move(out));
  }

 private:
  std::size_t modes_;
  Amplitudes amps_;
};

inline const std::vector<std::string>& two_qubit_labels() {
  static const std::vector<std::string> labels{"HH", "HV", "VH", "VV"};
  return labels;
}

/// Dense density matrix with basis labels. Fock-basis matrices additionally
/// carry the occupation tuple of every basis state.
///
/// Hermiticity is checked at construction. Positivity is not, since linear
/// tomography legitimately produces unphysical estimates; call
/// require_physical() where it matters.
class DensityMatrix {
 public:
  DensityMatrix(Eigen::MatrixXcd entries, std::vector<std::string> labels)
      : m_(std::move(entries)), labels_(std::move(labels)) {
    check_shape();
  }

  DensityMatrix(Eigen::MatrixXcd entries, std::vector<OccupationTuple> basis)
      : m_(std::move(entries)), fock_(std::move(basis)) {
    labels_.reserve(fock_.size());
    for (const auto& t : fock_) labels_.push_back(t.label());
    if (!fock_.empty()) {
      const std::size_t modes = fock_.front().size();
      for (const auto& t : fock_) {
        if (t.size() != modes) throw DimensionError("mixed mode counts in Fock basis");
      }
    }
    check_shape();
  }

  static DensityMatrix two_qubit(const Eigen::Matrix4cd& m) {
    return DensityMatrix(Eigen::MatrixXcd(m), two_qubit_labels());
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& entries() const { return m_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<OccupationTuple>& fock_basis() const { return fock_; }
  bool has_fock_basis() const { return !fock_.empty(); }
  std::size_t mode_count() const { return fock_.empty() ? 0 : fock_.front().size(); }

  bool is_two_qubit() const { return labels_ == two_qubit_labels(); }

  cplx trace() const { return m_.trace(); }

  double min_eigenvalue() const {
    if (m_.size() == 0) return 0.0;
    return linalg::hermitian_eigenvalues(m_).minCoeff();
  }

  bool is_physical(double tol = kPhysicalityTol) const { return min_eigenvalue() >= -tol; }

  void require_physical() const {
    const double lo = min_eigenvalue();
    if (lo < -kPhysicalityTol) {
      throw PhysicalityError("density matrix has eigenvalue " + std::to_string(lo));
    }
  }

  Eigen::Matrix4cd as_two_qubit() const {
    if (!is_two_qubit()) {
      throw ContractError("expected a 4x4 matrix in the (HH, HV, VH, VV) basis");
    }
    return m_;
  }

  /// Same basis, new entries.
  DensityMatrix with_entries(Eigen::MatrixXcd entries) const {
    if (has_fock_basis()) return DensityMatrix(std::move(entries), fock_);
    return DensityMatrix(std::move(entries), labels_);
  }

 private:
  void check_shape() const {
    if (m_.rows() != m_.cols()) throw DimensionError("density matrix must be square");
    if (static_cast<std::size_t>(m_.rows()) != labels_.size()) {
      throw DimensionError("basis label count does not match matrix dimension");
    }
    const double scale = std::max(1.0, m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0);
    if (linalg::max_hermitian_defect(m_) > kHermitianTol * scale) {
      throw PhysicalityError("density matrix is not Hermitian");
    }
  }

  Eigen::MatrixXcd m_;
  std::vector<std::string> labels_;
  std::vector<OccupationTuple> fock_;
};

/// |s><s| over the tuples present in s, in lexicographic order.
inline DensityMatrix outer_product(const PureState& s) {
  const auto n = static_cast<Eigen::Index>(s.support_size());
  Eigen::VectorXcd v(n);
  std::vector<OccupationTuple> basis;
  basis.reserve(s.support_size());
  Eigen::Index i = 0;
  for (const auto& [t, a] : s.amplitudes()) {
    basis.push_back(t);
    v(i++) = a;
  }
  return DensityMatrix(v * v.adjoint(), std::move(basis));
}

/// Traces out every slot not listed in `keep`. The kept basis consists of the
/// distinct restricted tuples, lexicographically ordered.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  if (!rho.has_fock_basis()) {
    throw DimensionError("partial trace needs a Fock-basis density matrix");
  }
  const std::size_t modes = rho.mode_count();
  if (keep.empty() || keep.size() > modes) {
    throw DimensionError("kept mode subset does not fit the mode set");
  }
  std::vector<bool> kept(modes, false);
  for (std::size_t s : keep) {
    if (s >= modes || kept[s]) throw DimensionError("invalid or repeated kept mode slot");
    kept[s] = true;
  }
  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < modes; ++s)
    if (!kept[s]) traced.push_back(s);

  const auto& basis = rho.fock_basis();
  std::map<OccupationTuple, Eigen::Index> keptIndex;
  std::map<OccupationTuple, std::vector<std::pair<Eigen::Index, OccupationTuple>>> byEnv;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    OccupationTuple sys = basis[i].select(keep);
    keptIndex.emplace(sys, 0);
    byEnv[basis[i].select(traced)].emplace_back(static_cast<Eigen::Index>(i), std::move(sys));
  }
  std::vector<OccupationTuple> outBasis;
  outBasis.reserve(keptIndex.size());
  for (auto& [t, idx] : keptIndex) {
    idx = static_cast<Eigen::Index>(outBasis.size());
    outBasis.push_back(t);
  }

  const auto n = static_cast<Eigen::Index>(outBasis.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  const auto& m = rho.entries();
  for (const auto& [env, members] : byEnv) {
    for (const auto& [i, si] : members) {
      const Eigen::Index r = keptIndex.at(si);
      for (const auto& [j, sj] : members) {
        out(r, keptIndex.at(sj)) += m(i, j);
      }
    }
  }
  return DensityMatrix(std::move(out), std::move(outBasis));
}

/// Scales rho to unit trace.
inline DensityMatrix normalize(const DensityMatrix& rho) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) {
    throw DegenerateInputError("cannot normalize a density matrix with trace " +
                               std::to_string(tr));
  }
  return rho.with_entries(rho.entries() / tr);
}

}  // namespace spdcwerner
