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

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"
#include "spdcwerner/spdc_source.hpp"
#include "spdcwerner/two_qubit.hpp"

namespace spdcwerner {

/// Largest pair number accepted by the brute-force propagation.
inline constexpr int kMaxBruteForcePairs = 4;

/// Relative trace weight the Werner series may leave unsummed.
inline constexpr double kSeriesTailTol = 1e-12;
inline constexpr int kMinSeriesTerms = 50;
inline constexpr int kDefaultSeriesCap = 2'000'000;

namespace detail {

inline double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline void require_open_unit(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw ParameterError("transmittivity must lie in (0, 1), got " + std::to_string(eta));
  }
}

}  // namespace detail

/// Sends every mode of a 4-slot state through a beam splitter of
/// transmittivity eta. Each creation operator becomes
/// sqrt(eta) a_t + i sqrt(1-eta) a_r; transmitted slots come first in the
/// 8-slot result.
inline PureState apply_beamsplitters(const PureState& s, double eta,
                                     int truncation = kDefaultStateTruncation) {
  detail::require_open_unit(eta);
  if (s.mode_count() != kTransmittedModeCount) {
    throw DimensionError("beam splitters act on 4-mode states");
  }
  const double te = std::sqrt(eta);
  const cplx re{0.0, std::sqrt(1.0 - eta)};

  PureState::Amplitudes out;
  for (const auto& [tuple, amp] : s.amplitudes()) {
    if (tuple.total() > 2 * truncation) {
      throw CapacityError("state has " + std::to_string(tuple.total()) +
                          " photons, above the supported " + std::to_string(2 * truncation));
    }
    // Per slot: amplitude of k transmitted and n-k reflected photons.
    std::array<std::vector<cplx>, kTransmittedModeCount> split;
    for (std::size_t slot = 0; slot < kTransmittedModeCount; ++slot) {
      const int n = tuple[slot];
      split[slot].resize(static_cast<std::size_t>(n) + 1);
      for (int k = 0; k <= n; ++k) {
        split[slot][static_cast<std::size_t>(k)] =
            std::sqrt(detail::binomial(n, k)) * std::pow(te, k) * std::pow(re, n - k);
      }
    }
    for (int k0 = 0; k0 <= tuple[0]; ++k0)
      for (int k1 = 0; k1 <= tuple[1]; ++k1)
        for (int k2 = 0; k2 <= tuple[2]; ++k2)
          for (int k3 = 0; k3 <= tuple[3]; ++k3) {
            const cplx a = amp * split[0][k0] * split[1][k1] * split[2][k2] * split[3][k3];
            OccupationTuple t{k0, k1, k2, k3, tuple[0] - k0, tuple[1] - k1, tuple[2] - k2,
                              tuple[3] - k3};
            out[t] += a;
          }
  }
  return PureState(kFullModeCount, std::move(out));
}

/// Expansion coefficients of the lossy n-pair term.
///
/// A(x, y) is the amplitude of the term with x exchanged pairs and y_j
/// transmitted photons in slot j (before the 1/(sqrt(n+1) n!) prefactor).
/// S and S~ are the real factors of the reduced transmitted-mode matrix.
/// Binomials with out-of-range arguments vanish.
class LossCoefficients {
 public:
  LossCoefficients(int n, double eta) : n_(n), eta_(eta) {
    if (n < 0) throw DomainError("pair number must be non-negative");
    detail::require_open_unit(eta);
    zeta_ = eta / (1.0 - eta);
  }

  int n() const { return n_; }
  double zeta() const { return zeta_; }

  /// Uses the reflected-mode phase +i sqrt(1-eta), matching apply_beamsplitters.
  cplx A(int x, const std::array<int, 4>& y) const {
    const std::array<int, 4> m{n_ - x, x, x, n_ - x};
    double mag = detail::binomial(n_, x);
    double fact = 1.0;
    int ty = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      mag *= detail::binomial(m[j], y[j]);
      if (mag == 0.0) return {};
      fact *= std::tgamma(y[j] + 1.0) * std::tgamma(m[j] - y[j] + 1.0);
      ty += y[j];
    }
    const double sign = (x % 2 == 0) ? 1.0 : -1.0;
    return sign * mag * std::pow(eta_, ty / 2.0) *
           std::pow(cplx(0.0, std::sqrt(1.0 - eta_)), 2 * n_ - ty) * std::sqrt(fact);
  }

  double S(int h, int k, int p) const {
    return std::pow(zeta_, p) * std::sqrt(detail::binomial(k, p) * detail::binomial(h, k - p));
  }

  double S_tilde(int h, int k, int p) const {
    return std::pow(zeta_, p) *
           std::sqrt(detail::binomial(n_ - k, p) * detail::binomial(n_ - h, k - h + p));
  }

 private:
  int n_;
  double eta_;
  double zeta_;
};

/// The lossy n-pair term on transmitted and reflected modes, assembled from
/// the A coefficients.
inline PureState psi_out_n(int n, double eta) {
  if (n > kMaxBruteForcePairs) {
    throw CapacityError("expansion supports at most " + std::to_string(kMaxBruteForcePairs) +
                        " pairs");
  }
  const LossCoefficients coef(n, eta);
  const double pref = 1.0 / (std::sqrt(n + 1.0) * std::tgamma(n + 1.0));
  PureState::Amplitudes amps;
  for (int x = 0; x <= n; ++x)
    for (int y1 = 0; y1 <= n - x; ++y1)
      for (int y2 = 0; y2 <= x; ++y2)
        for (int y3 = 0; y3 <= x; ++y3)
          for (int y4 = 0; y4 <= n - x; ++y4) {
            const cplx a = pref * coef.A(x, {y1, y2, y3, y4});
            amps[OccupationTuple{y1, y2, y3, y4, n - x - y1, x - y2, x - y3, n - x - y4}] += a;
          }
  return PureState(kFullModeCount, std::move(amps));
}

/// Reduced transmitted-mode matrix of the lossy n-pair term in closed form:
/// element <l|rho|l'> with l' = (l1+k-h, l2+h-k, l3+h-k, l4+k-h) equals
/// (-1)^{k+h} (1-eta)^{2n} S(h,k,l2) S(h,k,l3) S~(h,k,l1) S~(h,k,l4) / (n+1).
inline DensityMatrix rho_a_n_closed(int n, double eta) {
  if (n > kMaxBruteForcePairs) {
    throw CapacityError("closed form evaluated for at most " +
                        std::to_string(kMaxBruteForcePairs) + " pairs");
  }
  const LossCoefficients coef(n, eta);
  const double pref = std::pow(1.0 - eta, 2 * n) / (n + 1.0);
  std::map<std::pair<OccupationTuple, OccupationTuple>, double> elems;
  std::map<OccupationTuple, Eigen::Index> index;
  for (int k = 0; k <= n; ++k)
    for (int l1 = 0; l1 <= n - k; ++l1)
      for (int l2 = 0; l2 <= k; ++l2)
        for (int l3 = 0; l3 <= k; ++l3)
          for (int l4 = 0; l4 <= n - k; ++l4) {
            const OccupationTuple ket{l1, l2, l3, l4};
            index.emplace(ket, 0);
            for (int h = 0; h <= n; ++h) {
              const double v = coef.S(h, k, l2) * coef.S(h, k, l3) * coef.S_tilde(h, k, l1) *
                               coef.S_tilde(h, k, l4);
              if (v == 0.0) continue;
              const OccupationTuple bra{l1 + k - h, l2 + h - k, l3 + h - k, l4 + k - h};
              const double sign = ((k + h) % 2 == 0) ? 1.0 : -1.0;
              elems[{ket, bra}] += sign * pref * v;
            }
          }
  std::vector<OccupationTuple> basis;
  for (auto& [t, i] : index) {
    i = static_cast<Eigen::Index>(basis.size());
    basis.push_back(t);
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [kb, v] : elems) m(index.at(kb.first), index.at(kb.second)) = v;
  return DensityMatrix(std::move(m), std::move(basis));
}

/// Exact reduced state of the lossy n-pair term on the transmitted modes.
inline DensityMatrix rho_a_n_bruteforce(int n, double eta) {
  if (n > kMaxBruteForcePairs) {
    throw CapacityError("brute-force propagation supports at most " +
                        std::to_string(kMaxBruteForcePairs) + " pairs");
  }
  const PureState out = apply_beamsplitters(psi_minus_n(n), eta);
  return partial_trace(outer_product(out), kTransmittedSlots);
}

/// Restriction of a transmitted-mode density matrix to one photon per
/// spatial mode, relabelled (HH, HV, VH, VV). Not renormalized: the trace is
/// the coincidence probability.
inline DensityMatrix post_select_two_photon(const DensityMatrix& rho) {
  if (!rho.has_fock_basis() || rho.mode_count() != kTransmittedModeCount) {
    throw DimensionError("post-selection needs a 4-mode Fock-basis density matrix");
  }
  const std::array<OccupationTuple, 4> block{
      OccupationTuple{1, 0, 1, 0}, OccupationTuple{1, 0, 0, 1}, OccupationTuple{0, 1, 1, 0},
      OccupationTuple{0, 1, 0, 1}};
  std::array<Eigen::Index, 4> idx;
  idx.fill(-1);
  const auto& basis = rho.fock_basis();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t b = 0; b < block.size(); ++b) {
      if (basis[i] == block[b]) idx[b] = static_cast<Eigen::Index>(i);
    }
  }
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (idx[r] >= 0 && idx[c] >= 0) out(r, c) = rho(idx[r], idx[c]);
  return DensityMatrix::two_qubit(out);
}

/// Closed-form coincidence block of the lossy n-pair term:
/// n (1-eta)^{2n} zeta^2 / 6 times the Werner-shaped matrix with diagonal
/// (n-1, 2n+1, 2n+1, n-1) and HV/VH coherence -(n+2).
inline DensityMatrix rho_post_n_closed(int n, double eta) {
  if (n < 0) throw DomainError("pair number must be non-negative");
  detail::require_open_unit(eta);
  if (n == 0) return DensityMatrix::two_qubit(Eigen::Matrix4cd::Zero());
  const double zeta = eta / (1.0 - eta);
  const double pref = n * std::pow(1.0 - eta, 2 * n) * zeta * zeta / 6.0;
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(3, 3) = pref * (n - 1);
  m(1, 1) = m(2, 2) = pref * (2 * n + 1);
  m(1, 2) = m(2, 1) = -pref * (n + 2);
  return DensityMatrix::two_qubit(m);
}

/// Singlet weight of the normalized n-pair coincidence block.
inline double werner_weight_of_pairs(int n) {
  if (n < 1) throw DomainError("no coincidence block without pairs");
  return (n + 2.0) / (3.0 * n);
}

struct WernerSeries {
  DensityMatrix rho;
  int terms = 0;
  /// Bound on the relative trace weight of the terms not summed.
  double tail_bound = 0.0;
};

/// Incoherent sum over pair numbers of the coincidence blocks, weighted by the
/// pair-number distribution, then normalized.
///
/// Summation stops once at least kMinSeriesTerms terms are in and the
/// geometric bound on the remaining relative weight drops below
/// kSeriesTailTol. Reaching nMax first raises ConvergenceError.
inline WernerSeries rho_th_II_series(const GainChannelParams& params,
                                     int nMax = kDefaultSeriesCap) {
  detail::require_open_unit(params.eta());
  // Term n carries (n+1) gamma^{2n} rho_post^n; every factor common to all
  // terms is dropped and the powers are taken relative to n = 1, so term n is
  // (n+1) n y^{n-1} / 6 times the integer matrix of rho_post_n_closed.
  const double y = params.gamma_tilde() * params.gamma_tilde();
  double corner = 0.0, diag = 0.0, coherence = 0.0, total = 0.0;
  double ypow = 1.0;  // y^{n-1}
  double tail = std::numeric_limits<double>::infinity();
  int n = 1;
  for (; n <= nMax; ++n) {
    const double c = (n + 1.0) * n * ypow / 6.0;
    corner += c * (n - 1);
    diag += c * (2.0 * n + 1);
    coherence -= c * (n + 2.0);
    total += c * 6.0 * n;

    // Trace terms T_k = (k+1) k^2 y^{k-1}; the ratio T_{k+1}/T_k decreases in k.
    const double next = (n + 2.0) * (n + 1.0) * (n + 1.0) * ypow * y;
    const double ratio = (n + 2.0) * (n + 1.0) / (static_cast<double>(n) * n) * y;
    tail = ratio < 1.0 ? next / (1.0 - ratio) / total
                       : std::numeric_limits<double>::infinity();
    if (n >= kMinSeriesTerms && tail < kSeriesTailTol) break;
    ypow *= y;
  }
  if (!(tail < kSeriesTailTol)) {
    throw ConvergenceError("Werner series not converged after " + std::to_string(nMax) +
                           " terms; tail bound " + std::to_string(tail));
  }
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(3, 3) = corner / total;
  m(1, 1) = m(2, 2) = diag / total;
  m(1, 2) = m(2, 1) = coherence / total;
  return WernerSeries{DensityMatrix::two_qubit(m), std::min(n, nMax), tail};
}

inline DensityMatrix rho_th_II(const GainChannelParams& params, int nMax = kDefaultSeriesCap) {
  return rho_th_II_series(params, nMax).rho;
}

/// 1 / (2 gamma_tilde^2 + 1)
inline double singlet_weight_theory(const GainChannelParams& params) {
  const double gt = params.gamma_tilde();
  return 1.0 / (2.0 * gt * gt + 1.0);
}

}  // namespace spdcwerner
