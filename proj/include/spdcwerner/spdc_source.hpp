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

#include <cmath>
#include <string>
#include <vector>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"

namespace spdcwerner {

inline constexpr int kDefaultStateTruncation = 6;
inline constexpr int kDefaultSeriesTerms = 200;

/// Nonlinear gain g and symmetric channel transmittivity eta, with the
/// quantities derived from them.
class GainChannelParams {
 public:
  GainChannelParams(double g, double eta) : g_(g), eta_(eta) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw ParameterError("gain must be finite and non-negative, got " + std::to_string(g));
    }
    if (!(eta >= 0.0 && eta <= 1.0)) {
      throw ParameterError("transmittivity must lie in [0, 1], got " + std::to_string(eta));
    }
  }

  double g() const { return g_; }
  double eta() const { return eta_; }

  double gamma() const { return std::tanh(g_); }
  double cosh_g() const { return std::cosh(g_); }
  double gamma_tilde() const { return (1.0 - eta_) * std::tanh(g_); }
  double mean_photons() const {
    const double s = std::sinh(g_);
    return s * s;
  }
  /// eta / (1 - eta); undefined for a lossless channel.
  double zeta() const {
    if (eta_ >= 1.0) throw ParameterError("zeta is undefined for eta = 1");
    return eta_ / (1.0 - eta_);
  }

 private:
  double g_;
  double eta_;
};

/// The n-pair singlet term: sum_m (-1)^m |n-m, m, m, n-m> / sqrt(n+1) over
/// the slots (1H, 1V, 2H, 2V).
inline PureState psi_minus_n(int n, int truncation = kDefaultStateTruncation) {
  if (n < 0) throw DomainError("pair number must be non-negative");
  if (n > truncation) {
    throw CapacityError("pair number " + std::to_string(n) + " exceeds truncation " +
                        std::to_string(truncation));
  }
  const double amp = 1.0 / std::sqrt(static_cast<double>(n + 1));
  PureState::Amplitudes amps;
  for (int m = 0; m <= n; ++m) {
    amps.emplace(OccupationTuple{n - m, m, m, n - m}, (m % 2 == 0 ? amp : -amp));
  }
  return PureState(kTransmittedModeCount, std::move(amps));
}

/// Probability of the n-pair term, (n+1) tanh(g)^{2n} / cosh(g)^4, for n in [0, nMax].
inline std::vector<double> pair_number_weights(const GainChannelParams& params, int nMax) {
  if (nMax < 0) throw DomainError("nMax must be non-negative");
  const double gamma2 = params.gamma() * params.gamma();
  const double c2 = params.cosh_g() * params.cosh_g();
  std::vector<double> w(static_cast<std::size_t>(nMax) + 1);
  double power = 1.0 / (c2 * c2);
  for (int n = 0; n <= nMax; ++n) {
    w[static_cast<std::size_t>(n)] = (n + 1) * power;
    power *= gamma2;
  }
  return w;
}

inline double mean_photons_per_mode(const GainChannelParams& params) {
  return params.mean_photons();
}

}  // namespace spdcwerner
