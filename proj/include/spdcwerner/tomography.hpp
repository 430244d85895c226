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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"
#include "spdcwerner/linalg.hpp"
#include "spdcwerner/two_qubit.hpp"

namespace spdcwerner {

/// Two-photon projector |a>|b><a|<b| set by the two polarization analyzers.
struct ProjectorSetting {
  std::string label;
  Polarization a;
  Polarization b;

  static ProjectorSetting named(char a, char b) {
    return {std::string{a, b}, Polarization::named(a), Polarization::named(b)};
  }

  Eigen::Matrix4cd projector() const {
    const Eigen::Vector4cd v = product_ket(a, b);
    return v * v.adjoint();
  }
};

struct CountRecord {
  ProjectorSetting setting;
  std::uint64_t counts = 0;
  double duration_s = 1.0;
  std::uint64_t seed = 0;
};

/// Pairwise combinations of {H, V, D, L} on the two arms.
inline std::vector<ProjectorSetting> tomography_settings() {
  static constexpr std::array<char, 4> states{'H', 'V', 'D', 'L'};
  std::vector<ProjectorSetting> out;
  for (char a : states)
    for (char b : states) out.push_back(ProjectorSetting::named(a, b));
  return out;
}

/// The six witness projectors followed by HV and VH for normalization.
inline std::vector<ProjectorSetting> witness_settings() {
  std::vector<ProjectorSetting> out;
  for (const char* s : {"HH", "VV", "DD", "FF", "LR", "RL", "HV", "VH"}) {
    out.push_back(ProjectorSetting::named(s[0], s[1]));
  }
  return out;
}

/// Tomography settings followed by the witness settings they do not already
/// contain.
inline std::vector<ProjectorSetting> combined_settings() {
  auto out = tomography_settings();
  for (const auto& w : witness_settings()) {
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const ProjectorSetting& s) { return s.label == w.label; });
    if (!seen) out.push_back(w);
  }
  return out;
}

inline double born_probability(const DensityMatrix& rho, const ProjectorSetting& s) {
  const double p = (rho.as_two_qubit() * s.projector()).trace().real();
  return std::clamp(p, 0.0, 1.0);
}

/// Poisson coincidence counts with mean totalPerSetting * Tr[rho P].
inline std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                                std::span<const ProjectorSetting> settings,
                                                std::uint64_t totalPerSetting,
                                                std::uint64_t seed, double duration_s = 1.0) {
  if (totalPerSetting == 0) throw DomainError("totalPerSetting must be positive");
  std::mt19937_64 rng(seed);
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    const double mean = static_cast<double>(totalPerSetting) * born_probability(rho, s);
    std::uint64_t n = 0;
    if (mean > 0.0) {
      std::poisson_distribution<std::uint64_t> pd(mean);
      n = pd(rng);
    }
    out.push_back({s, n, duration_s, seed});
  }
  return out;
}

/// Noiseless counts: the Poisson means rounded to integers.
inline std::vector<CountRecord> expected_counts(const DensityMatrix& rho,
                                                std::span<const ProjectorSetting> settings,
                                                std::uint64_t totalPerSetting) {
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    const double mean = static_cast<double>(totalPerSetting) * born_probability(rho, s);
    out.push_back({s, static_cast<std::uint64_t>(std::llround(mean)), 1.0, 0});
  }
  return out;
}

namespace detail {

inline std::array<Eigen::Matrix2cd, 4> paulis() {
  Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity(), x, y, z;
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  return {i2, x, y, z};
}

/// sigma_mu (x) sigma_nu / 4, mu-major.
inline const std::array<Eigen::Matrix4cd, 16>& two_qubit_operator_basis() {
  static const std::array<Eigen::Matrix4cd, 16> basis = [] {
    std::array<Eigen::Matrix4cd, 16> b;
    const auto p = paulis();
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        Eigen::Matrix4cd k;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int r = 0; r < 2; ++r)
              for (int c = 0; c < 2; ++c) k(2 * i + r, 2 * j + c) = p[mu](i, j) * p[nu](r, c);
        b[4 * mu + nu] = k / 4.0;
      }
    return b;
  }();
  return basis;
}

}  // namespace detail

namespace detail {

inline double checked_duration(const CountRecord& r) {
  if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
    throw ContractError("setting " + r.setting.label + " has non-positive integration time");
  }
  return r.duration_s;
}

}  // namespace detail

/// Linear inversion of the counts against the two-qubit operator basis. The
/// estimate is Hermitian with unit trace but may have negative eigenvalues.
/// Counts are taken to scale with each record's integration time.
inline DensityMatrix linear_reconstruction(std::span<const CountRecord> records) {
  if (records.size() < 16) {
    throw DesignError("linear inversion needs at least 16 settings, got " +
                      std::to_string(records.size()));
  }
  const auto& basis = detail::two_qubit_operator_basis();
  const auto m = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd design(m, 16);
  Eigen::VectorXd counts(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Matrix4cd proj =
        detail::checked_duration(records[i]) * records[i].setting.projector();
    for (int k = 0; k < 16; ++k) design(i, k) = (basis[k] * proj).trace().real();
    counts(i) = static_cast<double>(records[i].counts);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < 16) {
    throw DesignError("settings are not informationally complete (design rank " +
                      std::to_string(svd.rank()) + ")");
  }
  const Eigen::VectorXd coef = svd.solve(counts);
  if (!(coef(0) > 0.0)) throw DegenerateInputError("counts carry no signal");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int k = 0; k < 16; ++k) rho += coef(k) * basis[k];
  rho /= coef(0);
  rho = (rho + rho.adjoint()).eval() / 2.0;
  return DensityMatrix::two_qubit(rho);
}

struct MlOptions {
  int max_iterations = 20000;
  double gradient_tol = 1e-8;
  double relative_ll_tol = 1e-12;
};

struct MlResult {
  DensityMatrix rho;
  /// Poisson log-likelihood sum_i [n_i log mu_i - mu_i], without the n_i! term.
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

namespace detail {

// rho is parameterized as T^dagger T / Tr(T^dagger T) with T lower
// triangular: four real diagonal entries, then (re, im) of the six entries
// below the diagonal, row by row.
using MlParams = Eigen::Matrix<double, 16, 1>;

inline Eigen::Matrix4cd lower_factor(const MlParams& x) {
  Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) t(i, i) = x(i);
  int k = 4;
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) t(i, j) = cplx(x(k), x(k + 1));
  return t;
}

inline MlParams params_from_state(const Eigen::Matrix4cd& rho) {
  // Clip to the physical set and pull slightly inside it, then factor
  // rho = U U^dagger with U upper triangular, so that T = U^dagger.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  if (!(ev.sum() > 0.0)) ev.setConstant(1.0);
  ev /= ev.sum();
  constexpr double mix = 1e-2;
  Eigen::Matrix4cd inside = (1.0 - mix) * es.eigenvectors() * ev.asDiagonal() *
                                es.eigenvectors().adjoint() +
                            mix / 4.0 * Eigen::Matrix4cd::Identity();
  Eigen::Matrix4cd rev = inside.reverse();  // J rho J
  Eigen::LLT<Eigen::Matrix4cd> llt(rev);
  const Eigen::Matrix4cd l = llt.matrixL();
  const Eigen::Matrix4cd t = l.adjoint().reverse();  // J L^dagger J
  MlParams x;
  for (int i = 0; i < 4; ++i) x(i) = t(i, i).real();
  int k = 4;
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) {
      x(k) = t(i, j).real();
      x(k + 1) = t(i, j).imag();
    }
  return x;
}

class PoissonObjective {
 public:
  explicit PoissonObjective(std::span<const CountRecord> records) {
    for (const auto& r : records) {
      projectors_.push_back(checked_duration(r) * r.setting.projector());
      counts_.push_back(static_cast<double>(r.counts));
      total_ += static_cast<double>(r.counts);
    }
  }

  double total_counts() const { return total_; }

  /// Negative profiled log-likelihood per count; the common flux per setting
  /// is set to its optimum for the given state. Returns +inf outside the
  /// support of the data.
  double value(const MlParams& x, MlParams* grad = nullptr) const {
    const Eigen::Matrix4cd t = lower_factor(x);
    const Eigen::Matrix4cd a = t.adjoint() * t;
    const std::size_t m = projectors_.size();
    std::vector<double> q(m);
    double qsum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      q[i] = (a * projectors_[i]).trace().real();
      qsum += q[i];
    }
    if (!(qsum > 0.0)) return std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (counts_[i] == 0.0) continue;
      if (!(q[i] > 0.0)) return std::numeric_limits<double>::infinity();
      ll += counts_[i] * std::log(q[i] / qsum);
    }
    if (grad) {
      Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
      for (std::size_t i = 0; i < m; ++i) {
        const double w = (counts_[i] == 0.0 ? 0.0 : counts_[i] / q[i]) - total_ / qsum;
        g += w * projectors_[i];
      }
      const Eigen::Matrix4cd k = g * t.adjoint();
      for (int i = 0; i < 4; ++i) (*grad)(i) = 2.0 * k(i, i).real();
      int idx = 4;
      for (int i = 1; i < 4; ++i)
        for (int j = 0; j < i; ++j, idx += 2) {
          (*grad)(idx) = 2.0 * k(j, i).real();
          (*grad)(idx + 1) = -2.0 * k(j, i).imag();
        }
      *grad *= -1.0 / total_;
    }
    return -ll / total_;
  }

  /// sum_i [n_i log mu_i - mu_i] with mu_i = N_hat Tr[rho P_i].
  double log_likelihood(const Eigen::Matrix4cd& rho) const {
    double qsum = 0.0;
    std::vector<double> q(projectors_.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = std::max((rho * projectors_[i]).trace().real(), 0.0);
      qsum += q[i];
    }
    const double flux = total_ / qsum;
    double ll = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double mu = flux * q[i];
      if (counts_[i] > 0.0) ll += counts_[i] * std::log(mu);
      ll -= mu;
    }
    return ll;
  }

 private:
  std::vector<Eigen::Matrix4cd> projectors_;
  std::vector<double> counts_;
  double total_ = 0.0;
};

}  // namespace detail

/// Maximum-likelihood state estimate under independent Poisson counts with a
/// common (fitted) flux, scaled by each record's integration time.
///
/// Quasi-Newton (BFGS with backtracking) over the 16 real parameters of the
/// lower-triangular factor. Starts from I/4, or from `init` pulled into the
/// interior of the physical set.
inline MlResult ml_reconstruction(std::span<const CountRecord> records,
                                  const std::optional<DensityMatrix>& init = std::nullopt,
                                  const MlOptions& opts = {}) {
  // Informational completeness is checked through the linear design.
  const DensityMatrix linear = linear_reconstruction(records);
  (void)linear;

  const detail::PoissonObjective objective(records);
  using detail::MlParams;
  MlParams x = init ? detail::params_from_state(init->as_two_qubit())
                    : detail::params_from_state(Eigen::Matrix4cd::Identity() / 4.0);
  MlParams g;
  double f = objective.value(x, &g);
  if (!std::isfinite(f)) throw DegenerateInputError("initial state has zero likelihood");

  Eigen::Matrix<double, 16, 16> hinv = Eigen::Matrix<double, 16, 16>::Identity();
  int iter = 0;
  bool converged = g.norm() < opts.gradient_tol;
  while (!converged && iter < opts.max_iterations) {
    ++iter;
    MlParams dir = -hinv * g;
    if (dir.dot(g) >= 0.0) {
      hinv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    MlParams xn, gn;
    double fn = std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      xn = x + step * dir;
      fn = objective.value(xn, &gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * step * dir.dot(g)) break;
    }
    if (!std::isfinite(fn) || fn > f) {
      // No decrease along the quasi-Newton direction; retry steepest descent once.
      if (hinv.isIdentity()) {
        converged = true;
        break;
      }
      hinv.setIdentity();
      continue;
    }
    const MlParams s = xn - x;
    const MlParams y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix<double, 16, 16> id = Eigen::Matrix<double, 16, 16>::Identity();
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    const double rel = std::abs(f - fn) / std::max(std::abs(f), 1.0);
    x = xn;
    f = fn;
    g = gn;
    converged = g.norm() < opts.gradient_tol || rel < opts.relative_ll_tol;
  }
  if (!converged) {
    throw ConvergenceError("maximum-likelihood search stopped after " + std::to_string(iter) +
                           " iterations; gradient norm " + std::to_string(g.norm()) +
                           ", objective " + std::to_string(f));
  }

  const Eigen::Matrix4cd t = detail::lower_factor(x);
  Eigen::Matrix4cd rho = t.adjoint() * t;
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()).eval() / 2.0;
  return MlResult{DensityMatrix::two_qubit(rho), objective.log_likelihood(rho), iter, g.norm()};
}

struct WitnessEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Witness expectation from the eight witness settings. The coincidence rate
/// per setting is taken from the complete basis HH, HV, VH, VV and shared by
/// the diagonal and circular pairs.
inline WitnessEstimate witness_from_counts(std::span<const CountRecord> records) {
  std::map<std::string, const CountRecord*> byLabel;
  for (const auto& r : records) {
    const std::string key = r.setting.a.name() + r.setting.b.name();
    if (!byLabel.emplace(key, &r).second) {
      throw ContractError("witness setting " + key + " appears more than once");
    }
  }
  struct Term {
    const char* key;
    double sign;  // coefficient in the witness numerator
    bool inBasis;
  };
  static constexpr std::array<Term, 8> terms{{{"HH", 1.0, true},
                                              {"VV", 1.0, true},
                                              {"DD", 1.0, false},
                                              {"FF", 1.0, false},
                                              {"LR", -1.0, false},
                                              {"RL", -1.0, false},
                                              {"HV", 0.0, true},
                                              {"VH", 0.0, true}}};
  std::array<double, 8> n{};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto it = byLabel.find(terms[i].key);
    if (it == byLabel.end()) {
      throw ContractError(std::string("missing witness setting ") + terms[i].key);
    }
    n[i] = static_cast<double>(it->second->counts);
  }
  for (const auto& t : terms) {
    if (byLabel.at(t.key)->duration_s != byLabel.at("HH")->duration_s) {
      throw ContractError("witness settings must share one integration time");
    }
  }
  double numer = 0.0, rate = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    numer += 0.5 * terms[i].sign * n[i];
    if (terms[i].inBasis) rate += n[i];
  }
  if (!(rate > 0.0)) throw DegenerateInputError("no coincidences in the H/V basis");
  const double w = numer / rate;
  double var = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double d = 0.5 * terms[i].sign / rate - (terms[i].inBasis ? numer / (rate * rate) : 0.0);
    var += d * d * n[i];
  }
  return {w, std::sqrt(var)};
}

}  // namespace spdcwerner
