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
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "spdcwerner/errors.hpp"
#include "spdcwerner/spdc_source.hpp"

namespace spdcwerner {

struct CalibrationPoint {
  double pump_power = 0.0;  // arbitrary units
  double rate = 0.0;        // counts per second
  int detector = 1;         // 1 or 2
};

struct CalibrationFit {
  double gain_scale = 0.0;          // g = gain_scale * sqrt(power)
  std::array<double, 2> eta{};      // per detector
  double repetition_rate = 0.0;     // R, fixed input
  double max_power = 0.0;
  double g_max = 0.0;               // gain at max_power
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // (a, eta1, eta2)
  std::vector<double> residuals;    // (model - rate) / max(rate, 1), input order
  int iterations = 0;
};

/// Singles rate R eta G^2 / (1 - (1 - eta) G^2), G = tanh g.
inline double count_rate_model(double g, double eta, double repetitionRate) {
  const double x = std::tanh(g) * std::tanh(g);
  return repetitionRate * eta * x / (1.0 - (1.0 - eta) * x);
}

/// eta * sinh^2 g, the mean transmitted photon number per mode. The
/// high-loss treatment needs this to be small.
inline double hl_condition_check(const GainChannelParams& params) {
  return params.eta() * params.mean_photons();
}

inline constexpr double kHighLossWarnThreshold = 0.1;

namespace detail {

struct CalibrationFunctor : Eigen::DenseFunctor<double> {
  CalibrationFunctor(std::span<const CalibrationPoint> pts, double r)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(pts.size())), points(pts), R(r) {}

  static double weight(double rate) { return 1.0 / std::max(rate, 1.0); }

  int operator()(const InputType& x, ValueType& fvec) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const double g = x(0) * std::sqrt(p.pump_power);
      const double eta = x(p.detector);
      fvec(static_cast<Eigen::Index>(i)) =
          (count_rate_model(g, eta, R) - p.rate) * weight(p.rate);
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& jac) const {
    jac.setZero();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const auto row = static_cast<Eigen::Index>(i);
      const double sp = std::sqrt(p.pump_power);
      const double g = x(0) * sp;
      const double eta = x(p.detector);
      const double th = std::tanh(g);
      const double xx = th * th;
      const double den = 1.0 - (1.0 - eta) * xx;
      const double sech2 = 1.0 - xx;
      const double w = weight(p.rate);
      jac(row, 0) = w * R * eta / (den * den) * 2.0 * th * sech2 * sp;
      jac(row, p.detector) = w * R * xx * (1.0 - xx) / (den * den);
    }
    return 0;
  }

  std::span<const CalibrationPoint> points;
  double R;
};

}  // namespace detail

/// Least-squares fit of the singles rates of both detectors with
/// g = gain_scale * sqrt(power) shared between them. Residuals are relative
/// to the measured rate.
inline CalibrationFit fit_gain(std::span<const CalibrationPoint> points, double repetitionRate) {
  if (!(repetitionRate > 0.0)) throw FitError("repetition rate must be positive");
  std::array<std::set<double>, 2> powers;
  double maxPower = 0.0;
  for (const auto& p : points) {
    if (p.detector != 1 && p.detector != 2) {
      throw FitError("detector id must be 1 or 2, got " + std::to_string(p.detector));
    }
    if (!(p.pump_power >= 0.0) || !(p.rate >= 0.0)) {
      throw FitError("calibration points need non-negative power and rate");
    }
    powers[p.detector - 1].insert(p.pump_power);
    maxPower = std::max(maxPower, p.pump_power);
  }
  for (int d = 0; d < 2; ++d) {
    if (powers[d].size() < 5) {
      throw FitError("detector " + std::to_string(d + 1) + " has " +
                     std::to_string(powers[d].size()) + " distinct powers; at least 5 needed");
    }
  }
  if (!(maxPower > 0.0)) throw FitError("no positive pump power in the data");

  detail::CalibrationFunctor functor(points, repetitionRate);
  const auto m = static_cast<Eigen::Index>(points.size());

  // Coarse grid for the starting point; the detectors decouple once the
  // gain scale is fixed.
  Eigen::VectorXd x(3);
  {
    double best = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia <= 80; ++ia) {
      const double gmax = 0.02 * std::pow(200.0, ia / 80.0);
      const double a = gmax / std::sqrt(maxPower);
      double cost = 0.0;
      std::array<double, 2> etaBest{};
      for (int d = 1; d <= 2; ++d) {
        double bestD = std::numeric_limits<double>::infinity();
        for (int ie = 0; ie <= 100; ++ie) {
          const double eta = 1e-5 * std::pow(1e5, ie / 100.0);
          double c = 0.0;
          for (const auto& p : points) {
            if (p.detector != d) continue;
            const double r = (count_rate_model(a * std::sqrt(p.pump_power), eta, repetitionRate) -
                              p.rate) *
                             detail::CalibrationFunctor::weight(p.rate);
            c += r * r;
          }
          if (c < bestD) {
            bestD = c;
            etaBest[d - 1] = eta;
          }
        }
        cost += bestD;
      }
      if (cost < best) {
        best = cost;
        x << a, etaBest[0], etaBest[1];
      }
    }
  }

  Eigen::LevenbergMarquardt<detail::CalibrationFunctor> lm(functor);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  lm.setMaxfev(10000);
  const auto status = lm.minimize(x);
  using Eigen::LevenbergMarquardtSpace::Status;
  if (status == Status::ImproperInputParameters || status == Status::TooManyFunctionEvaluation ||
      !x.allFinite()) {
    throw FitError("calibration fit did not converge (status " +
                   std::to_string(static_cast<int>(status)) + ")");
  }
  if (!(x(0) > 0.0)) throw FitError("fitted gain scale is not positive");
  for (int d = 1; d <= 2; ++d) {
    if (!(x(d) > 0.0 && x(d) <= 1.0)) {
      throw FitError("fitted efficiency of detector " + std::to_string(d) + " is " +
                     std::to_string(x(d)) + ", outside (0, 1]");
    }
  }

  CalibrationFit fit;
  fit.gain_scale = x(0);
  fit.eta = {x(1), x(2)};
  fit.repetition_rate = repetitionRate;
  fit.max_power = maxPower;
  fit.g_max = x(0) * std::sqrt(maxPower);
  fit.iterations = static_cast<int>(lm.iterations());

  Eigen::VectorXd res(m);
  functor(x, res);
  fit.residuals.assign(res.data(), res.data() + res.size());
  Eigen::MatrixXd jac(m, 3);
  functor.df(x, jac);
  const double dof = std::max<double>(1.0, static_cast<double>(m - 3));
  const double s2 = res.squaredNorm() / dof;
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  fit.covariance = s2 * jtj.ldlt().solve(Eigen::Matrix3d::Identity());
  return fit;
}

/// Singles rates on a power grid for both detectors with multiplicative
/// Gaussian noise of relative size relNoise.
inline std::vector<CalibrationPoint> synthetic_calibration(double gainScale,
                                                           std::array<double, 2> eta,
                                                           double repetitionRate,
                                                           std::span<const double> powers,
                                                           double relNoise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<CalibrationPoint> out;
  for (int d = 1; d <= 2; ++d) {
    for (double p : powers) {
      const double rate = count_rate_model(gainScale * std::sqrt(p), eta[d - 1], repetitionRate);
      out.push_back({p, std::max(0.0, rate * (1.0 + relNoise * noise(rng))), d});
    }
  }
  return out;
}

}  // namespace spdcwerner
