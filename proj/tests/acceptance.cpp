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

// Acceptance checks. One line per criterion; exit status is nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "spdcwerner.hpp"

namespace {

using namespace spdcwerner;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double max_abs(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) {
    for (double eta : {0.01, 0.1, 0.3, 0.5}) {
      const auto block = post_select_two_photon(rho_a_n_bruteforce(n, eta));
      worst = std::max(worst, max_abs(block.entries(), rho_post_n_closed(n, eta).entries()));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max deviation %.3g (tol 1e-10)", worst);
  return {worst <= 1e-10, buf};
}

Outcome werner_limit() {
  double worst = 0.0, minMargin = 1.0;
  for (double g : {0.1, 0.3, 0.5, 1.0, 1.5}) {
    for (double eta : {0.001, 0.01, 0.05}) {
      const GainChannelParams params(g, eta);
      const double gt2 = params.gamma_tilde() * params.gamma_tilde();
      const double p = 1.0 / (2.0 * gt2 + 1.0);
      worst = std::max(worst, max_abs(rho_th_II(params).entries(), werner_state(p).entries()));
      minMargin = std::min(minMargin, p - 1.0 / 3.0);
    }
  }
  const double pLarge = singlet_weight_extract(rho_th_II(GainChannelParams(20.0, 1e-4)));
  const double gap = pLarge - 1.0 / 3.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max deviation %.3g (tol 1e-8); min p-1/3 on grid %.3g; p(20,1e-4)-1/3 = %.3g",
                worst, minMargin, gap);
  return {worst <= 1e-8 && minMargin > 0.0 && gap > 0.0 && gap < 1e-3, buf};
}

Outcome metric_consistency() {
  double tangleDev = 0.0, witnessDev = 0.0;
  bool pptOk = true;
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.4, 0.6, 0.8, 1.0}) {
    const auto rho = werner_state(p);
    const double fromEntropy = tangle_from_entropy_werner(1.0 - p * p);
    tangleDev = std::max(tangleDev, std::abs(concurrence_tangle(rho).tangle - fromEntropy));
    witnessDev = std::max(witnessDev, std::abs(witness_expectation(rho) - (1.0 - 3.0 * p) / 4.0));
    pptOk &= is_entangled_ppt(rho) == (p > 1.0 / 3.0);
  }
  pptOk &= !is_entangled_ppt(werner_state(1.0 / 3.0 - 1e-9));
  pptOk &= is_entangled_ppt(werner_state(1.0 / 3.0 + 1e-9));
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "tangle deviation %.3g (tol 1e-10); witness deviation %.3g (tol 1e-12); PPT "
                "flip at 1/3: %s",
                tangleDev, witnessDev, pptOk ? "yes" : "no");
  return {tangleDev <= 1e-10 && witnessDev <= 1e-12 && pptOk, buf};
}

Outcome reference_numbers() {
  const double nbar = mean_photons_per_mode(GainChannelParams(1.313, 0.0));
  const double fourNbar = 4.0 * mean_photons_per_mode(GainChannelParams(1.084, 0.0));
  const double hl = hl_condition_check(GainChannelParams(1.313, 0.016));
  char buf[160];
  std::snprintf(buf, sizeof buf, "sinh^2(1.313) = %.4f; 4 sinh^2(1.084) = %.4f; eta*nbar = %.4f",
                nbar, fourNbar, hl);
  return {std::abs(nbar - 2.97) <= 0.01 && std::abs(fourNbar - 6.85) <= 0.03 &&
              std::abs(hl - 0.05) <= 0.01,
          buf};
}

const GainChannelParams kReferenceParams(1.313, 0.016);

Outcome tomography_round_trip() {
  const auto start = Clock::now();
  const auto truth = rho_th_II(kReferenceParams);
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ml = ml_reconstruction(simulate_counts(truth, combined_settings(), 100'000, seed));
    worst = std::min(worst, fidelity(truth, ml.rho));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  char buf[128];
  std::snprintf(buf, sizeof buf, "min fidelity over 10 seeds %.6f (need >= 0.995); %.2f s",
                worst, secs);
  return {worst >= 0.995 && secs <= 120.0, buf};
}

Outcome witness_protocol() {
  const auto truth = rho_th_II(kReferenceParams);
  const double target = (1.0 - 3.0 * singlet_weight_theory(kReferenceParams)) / 4.0;
  int within = 0;
  double worstPull = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto est = witness_from_counts(simulate_counts(truth, combined_settings(), 100'000, seed));
    const double pull = std::abs(est.value - target) / est.std_error;
    worstPull = std::max(worstPull, pull);
    within += pull <= 3.0;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/20 seeds within 3 sigma of %.5f; largest pull %.2f", within,
                target, worstPull);
  return {within == 20, buf};
}

Outcome calibration_fit() {
  std::vector<double> powers;
  for (int i = 1; i <= 12; ++i) powers.push_back(i / 12.0);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto pts = synthetic_calibration(1.313, {0.016, 0.014}, 250'000.0, powers, 0.01, seed);
    try {
      ok += std::abs(fit_gain(pts, 250'000.0).g_max - 1.313) <= 0.02 * 1.313;
    } catch (const FitError&) {
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/50 trials recover g_max within 2%% (need >= 48)", ok);
  return {ok >= 48, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 oracle equivalence", oracle_equivalence},
      {"AC2 Werner limit", werner_limit},
      {"AC3 metric consistency", metric_consistency},
      {"AC4 reference numbers", reference_numbers},
      {"AC5 tomography round trip", tomography_round_trip},
      {"AC6 witness protocol", witness_protocol},
      {"AC7 calibration fit", calibration_fit},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
