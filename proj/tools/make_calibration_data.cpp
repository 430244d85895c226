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

// Writes the bundled calibration dataset: singles rates for both detectors on
// twelve pump powers up to 1, with 1% multiplicative noise.

#include <array>
#include <iostream>
#include <vector>

#include "spdcwerner/calibration.hpp"
#include "spdcwerner/io.hpp"

int main() {
  constexpr double kGainScale = 1.313;
  constexpr std::array<double, 2> kEta{0.016, 0.014};
  constexpr double kRate = 250'000.0;
  std::vector<double> powers;
  for (int i = 1; i <= 12; ++i) powers.push_back(i / 12.0);
  const auto pts = spdcwerner::synthetic_calibration(kGainScale, kEta, kRate, powers, 0.01, 2024);
  spdcwerner::io::write_calibration_points(std::cout, pts);
}
