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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "spdcwerner/io.hpp"
#include "spdcwerner/lossy_channel.hpp"
#include "test_helpers.hpp"

namespace spdcwerner {
namespace {

TEST(Json, TwoQubitRoundTripIsExact) {
  std::mt19937_64 rng(4);
  const auto rho = DensityMatrix::two_qubit(testing::random_density(4, rng));
  std::stringstream ss;
  ss << io::to_json(rho).dump();
  const auto back = io::read_density_matrix(ss);
  EXPECT_EQ(back.entries(), rho.entries());
  EXPECT_EQ(back.labels(), rho.labels());
  EXPECT_FALSE(back.has_fock_basis());
}

TEST(Json, FockBasisSurvives) {
  const auto rho = rho_a_n_closed(1, 0.3);
  const auto back = io::density_matrix_from_json(io::to_json(rho));
  ASSERT_TRUE(back.has_fock_basis());
  EXPECT_EQ(back.fock_basis(), rho.fock_basis());
  EXPECT_EQ(back.entries(), rho.entries());
}

TEST(Json, MalformedInput) {
  std::stringstream bad("{\"dim\": 2, \"basis\": [\"a\"]");
  EXPECT_THROW(io::read_density_matrix(bad), ParseError);
  auto j = io::to_json(werner_state(0.5));
  j["re"][1].erase(0);
  EXPECT_THROW(io::density_matrix_from_json(j), ParseError);
  j = io::to_json(werner_state(0.5));
  j.erase("im");
  EXPECT_THROW(io::density_matrix_from_json(j), ParseError);
}

TEST(Json, DumpIsDeterministic) {
  const auto a = io::to_json(rho_th_II(GainChannelParams(1.0, 0.01))).dump();
  const auto b = io::to_json(rho_th_II(GainChannelParams(1.0, 0.01))).dump();
  EXPECT_EQ(a, b);
}

TEST(Polarization, Parsing) {
  EXPECT_EQ(io::parse_polarization("D").name(), "D");
  const auto b = io::parse_polarization("bloch:0:1:0");
  EXPECT_LT((b.ket() - Polarization::named('L').ket()).norm(), 1e-12);
  EXPECT_THROW(io::parse_polarization("Q"), DomainError);
  EXPECT_THROW(io::parse_polarization("bloch:1:0"), DomainError);
  EXPECT_THROW(io::parse_polarization("horizontal"), DomainError);
}

TEST(FormatDouble, TwelveSignificantDigits) {
  EXPECT_EQ(io::format_double(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::format_double(250000.0), "250000");
  EXPECT_EQ(io::format_double(1e-20), "1e-20");
}

TEST(CountCsv, RoundTrip) {
  auto records = simulate_counts(werner_state(0.6), tomography_settings(), 1000, 12);
  records.push_back({ProjectorSetting{"custom", Polarization::bloch(0.6, 0, 0.8),
                                      Polarization::named('R')},
                     17, 2.5, 9});
  std::stringstream ss;
  io::write_count_records(ss, records);
  const auto back = io::read_count_records(ss);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].setting.label, records[i].setting.label);
    EXPECT_EQ(back[i].counts, records[i].counts);
    EXPECT_EQ(back[i].seed, records[i].seed);
    EXPECT_EQ(back[i].duration_s, records[i].duration_s);
    EXPECT_LT((back[i].setting.projector() - records[i].setting.projector()).norm(), 1e-11);
  }
}

void expect_parse_error_at(const std::string& text, const std::string& where) {
  std::stringstream ss(text);
  try {
    io::read_count_records(ss);
    ADD_FAILURE() << "no error for:\n" << text;
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
  }
}

TEST(CountCsv, ErrorsCarryLineNumbers) {
  const std::string h = std::string(io::kCountCsvHeader) + "\n";
  expect_parse_error_at("nope\n", "line 1");
  expect_parse_error_at(h + "HH,H,H,10,1,0\nHV,H,V,ten,1,0\n", "line 3");
  expect_parse_error_at(h + "HH,H,H,10,1\n", "line 2");
  expect_parse_error_at(h + "\nHH,H,X,10,1,0\n", "line 3");
  expect_parse_error_at(h + "HH,H,H,-4,1,0\n", "line 2");
  expect_parse_error_at(h + "HH,H,H,4,1s,0\n", "line 2");
  std::stringstream empty;
  EXPECT_THROW(io::read_count_records(empty), ParseError);
}

TEST(CalibrationCsv, RoundTripAndErrors) {
  const std::array<double, 5> powers{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto pts = synthetic_calibration(1.2, {0.02, 0.01}, 1e5, powers, 0.01, 3);
  std::stringstream ss;
  io::write_calibration_points(ss, pts);
  const auto back = io::read_calibration_points(ss);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(back[i].rate, pts[i].rate, 1e-11 * pts[i].rate);
    EXPECT_EQ(back[i].detector, pts[i].detector);
  }
  std::stringstream bad("power,rate,detector\n0.1,5,1\n0.2,x,1\n");
  try {
    io::read_calibration_points(bad);
    ADD_FAILURE();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(FitJson, HasParametersCovarianceAndResiduals) {
  const std::array<double, 6> powers{0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  const auto pts = synthetic_calibration(1.0, {0.02, 0.01}, 1e5, powers, 0.0, 3);
  const auto j = io::to_json(fit_gain(pts, 1e5));
  EXPECT_EQ(j.at("residuals").size(), pts.size());
  EXPECT_EQ(j.at("covariance").size(), 3u);
  EXPECT_NEAR(j.at("g_max").get<double>(), std::sqrt(1.2), 1e-6);
}

}  // namespace
}  // namespace spdcwerner
