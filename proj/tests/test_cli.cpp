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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

namespace spdcwerner::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spdcwerner_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"sweep", "--eta", "0.01"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"sweep", "--g", "x", "--eta", "0.01"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"sweep", "--g", "1", "--eta", "0.01", "--format", "xml"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"tomo"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"matrix", "--g", "1,2", "--eta", "0.01"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(Cli, SweepRowsMatchTheory) {
  const auto r = run_cli({"sweep", "--g", "0.1,1,0.3", "--eta", "0.01", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "g,eta,p_theory,p_series,tangle,linear_entropy,witness,status");
  int rows = 0;
  while (std::getline(ss, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string x;
    while (std::getline(ls, x, ',')) f.push_back(x);
    ASSERT_EQ(f.size(), 8u) << line;
    EXPECT_NEAR(std::stod(f[2]), std::stod(f[3]), 1e-8);
    EXPECT_EQ(f[7], "ok");
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Cli, SweepJsonCarriesMatrices) {
  const auto r = run_cli({"sweep", "--g", "0.1,1,0.3", "--eta", "0.01"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.at("rows").size(), 3u);
  for (const auto& row : j["rows"]) {
    const auto rho = io::density_matrix_from_json(row.at("rho"));
    EXPECT_NEAR(singlet_weight_extract(rho), row.at("p_theory").get<double>(), 1e-8);
  }
}

TEST(Cli, SweepContinuesPastFailedRows) {
  const auto r = run_cli({"sweep", "--g", "0.5", "--eta", "0.01,1,0.05", "--format", "csv"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.out.find("0.5,0.05,"), std::string::npos);
  EXPECT_NE(r.out.find(",error: "), std::string::npos);
  EXPECT_NE(r.err.find("eta=1"), std::string::npos);
}

TEST(Cli, OracleCheck) {
  const auto ok = run_cli({"oracle-check"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(json::parse(ok.out).at("rows").size(), 16u);
  EXPECT_EQ(run_cli({"oracle-check", "--eta", "0.9999"}).code, kExitOk);
  const auto cap = run_cli({"oracle-check", "--n", "5"});
  EXPECT_EQ(cap.code, kExitFailure);
  EXPECT_NE(cap.err.find("n <= 4"), std::string::npos);
}

TEST(Cli, MatrixExport) {
  const auto werner = run_cli({"matrix", "--p", "0.6"});
  ASSERT_EQ(werner.code, kExitOk);
  EXPECT_NEAR(singlet_weight_extract(io::density_matrix_from_json(json::parse(werner.out))), 0.6,
              1e-12);
  const auto block = run_cli({"matrix", "--n", "2", "--eta", "0.1", "--format", "csv"});
  ASSERT_EQ(block.code, kExitOk);
  EXPECT_EQ(std::count(block.out.begin(), block.out.end(), '\n'), 17);
  EXPECT_EQ(run_cli({"matrix", "--n", "2", "--eta", "1"}).code, kExitFailure);
}

TEST(Cli, TomoSimulateRequiresSeedAndIsDeterministic) {
  EXPECT_EQ(run_cli({"tomo", "simulate", "--g", "1.313", "--eta", "0.016"}).code, kExitUsage);
  const std::vector<std::string> args{"tomo", "simulate", "--g", "1.313", "--eta", "0.016",
                                      "--seed", "11"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_GE(j.at("metrics").at("fidelity_vs_theory").get<double>(), 0.995);
  EXPECT_TRUE(j.at("witness_from_counts").is_object());
}

TEST(Cli, TomoWarnsOutsideHighLoss) {
  const auto r = run_cli({"tomo", "simulate", "--g", "2", "--eta", "0.5", "--seed", "1",
                          "--counts-per-setting", "1000"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, TomoReconstructNoiselessSinglet) {
  const auto dir = temp_dir("singlet");
  {
    std::ofstream f(dir / "counts.csv");
    const auto records = expected_counts(werner_state(1.0), combined_settings(), 1'000'000);
    io::write_count_records(f, records);
  }
  const auto r = run_cli({"tomo", "reconstruct", "--counts", (dir / "counts.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("metrics").at("p").get<double>(), 1.0, 1e-3);
  EXPECT_NEAR(j.at("witness_from_counts").at("value").get<double>(), -0.5, 1e-12);
}

TEST(Cli, TomoSimulateThenReconstructFromFiles) {
  const auto dir = temp_dir("roundtrip");
  const auto sim = run_cli({"tomo", "simulate", "--g", "1", "--eta", "0.02", "--seed", "3",
                            "--counts-out", (dir / "c.csv").string(), "--out",
                            (dir / "sim.json").string()});
  ASSERT_EQ(sim.code, kExitOk) << sim.err;
  EXPECT_TRUE(sim.out.empty());
  const auto rec = run_cli({"tomo", "reconstruct", "--counts", (dir / "c.csv").string(), "--g",
                            "1", "--eta", "0.02"});
  ASSERT_EQ(rec.code, kExitOk) << rec.err;
  const auto a = json::parse(slurp(dir / "sim.json"));
  const auto b = json::parse(rec.out);
  EXPECT_EQ(a.at("rho"), b.at("rho"));
  EXPECT_EQ(a.at("metrics"), b.at("metrics"));
}

TEST(Cli, TomoParseErrors) {
  EXPECT_EQ(run_cli({"tomo", "reconstruct", "--counts", "/nonexistent/x.csv"}).code,
            kExitFailure);
  const auto dir = temp_dir("bad");
  {
    std::ofstream f(dir / "bad.csv");
    f << io::kCountCsvHeader << "\nHH,H,H,10,1,0\nHV,H,V,oops,1,0\n";
  }
  const auto r = run_cli({"tomo", "reconstruct", "--counts", (dir / "bad.csv").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST(Cli, FitBundledDataset) {
  const auto r = run_cli({"fit", "--data", std::string(SPDCWERNER_DATA_DIR) +
                                               "/calibration_synthetic.csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("g_max").get<double>(), 1.313, 0.02 * 1.313);
  EXPECT_EQ(j.at("residuals").size(), 24u);
}

TEST(Cli, FitErrorsSurface) {
  const auto dir = temp_dir("fit");
  {
    std::ofstream f(dir / "few.csv");
    f << "power,rate,detector\n0.5,10,1\n0.7,20,1\n0.9,30,2\n";
  }
  const auto r = run_cli({"fit", "--data", (dir / "few.csv").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("distinct powers"), std::string::npos);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = temp_dir("env");
  ::setenv(kOutputDirEnv, dir.c_str(), 1);
  const auto a = run_cli({"sweep", "--g", "0.5", "--eta", "0.01", "--format", "csv"});
  const auto b = run_cli({"matrix", "--p", "0.5", "--out", "sub/m.json"});
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_TRUE(a.out.empty());
  EXPECT_NE(slurp(dir / "sweep.csv").find("0.5,0.01,"), std::string::npos);
  EXPECT_EQ(b.code, kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "sub" / "m.json"));
}

}  // namespace
}  // namespace spdcwerner::cli
