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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdcwerner.hpp"
#include "spdcwerner/io.hpp"

namespace spdcwerner::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr const char* kOutputDirEnv = "SPDCWERNER_OUTPUT_DIR";

struct RunConfig {
  std::vector<double> g;
  std::vector<double> eta;
  std::vector<int> n;
  std::optional<double> p;
  int nmax = kDefaultSeriesCap;
  std::optional<std::uint64_t> seed;
  std::uint64_t counts_per_setting = 100'000;
  double repetition_rate = 250'000.0;
  std::string input;
  std::string truth;
  std::string counts_out;
  std::string out;
  std::string format = "json";
};

struct UsageError : Error {
  using Error::Error;
};

/// --out wins; a relative --out, or no --out at all, is placed under the
/// output directory from the environment when it is set. Empty means stdout.
inline std::filesystem::path resolve_output(const std::string& out, const std::string& fallback) {
  const char* dir = std::getenv(kOutputDirEnv);
  if (!out.empty()) {
    std::filesystem::path p(out);
    if (dir && *dir && p.is_relative()) return std::filesystem::path(dir) / p;
    return p;
  }
  if (dir && *dir) return std::filesystem::path(dir) / fallback;
  return {};
}

inline void emit(const std::string& content, const std::string& out, const std::string& fallback,
                 std::ostream& stdoutStream) {
  const auto path = resolve_output(out, fallback);
  if (path.empty()) {
    stdoutStream << content;
    return;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("cannot write " + path.string());
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return f;
}

inline void require_format(const RunConfig& c) {
  if (c.format != "json" && c.format != "csv") {
    throw UsageError("--format must be json or csv");
  }
}

inline void require_seed(const RunConfig& c) {
  if (!c.seed) throw UsageError("--seed is required for stochastic commands");
}

// ---------------------------------------------------------------------------

struct SweepRow {
  double g = 0.0, eta = 0.0;
  std::optional<DensityMatrix> rho;
  double p_theory = 0.0, p_series = 0.0, tangle = 0.0, linear_entropy = 0.0, witness = 0.0;
  int terms = 0;
  std::string status = "ok";
};

inline SweepRow sweep_row(double g, double eta, int nmax) {
  SweepRow r;
  r.g = g;
  r.eta = eta;
  try {
    const GainChannelParams params(g, eta);
    r.p_theory = singlet_weight_theory(params);
    const auto series = rho_th_II_series(params, nmax);
    r.terms = series.terms;
    r.p_series = singlet_weight_extract(series.rho);
    r.tangle = concurrence_tangle(series.rho).tangle;
    r.linear_entropy = linear_entropy(series.rho, 4);
    r.witness = witness_expectation(series.rho);
    r.rho = series.rho;
  } catch (const Error& e) {
    r.status = std::string("error: ") + e.what();
  }
  return r;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c);
  if (c.g.empty() || c.eta.empty()) throw UsageError("sweep needs non-empty --g and --eta grids");
  std::vector<SweepRow> rows;
  for (double g : c.g) {
    for (double eta : c.eta) rows.push_back(sweep_row(g, eta, c.nmax));
  }
  bool failed = false;
  std::ostringstream ss;
  if (c.format == "csv") {
    ss << "g,eta,p_theory,p_series,tangle,linear_entropy,witness,status\n";
    for (const auto& r : rows) {
      ss << io::format_double(r.g) << ',' << io::format_double(r.eta) << ',';
      if (r.rho) {
        ss << io::format_double(r.p_theory) << ',' << io::format_double(r.p_series) << ','
           << io::format_double(r.tangle) << ',' << io::format_double(r.linear_entropy) << ','
           << io::format_double(r.witness) << ",ok\n";
      } else {
        // Commas in messages would break the row.
        std::string msg = r.status;
        std::replace(msg.begin(), msg.end(), ',', ';');
        ss << ",,,,," << msg << '\n';
      }
    }
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      json j{{"g", r.g}, {"eta", r.eta}, {"status", r.status}};
      if (r.rho) {
        j["p_theory"] = r.p_theory;
        j["p_series"] = r.p_series;
        j["tangle"] = r.tangle;
        j["linear_entropy"] = r.linear_entropy;
        j["witness"] = r.witness;
        j["series_terms"] = r.terms;
        j["rho"] = io::to_json(*r.rho);
      }
      arr.push_back(std::move(j));
    }
    ss << json{{"rows", arr}}.dump(2) << '\n';
  }
  for (const auto& r : rows) {
    if (!r.rho) {
      failed = true;
      err << "sweep: g=" << io::format_double(r.g) << " eta=" << io::format_double(r.eta) << ": "
          << r.status << '\n';
    }
  }
  emit(ss.str(), c.out, "sweep." + c.format, out);
  return failed ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------

inline std::string matrix_csv(const DensityMatrix& rho) {
  std::ostringstream ss;
  ss << "row,col,row_label,col_label,re,im\n";
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    for (Eigen::Index j = 0; j < rho.dim(); ++j) {
      ss << i << ',' << j << ',' << rho.labels()[i] << ',' << rho.labels()[j] << ','
         << io::format_double(rho(i, j).real()) << ',' << io::format_double(rho(i, j).imag())
         << '\n';
    }
  }
  return ss.str();
}

/// One of: --p (Werner state), --n with one --eta (n-pair coincidence block),
/// or one --g with one --eta (series state).
inline int cmd_matrix(const RunConfig& c, std::ostream& out, std::ostream&) {
  require_format(c);
  std::optional<DensityMatrix> rho;
  if (c.p) {
    if (!c.g.empty() || !c.n.empty()) throw UsageError("--p excludes --g and --n");
    rho = werner_state(*c.p);
  } else if (!c.n.empty()) {
    if (c.n.size() != 1 || c.eta.size() != 1 || !c.g.empty()) {
      throw UsageError("matrix --n needs exactly one --n and one --eta");
    }
    rho = rho_post_n_closed(c.n[0], c.eta[0]);
  } else {
    if (c.g.size() != 1 || c.eta.size() != 1) {
      throw UsageError("matrix needs exactly one --g and one --eta (or --p, or --n)");
    }
    rho = rho_th_II(GainChannelParams(c.g[0], c.eta[0]), c.nmax);
  }
  const std::string body = c.format == "csv" ? matrix_csv(*rho) : io::to_json(*rho).dump(2) + "\n";
  emit(body, c.out, "matrix." + c.format, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline constexpr double kOracleTol = 1e-10;

inline int cmd_oracle_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c);
  const std::vector<int> ns = c.n.empty() ? std::vector<int>{1, 2, 3, 4} : c.n;
  const std::vector<double> etas =
      c.eta.empty() ? std::vector<double>{0.01, 0.1, 0.3, 0.5} : c.eta;
  for (int n : ns) {
    if (n < 1) throw UsageError("--n values must be at least 1");
    if (n > kMaxBruteForcePairs) {
      throw CapacityError("oracle check supports n <= " + std::to_string(kMaxBruteForcePairs) +
                          ", got " + std::to_string(n));
    }
  }
  std::ostringstream ss;
  json rows = json::array();
  if (c.format == "csv") ss << "n,eta,max_dev_rho_a,max_dev_two_photon,status\n";
  bool failed = false;
  for (int n : ns) {
    for (double eta : etas) {
      const auto brute = rho_a_n_bruteforce(n, eta);
      const auto closed = rho_a_n_closed(n, eta);
      const double devA = (brute.entries() - closed.entries()).cwiseAbs().maxCoeff();
      const auto block = post_select_two_photon(brute);
      const double devBlock =
          (block.entries() - rho_post_n_closed(n, eta).entries()).cwiseAbs().maxCoeff();
      const bool ok = devA <= kOracleTol && devBlock <= kOracleTol;
      failed |= !ok;
      if (!ok) {
        err << "oracle-check: n=" << n << " eta=" << io::format_double(eta)
            << " deviation above " << kOracleTol << '\n';
      }
      if (c.format == "csv") {
        ss << n << ',' << io::format_double(eta) << ',' << io::format_double(devA) << ','
           << io::format_double(devBlock) << ',' << (ok ? "pass" : "fail") << '\n';
      } else {
        rows.push_back({{"n", n},
                        {"eta", eta},
                        {"max_dev_rho_a", devA},
                        {"max_dev_two_photon", devBlock},
                        {"pass", ok}});
      }
    }
  }
  if (c.format == "json") {
    ss << json{{"tolerance", kOracleTol}, {"rows", rows}, {"pass", !failed}}.dump(2) << '\n';
  }
  emit(ss.str(), c.out, "oracle-check." + c.format, out);
  return failed ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------

inline void warn_hl(const GainChannelParams& params, std::ostream& err) {
  const double hl = hl_condition_check(params);
  if (hl > kHighLossWarnThreshold) {
    err << "warning: eta*nbar = " << io::format_double(hl) << " exceeds "
        << kHighLossWarnThreshold << "; the high-loss approximation does not hold\n";
  }
}

inline std::optional<GainChannelParams> single_params(const RunConfig& c) {
  if (c.g.empty() && c.eta.empty()) return std::nullopt;
  if (c.g.size() != 1 || c.eta.size() != 1) {
    throw UsageError("give exactly one --g and one --eta");
  }
  return GainChannelParams(c.g[0], c.eta[0]);
}

inline json tomo_report(std::span<const CountRecord> records, const DensityMatrix* truth,
                        const std::optional<GainChannelParams>& params) {
  const auto ml = ml_reconstruction(records);
  json j;
  j["rho"] = io::to_json(ml.rho);
  j["log_likelihood"] = ml.log_likelihood;
  j["iterations"] = ml.iterations;
  j["metrics"] = io::to_json(metrics_report(ml.rho, truth));
  try {
    const auto w = witness_from_counts(records);
    j["witness_from_counts"] = {{"value", w.value}, {"std_error", w.std_error}};
  } catch (const ContractError&) {
    j["witness_from_counts"] = nullptr;
  }
  if (params) {
    j["g"] = params->g();
    j["eta"] = params->eta();
    j["p_theory"] = singlet_weight_theory(*params);
    j["hl_condition"] = hl_condition_check(*params);
  }
  return j;
}

inline int cmd_tomo_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_seed(c);
  if (c.counts_per_setting == 0) throw UsageError("--counts-per-setting must be positive");
  const auto params = single_params(c);
  std::optional<DensityMatrix> truth;
  if (!c.truth.empty()) {
    if (params) throw UsageError("--truth excludes --g/--eta");
    auto f = open_input(c.truth);
    truth = DensityMatrix::two_qubit(io::read_density_matrix(f).as_two_qubit());
  } else if (params) {
    warn_hl(*params, err);
    truth = rho_th_II(*params, c.nmax);
  } else {
    throw UsageError("tomo simulate needs --g and --eta, or --truth");
  }
  const auto records = simulate_counts(*truth, combined_settings(), c.counts_per_setting, *c.seed);
  if (!c.counts_out.empty()) {
    std::ostringstream cs;
    io::write_count_records(cs, records);
    emit(cs.str(), c.counts_out, "counts.csv", out);
  }
  auto report = tomo_report(records, &*truth, params);
  report["seed"] = *c.seed;
  report["counts_per_setting"] = c.counts_per_setting;
  emit(report.dump(2) + "\n", c.out, "tomo.json", out);
  return kExitOk;
}

inline int cmd_tomo_reconstruct(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.input.empty()) throw UsageError("tomo reconstruct needs --counts");
  auto f = open_input(c.input);
  const auto records = io::read_count_records(f);
  const auto params = single_params(c);
  std::optional<DensityMatrix> truth;
  if (!c.truth.empty()) {
    if (params) throw UsageError("--truth excludes --g/--eta");
    auto tf = open_input(c.truth);
    truth = DensityMatrix::two_qubit(io::read_density_matrix(tf).as_two_qubit());
  } else if (params) {
    warn_hl(*params, err);
    truth = rho_th_II(*params, c.nmax);
  }
  const auto report = tomo_report(records, truth ? &*truth : nullptr, params);
  emit(report.dump(2) + "\n", c.out, "tomo.json", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.input.empty()) throw UsageError("fit needs --data");
  auto f = open_input(c.input);
  const auto points = io::read_calibration_points(f);
  const auto fit = fit_gain(points, c.repetition_rate);
  auto j = io::to_json(fit);
  json hl = json::array();
  for (double eta : fit.eta) {
    const GainChannelParams params(fit.g_max, eta);
    hl.push_back(hl_condition_check(params));
    warn_hl(params, err);
  }
  j["hl_condition"] = hl;
  emit(j.dump(2) + "\n", c.out, "fit.json", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SPDC Werner-state simulation and analysis"};
  app.name("spdcwerner");
  app.require_subcommand(1);
  RunConfig c;

  auto addGrid = [&c](CLI::App* s) {
    s->add_option("--g", c.g, "gain values")->delimiter(',');
    s->add_option("--eta", c.eta, "channel transmissions")->delimiter(',');
  };
  auto addOutput = [&c](CLI::App* s) {
    s->add_option("--out", c.out, "output path (default stdout or $" + std::string(kOutputDirEnv) +
                                      ")");
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto addNmax = [&c](CLI::App* s) {
    s->add_option("--nmax", c.nmax, "series term cap")->check(CLI::PositiveNumber);
  };

  auto* sweep = app.add_subcommand("sweep", "Werner weight and metrics over a (g, eta) grid");
  addGrid(sweep);
  addNmax(sweep);
  addOutput(sweep);

  auto* matrix = app.add_subcommand("matrix", "export one density matrix");
  addGrid(matrix);
  addNmax(matrix);
  addOutput(matrix);
  matrix->add_option("--n", c.n, "pair number for the coincidence block")->delimiter(',');
  matrix->add_option("--p", c.p, "Werner weight");

  auto* oracle = app.add_subcommand("oracle-check", "closed forms against brute force");
  oracle->add_option("--n", c.n, "pair numbers (default 1,2,3,4)")->delimiter(',');
  oracle->add_option("--eta", c.eta, "transmissions (default 0.01,0.1,0.3,0.5)")->delimiter(',');
  addOutput(oracle);

  auto* tomo = app.add_subcommand("tomo", "simulated tomography");
  tomo->require_subcommand(1);
  auto* simulate = tomo->add_subcommand("simulate", "simulate counts and reconstruct");
  addGrid(simulate);
  addNmax(simulate);
  simulate->add_option("--truth", c.truth, "ground-truth density matrix JSON");
  simulate->add_option("--seed", c.seed, "RNG seed (required)");
  simulate->add_option("--counts-per-setting", c.counts_per_setting, "mean counts per setting");
  simulate->add_option("--counts-out", c.counts_out, "also write the simulated count CSV here");
  simulate->add_option("--out", c.out, "report path");
  auto* reconstruct = tomo->add_subcommand("reconstruct", "reconstruct from a count CSV");
  reconstruct->add_option("--counts", c.input, "count CSV")->required();
  addGrid(reconstruct);
  addNmax(reconstruct);
  reconstruct->add_option("--truth", c.truth, "ground-truth density matrix JSON");
  reconstruct->add_option("--out", c.out, "report path");

  auto* fit = app.add_subcommand("fit", "fit singles rates against pump power");
  fit->add_option("--data", c.input, "calibration CSV (power,rate,detector)")->required();
  fit->add_option("--rate", c.repetition_rate, "repetition rate in 1/s")
      ->check(CLI::PositiveNumber);
  fit->add_option("--out", c.out, "report path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sweep->parsed()) return cmd_sweep(c, out, err);
    if (matrix->parsed()) return cmd_matrix(c, out, err);
    if (oracle->parsed()) return cmd_oracle_check(c, out, err);
    if (simulate->parsed()) return cmd_tomo_simulate(c, out, err);
    if (reconstruct->parsed()) return cmd_tomo_reconstruct(c, out, err);
    if (fit->parsed()) return cmd_fit(c, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace spdcwerner::cli
