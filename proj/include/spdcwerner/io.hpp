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

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdcwerner/calibration.hpp"
#include "spdcwerner/errors.hpp"
#include "spdcwerner/fock.hpp"
#include "spdcwerner/metrics.hpp"
#include "spdcwerner/tomography.hpp"
#include "spdcwerner/two_qubit.hpp"

namespace spdcwerner::io {

using nlohmann::json;

/// Twelve significant digits, the CSV float format.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// {"dim": n, "basis": [...], "re": [[...]], "im": [[...]]}, row-major.
inline json to_json(const DensityMatrix& rho) {
  const auto n = rho.dim();
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < n; ++j) {
      rr.push_back(rho(i, j).real());
      ii.push_back(rho(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return json{{"dim", n}, {"basis", rho.labels()}, {"re", re}, {"im", im}};
}

namespace detail {

inline bool parse_fock_label(const std::string& s, OccupationTuple& out) {
  if (s.size() < 3 || s.front() != '|' || s.back() != '>') return false;
  std::vector<int> occ;
  std::stringstream ss(s.substr(1, s.size() - 2));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size() || v < 0) return false;
      occ.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  out = OccupationTuple(std::move(occ));
  return true;
}

}  // namespace detail

inline DensityMatrix density_matrix_from_json(const json& j) {
  try {
    const auto n = j.at("dim").get<Eigen::Index>();
    const auto labels = j.at("basis").get<std::vector<std::string>>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (n <= 0 || static_cast<Eigen::Index>(labels.size()) != n ||
        static_cast<Eigen::Index>(re.size()) != n || static_cast<Eigen::Index>(im.size()) != n) {
      throw ParseError("density matrix JSON: inconsistent dimensions");
    }
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(re[i].size()) != n ||
          static_cast<Eigen::Index>(im[i].size()) != n) {
        throw ParseError("density matrix JSON: row " + std::to_string(i) + " has wrong length");
      }
      for (Eigen::Index j2 = 0; j2 < n; ++j2) {
        m(i, j2) = cplx(re[i][j2].get<double>(), im[i][j2].get<double>());
      }
    }
    std::vector<OccupationTuple> fock;
    for (const auto& l : labels) {
      OccupationTuple t;
      if (!detail::parse_fock_label(l, t)) {
        fock.clear();
        break;
      }
      fock.push_back(std::move(t));
    }
    if (fock.size() == labels.size()) return DensityMatrix(std::move(m), std::move(fock));
    return DensityMatrix(std::move(m), labels);
  } catch (const json::exception& e) {
    throw ParseError(std::string("density matrix JSON: ") + e.what());
  }
}

inline DensityMatrix read_density_matrix(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("density matrix JSON: ") + e.what());
  }
  return density_matrix_from_json(j);
}

inline json to_json(const MetricsReport& r) {
  json j{{"p", r.p},
         {"tangle", r.tangle},
         {"linear_entropy", r.linear_entropy},
         {"witness", r.witness},
         {"ppt_entangled", r.ppt_entangled}};
  j["fidelity_vs_theory"] = r.fidelity_vs_theory ? json(*r.fidelity_vs_theory) : json(nullptr);
  return j;
}

inline json to_json(const CalibrationFit& f) {
  json cov = json::array();
  for (int i = 0; i < 3; ++i) {
    cov.push_back(json::array({f.covariance(i, 0), f.covariance(i, 1), f.covariance(i, 2)}));
  }
  return json{{"gain_scale", f.gain_scale},
              {"eta", {f.eta[0], f.eta[1]}},
              {"repetition_rate", f.repetition_rate},
              {"max_power", f.max_power},
              {"g_max", f.g_max},
              {"mean_photons_at_g_max", mean_photons_per_mode(GainChannelParams(f.g_max, 0.0))},
              {"parameters", {"gain_scale", "eta1", "eta2"}},
              {"covariance", cov},
              {"residuals", f.residuals},
              {"iterations", f.iterations}};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line, const char* what) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
    }
  }
  throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
}

inline bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

/// "H", "V", "D", "F", "L", "R" or "bloch:x:y:z".
inline Polarization parse_polarization(const std::string& s) {
  if (s.size() == 1) return Polarization::named(s[0]);
  if (s.rfind("bloch:", 0) == 0) {
    std::stringstream ss(s.substr(6));
    std::array<double, 3> v{};
    std::string tok;
    for (double& c : v) {
      if (!std::getline(ss, tok, ':')) throw DomainError("bad Bloch vector '" + s + "'");
      c = std::stod(tok);
    }
    return Polarization::bloch(v[0], v[1], v[2]);
  }
  throw DomainError("unknown polarization '" + s + "'");
}

inline constexpr const char* kCountCsvHeader = "label,stateA,stateB,counts,duration_s,seed";

inline void write_count_records(std::ostream& out, std::span<const CountRecord> records) {
  out << kCountCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.setting.label << ',' << r.setting.a.name() << ',' << r.setting.b.name() << ','
        << r.counts << ',' << format_double(r.duration_s) << ',' << r.seed << '\n';
  }
}

inline std::vector<CountRecord> read_count_records(std::istream& in) {
  std::vector<CountRecord> out;
  std::string line;
  std::size_t lineNo = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (detail::is_blank(line)) continue;
    const auto f = detail::split_csv_line(line);
    if (!header) {
      if (f != detail::split_csv_line(kCountCsvHeader)) {
        throw ParseError("line " + std::to_string(lineNo) + ": expected header '" +
                         kCountCsvHeader + "'");
      }
      header = true;
      continue;
    }
    if (f.size() != 6) {
      throw ParseError("line " + std::to_string(lineNo) + ": expected 6 fields, got " +
                       std::to_string(f.size()));
    }
    CountRecord r{ProjectorSetting::named('H', 'H'), 0, 1.0, 0};
    try {
      r.setting = ProjectorSetting{f[0], parse_polarization(f[1]), parse_polarization(f[2])};
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(lineNo) + ": " + e.what());
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineNo) + ": bad polarization");
    }
    r.counts = detail::parse_uint(f[3], lineNo, "counts");
    r.duration_s = detail::parse_double(f[4], lineNo, "duration");
    r.seed = detail::parse_uint(f[5], lineNo, "seed");
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError("count CSV is empty");
  return out;
}

inline constexpr const char* kCalibrationCsvHeader = "power,rate,detector";

inline void write_calibration_points(std::ostream& out, std::span<const CalibrationPoint> pts) {
  out << kCalibrationCsvHeader << '\n';
  for (const auto& p : pts) {
    out << format_double(p.pump_power) << ',' << format_double(p.rate) << ',' << p.detector
        << '\n';
  }
}

inline std::vector<CalibrationPoint> read_calibration_points(std::istream& in) {
  std::vector<CalibrationPoint> out;
  std::string line;
  std::size_t lineNo = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (detail::is_blank(line)) continue;
    const auto f = detail::split_csv_line(line);
    if (!header) {
      if (f != detail::split_csv_line(kCalibrationCsvHeader)) {
        throw ParseError("line " + std::to_string(lineNo) + ": expected header '" +
                         kCalibrationCsvHeader + "'");
      }
      header = true;
      continue;
    }
    if (f.size() != 3) {
      throw ParseError("line " + std::to_string(lineNo) + ": expected 3 fields, got " +
                       std::to_string(f.size()));
    }
    CalibrationPoint p;
    p.pump_power = detail::parse_double(f[0], lineNo, "power");
    p.rate = detail::parse_double(f[1], lineNo, "rate");
    p.detector = static_cast<int>(detail::parse_uint(f[2], lineNo, "detector"));
    out.push_back(p);
  }
  if (!header) throw ParseError("calibration CSV is empty");
  return out;
}

}  // namespace spdcwerner::io
