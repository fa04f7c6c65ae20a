// Copyright 2026 The qsl Authors
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

#include "qsl/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace qsl::io {

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "': " + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

Complex complex_from_json(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error(ErrorCode::kParse, "complex entries must be [re, im] pairs");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "'" + path.string() + "': " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

DeviceSpec device_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "device config must be an object");
  DeviceSpec spec = DeviceSpec::chip_default();
  spec.interaction = parse_interaction(get_or<std::string>(j, "interaction", "ising"));
  spec.eta = get_or(j, "eta", spec.eta);
  spec.g = mhz_to_angular(get_or(j, "g_mhz", angular_to_mhz(spec.g)));
  spec.r1 = get_or(j, "r1", spec.r1);
  spec.r2 = get_or(j, "r2", spec.r2);
  spec.omega_max = mhz_to_angular(get_or(j, "omega_max_mhz", angular_to_mhz(spec.omega_max)));
  if (j.contains("qutrit")) {
    const json& q = j.at("qutrit");
    if (q.is_null()) {
      spec.qutrit.reset();
    } else {
      QutritParams p;
      p.omega1 = ghz_to_angular(get_or(q, "f1_ghz", angular_to_ghz(p.omega1)));
      p.omega2 = ghz_to_angular(get_or(q, "f2_ghz", angular_to_ghz(p.omega2)));
      p.alpha1 = mhz_to_angular(get_or(q, "alpha1_mhz", angular_to_mhz(p.alpha1)));
      p.alpha2 = mhz_to_angular(get_or(q, "alpha2_mhz", angular_to_mhz(p.alpha2)));
      p.edge_ns = get_or(q, "edge_ns", p.edge_ns);
      p.dt_ns = 1e-3 * get_or(q, "dt_ps", 1e3 * p.dt_ns);
      p.crosstalk = get_or(q, "crosstalk", p.crosstalk);
      spec.qutrit = p;
    }
  }
  spec.validate();
  return spec;
}

json device_to_json(const DeviceSpec& spec) {
  json j = {{"interaction", to_string(spec.interaction)},
            {"eta", spec.eta},
            {"g_mhz", angular_to_mhz(spec.g)},
            {"r1", spec.r1},
            {"r2", spec.r2},
            {"omega_max_mhz", angular_to_mhz(spec.omega_max)}};
  if (spec.qutrit) {
    const QutritParams& p = *spec.qutrit;
    j["qutrit"] = {{"f1_ghz", angular_to_ghz(p.omega1)},      {"f2_ghz", angular_to_ghz(p.omega2)},
                   {"alpha1_mhz", angular_to_mhz(p.alpha1)}, {"alpha2_mhz", angular_to_mhz(p.alpha2)},
                   {"edge_ns", p.edge_ns},                   {"dt_ps", 1e3 * p.dt_ns},
                   {"crosstalk", p.crosstalk}};
  }
  return j;
}

PulseSchedule pulse_from_json(const json& j) {
  return guarded("pulse", [&] {
    const double t = require(j, "t_ns").get<double>();
    const int m = require(j, "segments").get<int>();
    const json& ch = require(j, "channels");
    if (m < 1) throw Error(ErrorCode::kParse, "pulse: segments must be >= 1");
    if (!ch.is_array() || ch.size() != kNumChannels) {
      throw Error(ErrorCode::kParse, "pulse: channels must hold 4 rows");
    }
    Eigen::MatrixXd amps(m, kNumChannels);
    for (int c = 0; c < kNumChannels; ++c) {
      if (!ch[c].is_array() || static_cast<int>(ch[c].size()) != m) {
        throw Error(ErrorCode::kParse, "pulse: every channel needs one value per segment");
      }
      for (int s = 0; s < m; ++s) amps(s, c) = mhz_to_angular(ch[c][s].get<double>());
    }
    return PulseSchedule(t, amps);
  });
}

json pulse_to_json(const PulseSchedule& schedule) {
  json channels = json::array();
  for (int c = 0; c < kNumChannels; ++c) {
    json row = json::array();
    for (int m = 0; m < schedule.amplitudes.rows(); ++m) {
      row.push_back(angular_to_mhz(schedule.amplitudes(m, c)));
    }
    channels.push_back(row);
  }
  return {{"t_ns", schedule.t_ns}, {"segments", schedule.num_segments}, {"channels", channels}};
}

Mat4 matrix_from_json(const json& j) {
  const json& rows = j.is_object() ? require(j, "matrix") : j;
  if (!rows.is_array() || rows.size() != 4) throw Error(ErrorCode::kParse, "matrix must have 4 rows");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!rows[r].is_array() || rows[r].size() != 4) {
      throw Error(ErrorCode::kParse, "matrix rows must have 4 entries");
    }
    for (int c = 0; c < 4; ++c) m(r, c) = complex_from_json(rows[r][c]);
  }
  return m;
}

json matrix_to_json(const Mat4& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json ptm_to_json(const PTM& r) {
  json rows = json::array();
  for (int i = 0; i < 16; ++i) {
    json row = json::array();
    for (int k = 0; k < 16; ++k) row.push_back(r.r(i, k));
    rows.push_back(row);
  }
  return {{"normalization", std::string(kPtmNormalization)}, {"ptm", rows}};
}

PTM ptm_from_json(const json& j) {
  return guarded("ptm", [&] {
    if (get_or<std::string>(j, "normalization", std::string(kPtmNormalization)) != kPtmNormalization) {
      throw Error(ErrorCode::kParse, "ptm: unsupported normalization");
    }
    const json& rows = require(j, "ptm");
    if (!rows.is_array() || rows.size() != 16) throw Error(ErrorCode::kParse, "ptm must be 16 x 16");
    PTM out;
    for (int i = 0; i < 16; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 16) throw Error(ErrorCode::kParse, "ptm must be 16 x 16");
      for (int k = 0; k < 16; ++k) out.r(i, k) = rows[i][k].get<double>();
    }
    return out;
  });
}

json chi_to_json(const ChiMatrix& chi) {
  json rows = json::array();
  for (int i = 0; i < 16; ++i) {
    json row = json::array();
    for (int k = 0; k < 16; ++k) row.push_back({chi.chi(i, k).real(), chi.chi(i, k).imag()});
    rows.push_back(row);
  }
  return {{"normalization", std::string(kPtmNormalization)}, {"chi", rows}};
}

ChiMatrix chi_from_json(const json& j) {
  const json& rows = require(j, "chi");
  if (!rows.is_array() || rows.size() != 16) throw Error(ErrorCode::kParse, "chi must be 16 x 16");
  ChiMatrix out;
  for (int i = 0; i < 16; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 16) throw Error(ErrorCode::kParse, "chi must be 16 x 16");
    for (int k = 0; k < 16; ++k) out.chi(i, k) = complex_from_json(rows[i][k]);
  }
  return out;
}

json counts_to_json(const CountsTensor& counts) {
  const RotationSets& rot = RotationSets::standard();
  json n = json::array();
  for (int j = 0; j < kOutcomes; ++j) {
    json per_post = json::array();
    for (int k = 0; k < kPostRotations; ++k) {
      json per_pre = json::array();
      for (int l = 0; l < kPreRotations; ++l) per_pre.push_back(counts.at(j, k, l));
      per_post.push_back(per_pre);
    }
    n.push_back(per_post);
  }
  return {{"shots", counts.shots},
          {"pre_labels", std::vector<std::string>(rot.pre_labels.begin(), rot.pre_labels.end())},
          {"post_labels", std::vector<std::string>(rot.post_labels.begin(), rot.post_labels.end())},
          {"n", n}};
}

CountsTensor counts_from_json(const json& j) {
  return guarded("counts", [&] {
    CountsTensor out;
    out.shots = require(j, "shots").get<int>();
    const json& n = require(j, "n");
    if (!n.is_array() || n.size() != kOutcomes) throw Error(ErrorCode::kParse, "counts: n must be 4 x 9 x 36");
    for (int a = 0; a < kOutcomes; ++a) {
      if (!n[a].is_array() || n[a].size() != kPostRotations) {
        throw Error(ErrorCode::kParse, "counts: n must be 4 x 9 x 36");
      }
      for (int k = 0; k < kPostRotations; ++k) {
        if (!n[a][k].is_array() || n[a][k].size() != kPreRotations) {
          throw Error(ErrorCode::kParse, "counts: n must be 4 x 9 x 36");
        }
        for (int l = 0; l < kPreRotations; ++l) out.at(a, k, l) = n[a][k][l].get<std::int64_t>();
      }
    }
    out.validate();
    return out;
  });
}

json confusion_to_json(const ConfusionMatrix& c) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) rows.push_back({c.p(i, 0), c.p(i, 1), c.p(i, 2), c.p(i, 3)});
  return {{"confusion", rows}};
}

ConfusionMatrix confusion_from_json(const json& j) {
  return guarded("confusion", [&] {
    const json& rows = require(j, "confusion");
    if (!rows.is_array() || rows.size() != 4) throw Error(ErrorCode::kParse, "confusion must be 4 x 4");
    ConfusionMatrix c;
    for (int i = 0; i < 4; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 4) throw Error(ErrorCode::kParse, "confusion must be 4 x 4");
      for (int k = 0; k < 4; ++k) c.p(i, k) = rows[i][k].get<double>();
    }
    c.validate();
    return c;
  });
}

json speed_limit_to_json(const SpeedLimitResult& r, const std::string& target, double omega_max,
                         double epsilon) {
  json probes = json::array();
  for (const auto& p : r.probes) {
    probes.push_back({{"t_ns", p.t_ns}, {"best_fidelity", p.best_fidelity}, {"converged", p.converged}});
  }
  return {{"target", target},
          {"omega_max_mhz", angular_to_mhz(omega_max)},
          {"t_min_ns", r.t_min_ns},
          {"t_f_ns", r.t_f_ns},
          {"ratio", r.ratio},
          {"epsilon", epsilon},
          {"best_fidelity", r.at_t_f.best_fidelity},
          {"probes", probes}};
}

std::string sweep_to_csv(const std::vector<SweepPoint>& rows) {
  std::ostringstream out;
  out << "t_ns,best_fidelity,converged,best_seed,wall_ms\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.t_ns << ',' << r.best_fidelity << ',' << (r.converged ? 1 : 0) << ',' << r.best_seed << ','
        << r.wall_ms << '\n';
  }
  return out.str();
}

std::vector<SweepPoint> sweep_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t_ns,best_fidelity,converged,best_seed,wall_ms") {
    throw Error(ErrorCode::kParse, "sweep csv: unexpected header");
  }
  std::vector<SweepPoint> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[5];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) throw Error(ErrorCode::kParse, "sweep csv: short row");
    }
    SweepPoint p;
    try {
      p.t_ns = std::stod(cell[0]);
      p.best_fidelity = std::stod(cell[1]);
      p.converged = cell[2] == "1";
      p.best_seed = std::stoull(cell[3]);
      p.wall_ms = std::stod(cell[4]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "sweep csv: bad number in '" + line + "'");
    }
    rows.push_back(p);
  }
  return rows;
}

std::string speed_limit_rows_to_csv(const std::vector<SpeedLimitRow>& rows) {
  std::ostringstream out;
  out << "omega_over_g,omega_max_mhz,t_min_ns,t_f_ns,ratio,converged\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.omega_over_g << ',' << r.omega_max_mhz << ',' << r.t_min_ns << ',' << r.t_f_ns << ','
        << r.ratio << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command},     {"device", m.device_path.empty() ? "built-in" : m.device_path},
          {"seed", m.seed},           {"outputs", m.outputs},
          {"arguments", m.arguments}, {"tool_version", m.tool_version},
          {"wall_ms", m.wall_ms},     {"exit_code", m.exit_code}};
}

}  // namespace qsl::io
