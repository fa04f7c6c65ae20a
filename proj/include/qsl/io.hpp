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

#pragma once

// File schemas. Frequencies are linear on disk (MHz, GHz) and angular in memory.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsl/gatefid.hpp"
#include "qsl/model.hpp"
#include "qsl/optctrl.hpp"
#include "qsl/tomo.hpp"

namespace qsl::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Throws kParse on unreadable or malformed files.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);
void write_text(const std::filesystem::path& path, const std::string& text);

// {interaction, eta, g_mhz, r1, r2, omega_max_mhz, qutrit?: {f1_ghz, f2_ghz,
// alpha1_mhz, alpha2_mhz, edge_ns, dt_ps, crosstalk}}. Missing keys keep the
// chip defaults.
DeviceSpec device_from_json(const json& j);
json device_to_json(const DeviceSpec& spec);

// {t_ns, segments, channels: 4 rows of M values in MHz}.
PulseSchedule pulse_from_json(const json& j);
json pulse_to_json(const PulseSchedule& schedule);

// 4 x 4 row-major [re, im] pairs.
Mat4 matrix_from_json(const json& j);
json matrix_to_json(const Mat4& m);

json ptm_to_json(const PTM& r);
PTM ptm_from_json(const json& j);
json chi_to_json(const ChiMatrix& chi);
ChiMatrix chi_from_json(const json& j);

// {shots, pre_labels, post_labels, n: 4 x 9 x 36}.
json counts_to_json(const CountsTensor& counts);
CountsTensor counts_from_json(const json& j);

json confusion_to_json(const ConfusionMatrix& c);
ConfusionMatrix confusion_from_json(const json& j);

json speed_limit_to_json(const SpeedLimitResult& r, const std::string& target, double omega_max,
                         double epsilon);

// t_ns,best_fidelity,converged,best_seed,wall_ms
std::string sweep_to_csv(const std::vector<SweepPoint>& rows);
std::vector<SweepPoint> sweep_from_csv(const std::string& text);

// One ratio-vs-bound row; t_f_ns is NaN when the search failed.
struct SpeedLimitRow {
  double omega_over_g = 0.0;
  double omega_max_mhz = 0.0;
  double t_min_ns = 0.0;
  double t_f_ns = 0.0;
  double ratio = 0.0;
  bool converged = false;
};
// omega_over_g,omega_max_mhz,t_min_ns,t_f_ns,ratio,converged
std::string speed_limit_rows_to_csv(const std::vector<SpeedLimitRow>& rows);

struct RunManifest {
  std::string command;
  std::string device_path;  // empty: built-in chip defaults
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::vector<std::string> arguments;
  std::string tool_version = kToolVersion;
  double wall_ms = 0.0;
  int exit_code = 0;
};
json manifest_to_json(const RunManifest& m);

}  // namespace qsl::io
