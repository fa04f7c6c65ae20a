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

// Device and pulse data model. Internal units: angular frequency in rad/ns,
// time in ns. Files carry linear frequencies (MHz, GHz); convert at the edge.

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qsl/matcore.hpp"

namespace qsl {

inline double mhz_to_angular(double f_mhz) { return 2.0 * std::numbers::pi * f_mhz * 1e-3; }
inline double angular_to_mhz(double w) { return w / (2.0 * std::numbers::pi * 1e-3); }
inline double ghz_to_angular(double f_ghz) { return 2.0 * std::numbers::pi * f_ghz; }
inline double angular_to_ghz(double w) { return w / (2.0 * std::numbers::pi); }

enum class InteractionKind { kIsing, kXY, kXXZ };

std::string to_string(InteractionKind kind);
InteractionKind parse_interaction(const std::string& name);

// Two coupled transmons truncated to three levels each.
struct QutritParams {
  double omega1 = ghz_to_angular(5.10);
  double omega2 = ghz_to_angular(5.26);
  double alpha1 = mhz_to_angular(-270.0);
  double alpha2 = mhz_to_angular(-320.0);
  double edge_ns = 1.0;
  double dt_ns = 0.002;
  // Weight of the other qubit's ladder in each drive's dipole operator;
  // 1 is a single shared dipole for both fields.
  double crosstalk = 1.0;

  void validate() const;
};

struct DeviceSpec {
  InteractionKind interaction = InteractionKind::kIsing;
  double eta = 0.5;  // ZZ weight, XXZ only
  double g = mhz_to_angular(1.75);
  double r1 = 1.1;
  double r2 = 0.7;
  double omega_max = mhz_to_angular(6.0);
  std::optional<QutritParams> qutrit;

  void validate() const;

  // Chip values: Ising, g = 2pi x 1.75 MHz, r1 = 1.1, r2 = 0.7.
  static DeviceSpec chip_default();
  // Undistorted drives (r1 = r2 = 1) for the given interaction.
  static DeviceSpec ideal(InteractionKind kind, double g, double omega_max, double eta = 0.5);
};

// Control channels in PulseSchedule column order.
enum Channel : int { kX1 = 0, kY1 = 1, kX2 = 2, kY2 = 3 };
inline constexpr int kNumChannels = 4;

// M-segment piecewise-constant waveform. Segment m (0-based) spans
// [m T / M, (m + 1) T / M]. amplitudes is M x 4 in rad/ns.
// num_segments is the declared M; validate_schedule flags a mismatch with the
// amplitude rows.
struct PulseSchedule {
  double t_ns = 0.0;
  int num_segments = 0;
  Eigen::MatrixXd amplitudes;

  PulseSchedule() = default;
  PulseSchedule(double t, Eigen::MatrixXd amps)
      : t_ns(t), num_segments(static_cast<int>(amps.rows())), amplitudes(std::move(amps)) {}

  static PulseSchedule zeros(double t, int segments);

  int segments() const { return num_segments; }
  double segment_duration() const { return t_ns / num_segments; }
};

// Static and drive operators of one device, precomputed for propagation.
struct ControlSystem {
  Mat4 h0;
  std::array<Mat4, kNumChannels> drives;
};

Mat4 static_hamiltonian(const DeviceSpec& spec);

// (sigma~1x, sigma~1y, sigma~2x, sigma~2y) with the state-dependent drive
// factors: sigma~1 = sigma (x) (|0><0| + r2 |1><1|),
//          sigma~2 = (|0><0| + r1 |1><1|) (x) sigma.
std::array<Mat4, kNumChannels> drive_operators(const DeviceSpec& spec);

ControlSystem make_control_system(const DeviceSpec& spec);

// H0 + sum_c amplitude(m, c) * drive_c for 0-based segment m.
Mat4 segment_hamiltonian(const DeviceSpec& spec, const PulseSchedule& schedule, int m);
Mat4 segment_hamiltonian(const ControlSystem& system, const PulseSchedule& schedule, int m);

struct BoundViolation {
  int segment = 0;
  int channel = 0;
  double value = 0.0;
  double excess = 0.0;  // |value| - omega_max
};

struct ScheduleReport {
  std::vector<BoundViolation> violations;
  std::vector<std::string> structural;

  bool ok() const { return violations.empty() && structural.empty(); }
  std::string summary() const;
};

// Amplitude bound is inclusive: |value| <= omega_max passes.
ScheduleReport validate_schedule(const DeviceSpec& spec, const PulseSchedule& schedule);

}  // namespace qsl
