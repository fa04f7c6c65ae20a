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

#include "qsl/model.hpp"

#include <cmath>
#include <sstream>

namespace qsl {

std::string to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::kIsing: return "ising";
    case InteractionKind::kXY: return "xy";
    case InteractionKind::kXXZ: return "xxz";
  }
  return "unknown";
}

InteractionKind parse_interaction(const std::string& name) {
  if (name == "ising") return InteractionKind::kIsing;
  if (name == "xy") return InteractionKind::kXY;
  if (name == "xxz") return InteractionKind::kXXZ;
  throw Error(ErrorCode::kParse, "unknown interaction kind '" + name + "'");
}

void QutritParams::validate() const {
  if (!(omega1 > 0.0) || !(omega2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "qutrit: transition frequencies must be positive");
  }
  if (!std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw Error(ErrorCode::kInvalidArgument, "qutrit: anharmonicities must be finite");
  }
  if (!(edge_ns >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "qutrit: edge_ns must be non-negative");
  }
  if (!(crosstalk >= 0.0 && crosstalk <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "qutrit: crosstalk must lie in [0, 1]");
  }
  const double fastest_ghz = std::max(omega1, omega2) / (2.0 * std::numbers::pi);
  if (!(dt_ns > 0.0) || dt_ns > 1.0 / (40.0 * fastest_ghz)) {
    throw Error(ErrorCode::kInvalidArgument,
                "qutrit: dt_ns must resolve the carrier (dt <= 1 / (40 f_max))");
  }
}

void DeviceSpec::validate() const {
  if (!(g > 0.0)) throw Error(ErrorCode::kInvalidArgument, "device: g must be positive");
  if (!(omega_max >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "device: omega_max must be non-negative");
  }
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "device: r1 and r2 must be positive");
  }
  if (interaction == InteractionKind::kXXZ && !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidArgument, "device: XXZ requires a finite eta");
  }
  if (qutrit) qutrit->validate();
}

DeviceSpec DeviceSpec::chip_default() {
  DeviceSpec spec;
  spec.qutrit = QutritParams{};
  return spec;
}

DeviceSpec DeviceSpec::ideal(InteractionKind kind, double g, double omega_max, double eta) {
  DeviceSpec spec;
  spec.interaction = kind;
  spec.g = g;
  spec.eta = eta;
  spec.r1 = 1.0;
  spec.r2 = 1.0;
  spec.omega_max = omega_max;
  return spec;
}

PulseSchedule PulseSchedule::zeros(double t, int segments) {
  if (segments < 1) throw Error(ErrorCode::kInvalidArgument, "schedule: segments must be >= 1");
  return PulseSchedule(t, Eigen::MatrixXd::Zero(segments, kNumChannels));
}

Mat4 static_hamiltonian(const DeviceSpec& spec) {
  const Mat2 id = pauli::identity();
  const Mat2 x = pauli::x();
  const Mat2 y = pauli::y();
  const Mat2 z = pauli::z();
  switch (spec.interaction) {
    case InteractionKind::kIsing:
      return spec.g * (kron(z, id) + kron(id, z) + kron(z, z));
    case InteractionKind::kXY:
      return spec.g * (kron(x, x) + kron(y, y));
    case InteractionKind::kXXZ:
      return spec.g * (kron(x, x) + kron(y, y) + spec.eta * kron(z, z));
  }
  throw Error(ErrorCode::kInvalidArgument, "static_hamiltonian: unknown interaction");
}

std::array<Mat4, kNumChannels> drive_operators(const DeviceSpec& spec) {
  Mat2 weight1 = Mat2::Zero();  // acts on qubit 1, scales the qubit-2 drive
  weight1(0, 0) = 1.0;
  weight1(1, 1) = spec.r1;
  Mat2 weight2 = Mat2::Zero();
  weight2(0, 0) = 1.0;
  weight2(1, 1) = spec.r2;
  return {kron(pauli::x(), weight2), kron(pauli::y(), weight2), kron(weight1, pauli::x()),
          kron(weight1, pauli::y())};
}

ControlSystem make_control_system(const DeviceSpec& spec) {
  return ControlSystem{static_hamiltonian(spec), drive_operators(spec)};
}

namespace {

void require_segment(const PulseSchedule& schedule, int m) {
  if (schedule.amplitudes.cols() != kNumChannels ||
      schedule.amplitudes.rows() != schedule.num_segments) {
    throw Error(ErrorCode::kInvalidArgument, "schedule: amplitudes must have 4 channels");
  }
  if (m < 0 || m >= schedule.segments()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "segment index " + std::to_string(m) + " outside [0, " +
                    std::to_string(schedule.segments()) + ")");
  }
}

}  // namespace

Mat4 segment_hamiltonian(const ControlSystem& system, const PulseSchedule& schedule, int m) {
  require_segment(schedule, m);
  Mat4 h = system.h0;
  for (int c = 0; c < kNumChannels; ++c) h += schedule.amplitudes(m, c) * system.drives[c];
  return h;
}

Mat4 segment_hamiltonian(const DeviceSpec& spec, const PulseSchedule& schedule, int m) {
  return segment_hamiltonian(make_control_system(spec), schedule, m);
}

std::string ScheduleReport::summary() const {
  std::ostringstream out;
  for (const auto& s : structural) out << s << "; ";
  for (const auto& v : violations) {
    out << "segment " << v.segment << " channel " << v.channel << " exceeds bound by "
        << v.excess << " rad/ns; ";
  }
  return out.str();
}

ScheduleReport validate_schedule(const DeviceSpec& spec, const PulseSchedule& schedule) {
  ScheduleReport report;
  if (!(schedule.t_ns >= 0.0) || !std::isfinite(schedule.t_ns)) {
    report.structural.push_back("t_ns must be finite and non-negative");
  }
  if (schedule.num_segments < 1) {
    report.structural.push_back("schedule needs at least one segment");
  }
  if (schedule.amplitudes.rows() != schedule.num_segments) {
    report.structural.push_back("amplitude rows (" + std::to_string(schedule.amplitudes.rows()) +
                                ") do not match declared segments (" +
                                std::to_string(schedule.num_segments) + ")");
  }
  if (schedule.amplitudes.rows() > 0 && schedule.amplitudes.cols() != kNumChannels) {
    report.structural.push_back("amplitudes must have exactly 4 channels");
  }
  if (!report.structural.empty()) return report;
  for (int m = 0; m < schedule.segments(); ++m) {
    for (int c = 0; c < kNumChannels; ++c) {
      const double value = schedule.amplitudes(m, c);
      if (!std::isfinite(value)) {
        report.structural.push_back("non-finite amplitude at segment " + std::to_string(m));
      } else if (std::abs(value) > spec.omega_max) {
        report.violations.push_back({m, c, value, std::abs(value) - spec.omega_max});
      }
    }
  }
  return report;
}

}  // namespace qsl
