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

// Two coupled transmons, three levels each, simulated in the lab frame with
// finite pulse edges and no rotating-wave approximation, compared against the
// ideal qubit-frame propagator.
//
// Level index 3 n1 + n2. Dressed states carry the label of the bare state they
// overlap most.

#include <array>
#include <optional>

#include "qsl/matcore.hpp"
#include "qsl/model.hpp"

namespace qsl {

using Mat9 = Eigen::Matrix<Complex, 9, 9>;
using RMat9 = Eigen::Matrix<double, 9, 9>;
using RVec9 = Eigen::Matrix<double, 9, 1>;

inline constexpr int level_index(int n1, int n2) { return 3 * n1 + n2; }

// Target ratios d1(11,01) / d1(10,00) = r2 and d2(11,10) / d2(01,00) = r1 imposed on
// the dressed dipole matrices, so the lab model carries the drive distortion.
struct DipoleRatios {
  double r1 = 1.0;
  double r2 = 1.0;
};

struct QutritModel {
  QutritParams params;
  double exchange = 0.0;  // J in rad/ns
  RVec9 energies;         // dressed, rad/ns, by label
  RMat9 dressed_states;   // column m: bare-basis coefficients of dressed |m>
  // Dressed dipole operator seen by drive i: (a_i + a_i^dag) + crosstalk (a_j + a_j^dag).
  // Both are the shared (a1 + a1^dag) + (a2 + a2^dag) at crosstalk 1.
  std::array<RMat9, 2> dipoles;

  // E11 - E10 - E01 + E00.
  double zz_shift() const;
  // Drive and frame frequencies E11 - E01 (qubit 1) and E11 - E10 (qubit 2).
  std::array<double, 2> drive_frequencies() const;
};

// Dressed model with a given exchange J.
QutritModel build_device_with_exchange(const QutritParams& params, double exchange,
                                       std::optional<DipoleRatios> ratios = std::nullopt);

// Fits J so that zz_shift() = 4 g_target. Throws kRootNotBracketed.
QutritModel build_device(const QutritParams& params, double g_target,
                         std::optional<DipoleRatios> ratios = std::nullopt);

// Complex envelopes per segment, scaled so that d1(10,00) E1 / 2 = Omega1x + i Omega1y
// (and d2(01,00) E2 / 2 for qubit 2). Each boundary b_m starts a linear ramp of
// edge_ns from the previous level; the last ramp to zero spans [T, T + edge].
struct LabField {
  double t_ns = 0.0;
  double edge_ns = 0.0;
  std::vector<Complex> env1;
  std::vector<Complex> env2;

  Complex envelope(int drive, double t) const;
  double total_duration() const { return t_ns + edge_ns; }
};

// Throws kInvalidArgument when edge_ns exceeds a segment duration.
LabField make_lab_field(const QutritModel& model, const PulseSchedule& schedule);

// Lab-frame propagator over [0, field.total_duration()] in the dressed basis,
// with drive term sum_i dipole_i Re(E_i(t) e^{-i w_i t}). Fourth-order Magnus
// steps of params.dt_ns in the interaction picture of the dressed energies.
// Throws kStepTooLarge on unitarity drift above 1e-6.
Mat9 integrate_qutrit(const QutritModel& model, const LabField& field,
                      std::optional<std::array<double, 2>> drive_freqs = std::nullopt);

struct LeakageReport {
  double fidelity = 0.0;             // against the padded qubit-model reference
  double fidelity_z_optimized = 0.0; // after free single-qubit z phases before and after
  double leakage = 0.0;              // 1 - Tr(B^dag B) / 4
  Mat4 block;                        // projected rotating-frame propagator B
  Mat4 reference;                    // D(e/2) U(T) D(e/2)
};

// The qubit block B = P R(T)^dag U_lab P with R(t) = exp(-i (w1 n1 + w2 n2) t) is
// scored without renormalization: F = (|Tr(U_ref^dag B)|^2 + Tr(B^dag B)) / 20.
LeakageReport simulate_leakage(const DeviceSpec& spec, const PulseSchedule& schedule,
                               const QutritModel& model);
double leakage_fidelity(const DeviceSpec& spec, const PulseSchedule& schedule,
                        const QutritModel& model);

// max over z phases of (|Tr(u^dag Zpost b Zpre)|^2 + Tr(b^dag b)) / 20.
double z_optimized_fidelity(const Mat4& u_target, const Mat4& block);

}  // namespace qsl
