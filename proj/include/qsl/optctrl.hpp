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

// Pulse optimization: momentum ascent on the average gate fidelity over
// bounded piecewise-constant amplitudes, with random restarts, a numerical
// speed-limit search, fidelity-vs-time sweeps and pulse-noise studies.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsl/gates.hpp"
#include "qsl/matcore.hpp"
#include "qsl/model.hpp"

namespace qsl {

struct OptimizerConfig {
  int segments = 16;
  int restarts = 20;
  int max_iterations = 5000;
  double learning_rate = 0.05;  // step length in units of omega_max along the unit gradient
  double momentum = 0.9;
  double epsilon = 0.01;  // target infidelity
  std::uint64_t seed = 1;
  int threads = 0;            // 0: one per hardware thread
  int plateau_iterations = 50;  // halve the learning rate after this many without progress
  int stall_iterations = 200;   // stop after this many consecutive |dF| < 1e-12
  // Restarts run in waves of this size; with early_stop, later waves are
  // skipped once a wave has converged. Results do not depend on `threads`.
  int wave_size = 4;
  bool early_stop = false;

  void validate() const;
};

struct RestartRecord {
  std::uint64_t seed = 0;
  double fidelity = 0.0;
  int iterations = 0;
  bool warm_start = false;
};

struct OptimResult {
  double best_fidelity = 0.0;
  PulseSchedule best_schedule;
  std::vector<RestartRecord> per_restart;
  int best_restart = -1;
  bool converged = false;

  std::uint64_t best_seed() const;
};

struct TargetGate {
  Mat4 unitary = Mat4::Identity();
  std::optional<NamedGate> tag;

  static TargetGate named(NamedGate gate);
};

// Seed of restart `index` derived from the user seed (splitmix64 mixing).
std::uint64_t restart_seed(std::uint64_t seed, int index);

// F = (|Tr(U_t^dagger U)|^2 + 4) / 20 and dF / d amplitude(m, c) (per rad/ns).
struct FidelityGradient {
  double fidelity = 0.0;
  Eigen::MatrixXd gradient;  // M x 4
};
FidelityGradient fidelity_with_gradient(const ControlSystem& system, const Mat4& target,
                                        const PulseSchedule& schedule);

// Warm starts are amplitude matrices (M x 4, rad/ns) tried before the random
// restarts; they count towards config.restarts.
OptimResult optimize_pulse(const DeviceSpec& spec, const Mat4& target, double t,
                           const OptimizerConfig& config,
                           const std::vector<Eigen::MatrixXd>& warm_starts = {});

struct SpeedLimitProbe {
  double t_ns = 0.0;
  double best_fidelity = 0.0;
  bool converged = false;
};

struct SpeedLimitResult {
  double t_min_ns = 0.0;
  double t_f_ns = 0.0;
  double ratio = 0.0;
  OptimResult at_t_f;
  std::vector<SpeedLimitProbe> probes;
};

// Bisection on T until the bracket is narrower than 0.01 T_min. The default
// bracket is [0.75, 1.5] T_min; the upper end grows up to 4 T_min before
// kBracketNotFound is thrown. Probes use early stopping and warm starts from
// the nearest converged schedule.
SpeedLimitResult find_speed_limit(const DeviceSpec& spec, const TargetGate& target,
                                  const OptimizerConfig& config,
                                  std::optional<std::pair<double, double>> t_bracket = {});

struct SweepPoint {
  double t_ns = 0.0;
  double best_fidelity = 0.0;
  bool converged = false;
  std::uint64_t best_seed = 0;
  double wall_ms = 0.0;
  PulseSchedule best_schedule;
  bool failed = false;  // optimize_pulse threw; see message
  std::string message;
};

// Points are optimized from the longest duration down; each point also tries
// the best schedule of the next longer one as a warm start.
std::vector<SweepPoint> sweep_fidelity_vs_time(const DeviceSpec& spec, const Mat4& target,
                                               const OptimizerConfig& config,
                                               const std::vector<double>& t_grid);

struct RobustnessResult {
  double noiseless_infidelity = 0.0;
  double mean_infidelity = 0.0;
  double std_infidelity = 0.0;
  std::vector<double> samples;
};

// Adds N(0, sigma_fraction * omega_max) to every amplitude (no re-clipping).
RobustnessResult robustness_study(const DeviceSpec& spec, const PulseSchedule& schedule,
                                  const Mat4& target, double sigma_fraction, int trials,
                                  std::uint64_t seed);

}  // namespace qsl
