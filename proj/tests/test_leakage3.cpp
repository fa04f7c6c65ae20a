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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qsl/evolve.hpp"
#include "qsl/gatefid.hpp"
#include "qsl/gates.hpp"
#include "qsl/kak.hpp"
#include "qsl/leakage3.hpp"
#include "test_support.hpp"

namespace qsl {
namespace {

constexpr double kPi = std::numbers::pi;

const QutritModel& chip_model() {
  static const QutritModel m = [] {
    const DeviceSpec spec = DeviceSpec::chip_default();
    return build_device(*spec.qutrit, spec.g, DipoleRatios{spec.r1, spec.r2});
  }();
  return m;
}

// Polar unitary part of a 4 x 4 block.
Mat4 polar_unitary(const Mat4& b) {
  Eigen::JacobiSVD<Mat4> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

TEST(BuildDevice, UncoupledLimit) {
  const QutritModel m = build_device_with_exchange(QutritParams{}, 0.0);
  EXPECT_NEAR(m.zz_shift(), 0.0, 1e-9);
  const RMat9& d = m.dipoles[0];
  EXPECT_NEAR(std::abs(d(level_index(2, 0), level_index(1, 0))), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(d(level_index(0, 2), level_index(0, 1))), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(d(level_index(1, 0), level_index(0, 0))), 1.0, 1e-12);
  // No element between states differing in both ladders.
  EXPECT_NEAR(d(level_index(1, 1), level_index(0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(d(level_index(1, 0), level_index(0, 1)), 0.0, 1e-12);
  EXPECT_LT((m.dipoles[0] - m.dipoles[1]).norm(), 1e-12);
  const QutritParams p;
  EXPECT_NEAR(m.energies(level_index(1, 0)) - m.energies(0), p.omega1, 1e-9);
  EXPECT_NEAR(m.energies(level_index(0, 2)) - m.energies(0), 2 * p.omega2 + p.alpha2, 1e-9);
}

TEST(BuildDevice, FitsZzShiftToCoupling) {
  const DeviceSpec spec = DeviceSpec::chip_default();
  const QutritModel& m = chip_model();
  EXPECT_LT(std::abs(m.zz_shift() / 4 - spec.g) / spec.g, 1e-3);
  EXPECT_GT(m.exchange, 0.0);
  // Dressed transition frequencies stay within J of the bare ones.
  EXPECT_LT(std::abs(m.energies(level_index(1, 0)) - m.energies(0) - ghz_to_angular(5.10)),
            m.exchange);
  EXPECT_LT(std::abs(m.energies(level_index(0, 1)) - m.energies(0) - ghz_to_angular(5.26)),
            m.exchange);
  const auto w = m.drive_frequencies();
  EXPECT_NEAR(w[0] - (m.energies(level_index(1, 0)) - m.energies(0)), m.zz_shift(), 1e-9);
  EXPECT_NEAR(w[1] - (m.energies(level_index(0, 1)) - m.energies(0)), m.zz_shift(), 1e-9);
}

TEST(BuildDevice, DipoleRatiosImposed) {
  const QutritModel& m = chip_model();
  for (const auto& d : m.dipoles) {
    EXPECT_NEAR(d(level_index(1, 1), level_index(0, 1)) / d(level_index(1, 0), level_index(0, 0)), 0.7,
                1e-12);
    EXPECT_NEAR(d(level_index(1, 1), level_index(1, 0)) / d(level_index(0, 1), level_index(0, 0)), 1.1,
                1e-12);
    EXPECT_LT((d - d.transpose()).norm(), 1e-14);
  }
}

TEST(BuildDevice, Errors) {
  try {
    build_device(QutritParams{}, mhz_to_angular(500.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRootNotBracketed);
  }
  EXPECT_THROW(build_device(QutritParams{}, -1.0), Error);
  QutritParams p;
  p.crosstalk = 1.5;
  EXPECT_THROW(build_device(p, mhz_to_angular(1.75)), Error);
  p = QutritParams{};
  p.dt_ns = 0.01;
  EXPECT_THROW(build_device(p, mhz_to_angular(1.75)), Error);
}

TEST(LabField, RampsAndContinuity) {
  const QutritModel& m = chip_model();
  const DeviceSpec spec = DeviceSpec::chip_default();
  std::mt19937_64 rng(3);
  const PulseSchedule s = testing::random_schedule(40.0, 4, spec.omega_max, rng);
  const LabField f = make_lab_field(m, s);
  EXPECT_EQ(f.total_duration(), 41.0);
  for (int drive = 0; drive < 2; ++drive) {
    EXPECT_EQ(f.envelope(drive, 0.0), Complex(0.0));
    EXPECT_NEAR(std::abs(f.envelope(drive, 41.0)), 0.0, 1e-12);
    EXPECT_EQ(f.envelope(drive, -1.0), Complex(0.0));
    EXPECT_EQ(f.envelope(drive, 42.0), Complex(0.0));
    for (double t = 0.0; t < 41.0; t += 0.01) {
      EXPECT_LT(std::abs(f.envelope(drive, t + 0.01) - f.envelope(drive, t)), 0.02 * 0.2);
    }
  }
  // Flat part reproduces the calibrated amplitude.
  const double d1 = m.dipoles[0](level_index(1, 0), level_index(0, 0));
  const Complex level = f.envelope(0, 5.0) * d1 / 2.0;
  EXPECT_NEAR(level.real(), s.amplitudes(0, kX1), 1e-12);
  EXPECT_NEAR(level.imag(), s.amplitudes(0, kY1), 1e-12);
  QutritModel wide = m;
  wide.params.edge_ns = 20.0;
  EXPECT_THROW(make_lab_field(wide, s), Error);
}

TEST(IntegrateQutrit, ZeroFieldIsFreeEvolution) {
  const QutritModel& m = chip_model();
  const PulseSchedule s = PulseSchedule::zeros(30.0, 3);
  const Mat9 u = integrate_qutrit(m, make_lab_field(m, s));
  const double total = 31.0;
  for (int a = 0; a < 9; ++a) {
    for (int b = 0; b < 9; ++b) {
      const Complex expected = a == b ? std::exp(-kI * (m.energies(a) * total)) : Complex(0.0);
      EXPECT_LT(std::abs(u(a, b) - expected), 1e-10);
    }
  }
}

TEST(IntegrateQutrit, StepHalvingAndUnitarity) {
  const QutritModel& m = chip_model();
  const DeviceSpec spec = DeviceSpec::chip_default();
  std::mt19937_64 rng(5);
  const PulseSchedule s = testing::random_schedule(30.0, 3, spec.omega_max, rng);
  const LabField f = make_lab_field(m, s);
  const Mat9 coarse = integrate_qutrit(m, f);
  QutritModel fine = m;
  fine.params.dt_ns /= 2;
  const Mat9 refined = integrate_qutrit(fine, f);
  EXPECT_LT((coarse - refined).norm(), 1e-7);
  EXPECT_LT(unitarity_error(coarse), 1e-8);
}

TEST(IntegrateQutrit, ResonantRabiFlop) {
  QutritParams p;
  p.edge_ns = 0.0;
  const QutritModel m = build_device_with_exchange(p, 0.0);
  const double omega = mhz_to_angular(2.0);
  Eigen::MatrixXd amps = Eigen::MatrixXd::Zero(1, 4);
  amps(0, kX1) = omega;
  const double t_half = kPi / (4 * omega);  // P(10) = 1/2 for H = omega X
  const Mat9 u = integrate_qutrit(m, make_lab_field(m, PulseSchedule(t_half, amps)));
  const double p10 = std::norm(u(level_index(1, 0), 0));
  const double fitted = std::asin(std::sqrt(p10)) / t_half;
  EXPECT_LT(std::abs(fitted / omega - 1.0), 0.01);
  EXPECT_LT(std::norm(u(level_index(0, 1), 0)), 1e-3);
}

TEST(Leakage, ZeroDriveMatchesDarkEvolution) {
  const DeviceSpec spec = DeviceSpec::chip_default();
  const double t = kPi / (4 * spec.g);
  const LeakageReport r = simulate_leakage(spec, PulseSchedule::zeros(t, 4), chip_model());
  EXPECT_GT(r.fidelity, 0.999);
  EXPECT_NEAR(r.leakage, 0.0, 1e-9);
  const auto lam_block = kak_decompose(polar_unitary(r.block)).content.lambda;
  // The lab run lasts T + edge; the reference carries the same dark padding.
  const auto lam_dark = kak_decompose(dark_evolution(spec, t + spec.qutrit->edge_ns)).content.lambda;
  for (int g = 0; g < 3; ++g) EXPECT_NEAR(lam_block[g], lam_dark[g], 1e-6);
}

TEST(Leakage, WeakDrivesApproachRotatingWaveModel) {
  DeviceSpec spec = DeviceSpec::chip_default();
  spec.omega_max = mhz_to_angular(0.5);
  spec.qutrit->edge_ns = 0.0;
  const QutritModel m = build_device(*spec.qutrit, spec.g, DipoleRatios{spec.r1, spec.r2});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const PulseSchedule s = testing::random_schedule(60.0, 4, spec.omega_max, rng);
    const LeakageReport r = simulate_leakage(spec, s, m);
    EXPECT_GT(r.fidelity, 0.999) << trial;
    EXPECT_GE(r.leakage, 0.0);
    EXPECT_LE(r.leakage, 1.0);
  }
}

TEST(Leakage, StrongerDrivesLeakMore) {
  const DeviceSpec spec = DeviceSpec::chip_default();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const PulseSchedule s = testing::random_schedule(24.0, 4, 0.5 * spec.omega_max, rng);
    PulseSchedule doubled = s;
    doubled.amplitudes *= 2.0;
    const double weak = simulate_leakage(spec, s, chip_model()).leakage;
    const double strong = simulate_leakage(spec, doubled, chip_model()).leakage;
    EXPECT_GT(strong, weak) << trial;
  }
}

TEST(Leakage, RejectsOutOfBoundSchedule) {
  const DeviceSpec spec = DeviceSpec::chip_default();
  PulseSchedule s = PulseSchedule::zeros(40.0, 4);
  s.amplitudes(0, 0) = 2 * spec.omega_max;
  EXPECT_THROW(simulate_leakage(spec, s, chip_model()), Error);
}

TEST(ZOptimizedFidelity, RemovesLocalZPhases) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat4 u = random_unitary(4, rng);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const Mat4 post = kron(rz(angle(rng)), rz(angle(rng)));
    const Mat4 pre = kron(rz(angle(rng)), rz(angle(rng)));
    const Mat4 b = post * u * pre;
    EXPECT_NEAR(z_optimized_fidelity(u, b), 1.0, 1e-9);
    EXPECT_LE(avg_gate_fidelity_closed_form(u, b), z_optimized_fidelity(u, b) + 1e-12);
  }
}

}  // namespace
}  // namespace qsl
