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

#include "qsl/leakage3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include "qsl/evolve.hpp"

namespace qsl {

namespace {

RMat9 bare_hamiltonian(const QutritParams& p, double exchange) {
  RMat9 h = RMat9::Zero();
  for (int n1 = 0; n1 < 3; ++n1) {
    for (int n2 = 0; n2 < 3; ++n2) {
      h(level_index(n1, n2), level_index(n1, n2)) = p.omega1 * n1 + 0.5 * p.alpha1 * n1 * (n1 - 1) +
                                                    p.omega2 * n2 + 0.5 * p.alpha2 * n2 * (n2 - 1);
    }
  }
  // J (a1^dag a2 + a1 a2^dag)
  for (int n1 = 0; n1 < 2; ++n1) {
    for (int n2 = 1; n2 < 3; ++n2) {
      const double amp = exchange * std::sqrt((n1 + 1.0) * n2);
      const int from = level_index(n1, n2), to = level_index(n1 + 1, n2 - 1);
      h(to, from) += amp;
      h(from, to) += amp;
    }
  }
  return h;
}

// w1 (a1 + a1^dag) + w2 (a2 + a2^dag) in the bare basis.
RMat9 bare_dipole(double w1, double w2) {
  RMat9 d = RMat9::Zero();
  for (int n1 = 0; n1 < 3; ++n1) {
    for (int n2 = 0; n2 < 3; ++n2) {
      const int i = level_index(n1, n2);
      if (n1 < 2) d(level_index(n1 + 1, n2), i) = d(i, level_index(n1 + 1, n2)) = w1 * std::sqrt(n1 + 1.0);
      if (n2 < 2) d(level_index(n1, n2 + 1), i) = d(i, level_index(n1, n2 + 1)) = w2 * std::sqrt(n2 + 1.0);
    }
  }
  return d;
}

void diagonalize(const QutritParams& p, double exchange, RVec9& energies, RMat9& states) {
  Eigen::SelfAdjointEigenSolver<RMat9> solver(bare_hamiltonian(p, exchange));
  const RMat9 v = solver.eigenvectors();
  // Greedy label assignment by largest bare overlap.
  std::array<bool, 9> used_label{}, used_vec{};
  for (int round = 0; round < 9; ++round) {
    double best = -1.0;
    int bl = -1, bv = -1;
    for (int l = 0; l < 9; ++l) {
      if (used_label[l]) continue;
      for (int k = 0; k < 9; ++k) {
        if (used_vec[k]) continue;
        if (std::abs(v(l, k)) > best) {
          best = std::abs(v(l, k));
          bl = l;
          bv = k;
        }
      }
    }
    used_label[bl] = used_vec[bv] = true;
    energies(bl) = solver.eigenvalues()(bv);
    states.col(bl) = v.col(bv) * (v(bl, bv) < 0.0 ? -1.0 : 1.0);
  }
}

double zz_of(const QutritParams& p, double exchange) {
  RVec9 e;
  RMat9 s;
  diagonalize(p, exchange, e, s);
  return e(level_index(1, 1)) - e(level_index(1, 0)) - e(level_index(0, 1)) + e(level_index(0, 0));
}

Complex ramp(const std::vector<Complex>& env, double t, double t_total, double edge) {
  const int m_count = static_cast<int>(env.size());
  if (t < 0.0 || t > t_total + edge) return 0.0;
  const double seg = t_total / m_count;
  int m = static_cast<int>(std::floor(t / seg));
  if (m < 0) m = 0;
  const auto level = [&](int k) { return (k < 0 || k >= m_count) ? Complex(0.0) : env[k]; };
  if (m >= m_count) {
    // Final ramp to zero over [T, T + edge].
    const double s = edge > 0.0 ? (t - t_total) / edge : 1.0;
    return (1.0 - std::clamp(s, 0.0, 1.0)) * level(m_count - 1);
  }
  const double into = t - m * seg;
  if (edge > 0.0 && into < edge) {
    const double s = into / edge;
    return (1.0 - s) * level(m - 1) + s * level(m);
  }
  return level(m);
}

}  // namespace

double QutritModel::zz_shift() const {
  return energies(level_index(1, 1)) - energies(level_index(1, 0)) - energies(level_index(0, 1)) +
         energies(level_index(0, 0));
}

std::array<double, 2> QutritModel::drive_frequencies() const {
  return {energies(level_index(1, 1)) - energies(level_index(0, 1)),
          energies(level_index(1, 1)) - energies(level_index(1, 0))};
}

QutritModel build_device_with_exchange(const QutritParams& params, double exchange,
                                       std::optional<DipoleRatios> ratios) {
  params.validate();
  if (!std::isfinite(exchange)) {
    throw Error(ErrorCode::kInvalidArgument, "build_device: exchange must be finite");
  }
  QutritModel model;
  model.params = params;
  model.exchange = exchange;
  diagonalize(params, exchange, model.energies, model.dressed_states);
  const RMat9& v = model.dressed_states;
  const double k = params.crosstalk;
  model.dipoles = {v.transpose() * bare_dipole(1.0, k) * v, v.transpose() * bare_dipole(k, 1.0) * v};
  if (ratios) {
    if (!(ratios->r1 > 0.0) || !(ratios->r2 > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "build_device: dipole ratios must be positive");
    }
    const int g00 = level_index(0, 0), g01 = level_index(0, 1), g10 = level_index(1, 0),
              g11 = level_index(1, 1);
    for (auto& d : model.dipoles) {
      d(g11, g01) = d(g01, g11) = ratios->r2 * d(g10, g00);
      d(g11, g10) = d(g10, g11) = ratios->r1 * d(g01, g00);
    }
  }
  return model;
}

QutritModel build_device(const QutritParams& params, double g_target,
                         std::optional<DipoleRatios> ratios) {
  params.validate();
  if (!(g_target > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "build_device: g_target must be positive");
  }
  const double target = 4.0 * g_target;
  auto residual = [&](double j) { return zz_of(params, j) - target; };
  // Beyond ~ the qubit detuning the dressed labels stop being meaningful.
  const double lo = 0.0;
  const double hi = 0.5 * std::abs(params.omega1 - params.omega2) + mhz_to_angular(50.0);
  const double f_lo = residual(lo), f_hi = residual(hi);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    throw Error(ErrorCode::kRootNotBracketed,
                "build_device: ZZ shift 4 g is not reachable for exchange in [0, " +
                    std::to_string(angular_to_mhz(hi)) + "] MHz");
  }
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return build_device_with_exchange(params, 0.5 * (bracket.first + bracket.second), ratios);
}

Complex LabField::envelope(int drive, double t) const {
  if (drive != 0 && drive != 1) throw Error(ErrorCode::kIndexOutOfRange, "envelope: drive is 0 or 1");
  return ramp(drive == 0 ? env1 : env2, t, t_ns, edge_ns);
}

LabField make_lab_field(const QutritModel& model, const PulseSchedule& schedule) {
  if (schedule.segments() < 1 || schedule.amplitudes.rows() != schedule.segments() ||
      schedule.amplitudes.cols() != kNumChannels || !(schedule.t_ns > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "make_lab_field: malformed schedule");
  }
  const double edge = model.params.edge_ns;
  if (edge > schedule.segment_duration()) {
    throw Error(ErrorCode::kInvalidArgument, "make_lab_field: edge_ns exceeds the segment duration");
  }
  const double d1 = model.dipoles[0](level_index(1, 0), level_index(0, 0));
  const double d2 = model.dipoles[1](level_index(0, 1), level_index(0, 0));
  LabField field;
  field.t_ns = schedule.t_ns;
  field.edge_ns = edge;
  for (int m = 0; m < schedule.segments(); ++m) {
    field.env1.push_back(2.0 * Complex(schedule.amplitudes(m, kX1), schedule.amplitudes(m, kY1)) / d1);
    field.env2.push_back(2.0 * Complex(schedule.amplitudes(m, kX2), schedule.amplitudes(m, kY2)) / d2);
  }
  return field;
}

Mat9 integrate_qutrit(const QutritModel& model, const LabField& field,
                      std::optional<std::array<double, 2>> drive_freqs) {
  const std::array<double, 2> w = drive_freqs.value_or(model.drive_frequencies());
  const double total = field.total_duration();
  if (!(total >= 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::kInvalidArgument, "integrate_qutrit: invalid duration");
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(total / model.params.dt_ns - 1e-9)));
  const double dt = total / steps;
  const RVec9& e = model.energies;
  const Mat9 dip1 = model.dipoles[0].cast<Complex>();
  const Mat9 dip2 = model.dipoles[1].cast<Complex>();

  auto hamiltonian = [&](double t, bool& zero) {
    const double f1 = (field.envelope(0, t) * std::exp(-kI * (w[0] * t))).real();
    const double f2 = (field.envelope(1, t) * std::exp(-kI * (w[1] * t))).real();
    zero = f1 == 0.0 && f2 == 0.0;
    Eigen::Matrix<Complex, 9, 1> phase;
    for (int m = 0; m < 9; ++m) phase(m) = std::exp(kI * (e(m) * t));
    return Mat9(phase.asDiagonal() * (f1 * dip1 + f2 * dip2) * phase.conjugate().asDiagonal());
  };

  // Fourth-order Magnus step on the two Gauss-Legendre nodes:
  // U <- exp(-i dt (H1 + H2) / 2 - (sqrt 3 / 12) dt^2 [H2, H1]) U.
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
  Mat9 u = Mat9::Identity();
  Eigen::SelfAdjointEigenSolver<Mat9> solver;
  for (int s = 0; s < steps; ++s) {
    bool zero1 = false, zero2 = false;
    const Mat9 h1 = hamiltonian((s + c1) * dt, zero1);
    const Mat9 h2 = hamiltonian((s + c2) * dt, zero2);
    if (zero1 && zero2) continue;
    // Generator written as -i dt G with G Hermitian.
    const Mat9 g = 0.5 * (h1 + h2) - kI * (std::sqrt(3.0) / 12.0) * dt * (h2 * h1 - h1 * h2);
    solver.compute(0.5 * (g + g.adjoint()));
    Eigen::Matrix<Complex, 9, 1> ev;
    for (int m = 0; m < 9; ++m) ev(m) = std::exp(-kI * (solver.eigenvalues()(m) * dt));
    u = (solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint() * u).eval();
  }
  const double drift = unitarity_error(u);
  if (drift > 1e-6) {
    throw Error(ErrorCode::kStepTooLarge, "integrate_qutrit: unitarity drift " + std::to_string(drift));
  }
  Eigen::Matrix<Complex, 9, 1> free;
  for (int m = 0; m < 9; ++m) free(m) = std::exp(-kI * (e(m) * total));
  return free.asDiagonal() * u;
}

double z_optimized_fidelity(const Mat4& u_target, const Mat4& block) {
  // Tr(u^dag Zpost b Zpre) = sum_kl conj(u_kl) b_kl e^{i phase_kl}; phases are
  // sums of +-a1 +-a2 (post) and +-c1 +-c2 (pre), index bits select the sign.
  Mat4 c;
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) c(k, l) = std::conj(u_target(k, l)) * block(k, l);
  }
  auto sign = [](int index, int bit) { return ((index >> bit) & 1) ? 1.0 : -1.0; };
  auto overlap = [&](const std::array<double, 4>& a) {
    Complex sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        const double ph = sign(k, 1) * a[0] + sign(k, 0) * a[1] + sign(l, 1) * a[2] + sign(l, 0) * a[3];
        sum += c(k, l) * std::exp(kI * ph);
      }
    }
    return sum;
  };
  double best = std::norm(overlap({0, 0, 0, 0}));
  const double kPi = std::numbers::pi;
  for (int start = 0; start < 16; ++start) {
    std::array<double, 4> a{};
    for (int q = 0; q < 4; ++q) a[q] = ((start >> q) & 1) * kPi / 4;
    for (int sweep = 0; sweep < 100; ++sweep) {
      double before = std::norm(overlap(a));
      for (int q = 0; q < 4; ++q) {
        // Split the sum into the e^{+i a_q} and e^{-i a_q} parts.
        Complex plus = 0.0, minus = 0.0;
        std::array<double, 4> rest = a;
        rest[q] = 0.0;
        for (int k = 0; k < 4; ++k) {
          for (int l = 0; l < 4; ++l) {
            const double signs[4] = {sign(k, 1), sign(k, 0), sign(l, 1), sign(l, 0)};
            double ph = 0.0;
            for (int r = 0; r < 4; ++r) ph += signs[r] * rest[r];
            (signs[q] > 0 ? plus : minus) += c(k, l) * std::exp(kI * ph);
          }
        }
        a[q] = 0.5 * (std::arg(minus) - std::arg(plus));
      }
      const double after = std::norm(overlap(a));
      best = std::max(best, after);
      if (after - before < 1e-15) break;
    }
  }
  return (best + (block.adjoint() * block).trace().real()) / 20.0;
}

LeakageReport simulate_leakage(const DeviceSpec& spec, const PulseSchedule& schedule,
                               const QutritModel& model) {
  const ScheduleReport check = validate_schedule(spec, schedule);
  if (!check.ok()) throw Error(ErrorCode::kScheduleViolation, "simulate_leakage: " + check.summary());
  const LabField field = make_lab_field(model, schedule);
  const Mat9 lab = integrate_qutrit(model, field);
  const auto w = model.drive_frequencies();
  const double total = field.total_duration();
  const int idx[4] = {level_index(0, 0), level_index(0, 1), level_index(1, 0), level_index(1, 1)};

  LeakageReport out;
  for (int a = 0; a < 4; ++a) {
    const int n1 = idx[a] / 3, n2 = idx[a] % 3;
    const Complex frame = std::exp(kI * ((w[0] * n1 + w[1] * n2) * total));
    for (int b = 0; b < 4; ++b) out.block(a, b) = frame * lab(idx[a], idx[b]);
  }
  const Mat4 pad = dark_evolution(spec, 0.5 * field.edge_ns);
  out.reference = pad * propagate(spec, schedule).u * pad;
  const double norm = (out.block.adjoint() * out.block).trace().real();
  out.fidelity = (std::norm((out.reference.adjoint() * out.block).trace()) + norm) / 20.0;
  out.fidelity_z_optimized = std::max(out.fidelity, z_optimized_fidelity(out.reference, out.block));
  out.leakage = std::clamp(1.0 - norm / 4.0, 0.0, 1.0);
  return out;
}

double leakage_fidelity(const DeviceSpec& spec, const PulseSchedule& schedule,
                        const QutritModel& model) {
  return simulate_leakage(spec, schedule, model).fidelity;
}

}  // namespace qsl
