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

#include "qsl/optctrl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "qsl/evolve.hpp"
#include "qsl/gatefid.hpp"
#include "qsl/kak.hpp"

namespace qsl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Eigen::MatrixXd clip_unit(const Eigen::MatrixXd& u) { return u.cwiseMax(-1.0).cwiseMin(1.0); }

// Learning-rate floor after repeated plateau halvings (2^-20).
constexpr double kMinRateFraction = 1.0 / 1048576.0;

struct Descent {
  double fidelity = -1.0;
  Eigen::MatrixXd u;  // normalized amplitudes in [-1, 1]
  int iterations = 0;
};

// Nesterov ascent in normalized coordinates u = amplitude / omega_max, with
// projection onto the box after every step.
Descent run_descent(const ControlSystem& system, const Mat4& target, double t, double omega_max,
                    const Eigen::MatrixXd& start, const OptimizerConfig& config) {
  const double goal = 1.0 - config.epsilon / 10.0;
  PulseSchedule schedule(t, Eigen::MatrixXd::Zero(start.rows(), kNumChannels));
  auto evaluate = [&](const Eigen::MatrixXd& u) {
    schedule.amplitudes = omega_max * u;
    return fidelity_with_gradient(system, target, schedule);
  };

  Eigen::MatrixXd u = clip_unit(start);
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(u.rows(), u.cols());
  Descent best;
  best.u = u;
  double rate = config.learning_rate;
  double previous = std::numeric_limits<double>::quiet_NaN();
  int since_progress = 0;
  int stalled = 0;
  int iteration = 0;
  while (iteration < config.max_iterations) {
    ++iteration;
    const Eigen::MatrixXd ahead = clip_unit(u + config.momentum * velocity);
    const FidelityGradient fg = evaluate(ahead);
    if (fg.fidelity > best.fidelity) {
      since_progress = fg.fidelity > best.fidelity + 1e-12 ? 0 : since_progress + 1;
      best.fidelity = fg.fidelity;
      best.u = ahead;
    } else {
      ++since_progress;
    }
    if (best.fidelity >= goal) break;
    stalled = std::abs(fg.fidelity - previous) < 1e-12 ? stalled + 1 : 0;
    previous = fg.fidelity;
    if (stalled >= config.stall_iterations) break;
    if (since_progress >= config.plateau_iterations) {
      rate *= 0.5;
      if (rate < config.learning_rate * kMinRateFraction) break;
      u = best.u;
      velocity.setZero();
      since_progress = 0;
      continue;
    }
    // Components pushing an amplitude further into its bound would be clipped
    // away; leave them out of the normalization.
    Eigen::MatrixXd grad = omega_max * fg.gradient;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double x = ahead(i);
      if ((x >= 1.0 && grad(i) > 0.0) || (x <= -1.0 && grad(i) < 0.0)) grad(i) = 0.0;
    }
    const double norm = grad.norm();
    if (!(norm > 0.0)) break;  // flat objective, e.g. omega_max = 0
    const Eigen::MatrixXd next = clip_unit(ahead + (rate / norm) * grad);
    velocity = next - u;
    u = next;
  }
  best.iterations = iteration;
  return best;
}

template <class Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < end; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void require_target(const Mat4& target) {
  if (!target.allFinite() || unitarity_error(target) >= 1e-10) {
    throw Error(ErrorCode::kNotUnitary, "optimize_pulse: target is not unitary");
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  if (segments < 1) throw Error(ErrorCode::kInvalidArgument, "optimizer: segments must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::kInvalidArgument, "optimizer: restarts must be >= 1");
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: max_iterations must be >= 1");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: epsilon must lie in (0, 1)");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: momentum must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: learning_rate must be positive");
  }
}

std::uint64_t OptimResult::best_seed() const {
  return best_restart >= 0 ? per_restart[best_restart].seed : 0;
}

TargetGate TargetGate::named(NamedGate gate) { return TargetGate{gate_matrix(gate), gate}; }

std::uint64_t restart_seed(std::uint64_t seed, int index) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index));
}

FidelityGradient fidelity_with_gradient(const ControlSystem& system, const Mat4& target,
                                        const PulseSchedule& schedule) {
  const int segments = schedule.segments();
  const double dt = schedule.segment_duration();
  std::vector<HermitianSpectrum<4>> spectra;
  spectra.reserve(segments);
  std::vector<Mat4> steps(segments);
  for (int m = 0; m < segments; ++m) {
    spectra.emplace_back(segment_hamiltonian(system, schedule, m));
    steps[m] = spectra[m].exp(dt);
  }
  // before[m] = U_{m-1} ... U_0; the suffix product is accumulated backwards.
  std::vector<Mat4> before(segments);
  Mat4 acc = Mat4::Identity();
  for (int m = 0; m < segments; ++m) {
    before[m] = acc;
    acc = steps[m] * acc;
  }
  const Mat4 target_dag = target.adjoint();
  const Complex overlap = (target_dag * acc).trace();

  FidelityGradient out;
  out.fidelity = (std::norm(overlap) + 4.0) / 20.0;
  out.gradient.resize(segments, kNumChannels);
  // d Tr(T^dag U) = Tr(T^dag after dU_m before) = Tr(before T^dag after dU_m).
  Mat4 after = Mat4::Identity();
  for (int m = segments - 1; m >= 0; --m) {
    const Mat4& v = spectra[m].eigenvectors();
    const Mat4 kernel = spectra[m].derivative_kernel(dt);
    const Mat4 a = v.adjoint() * (before[m] * target_dag * after) * v;
    const Mat4 weighted = a.transpose().cwiseProduct(kernel);
    for (int c = 0; c < kNumChannels; ++c) {
      const Mat4 g = v.adjoint() * system.drives[c] * v;
      const Complex d_overlap = weighted.cwiseProduct(g).sum();
      out.gradient(m, c) = (std::conj(overlap) * d_overlap).real() / 10.0;
    }
    after = after * steps[m];
  }
  return out;
}

OptimResult optimize_pulse(const DeviceSpec& spec, const Mat4& target, double t,
                           const OptimizerConfig& config,
                           const std::vector<Eigen::MatrixXd>& warm_starts) {
  spec.validate();
  config.validate();
  require_target(target);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::kInvalidArgument, "optimize_pulse: t must be positive");
  }
  const ControlSystem system = make_control_system(spec);
  const int restarts = config.restarts;
  const int m = config.segments;

  std::vector<Eigen::MatrixXd> starts(restarts);
  std::vector<RestartRecord> records(restarts);
  for (int i = 0; i < restarts; ++i) {
    records[i].seed = restart_seed(config.seed, i);
    if (i < static_cast<int>(warm_starts.size())) {
      const Eigen::MatrixXd& w = warm_starts[i];
      if (w.rows() != m || w.cols() != kNumChannels) {
        throw Error(ErrorCode::kInvalidArgument, "optimize_pulse: warm start has wrong shape");
      }
      starts[i] = spec.omega_max > 0.0 ? Eigen::MatrixXd(w / spec.omega_max)
                                       : Eigen::MatrixXd::Zero(m, kNumChannels);
      records[i].warm_start = true;
    } else {
      std::mt19937_64 rng(records[i].seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      starts[i].resize(m, kNumChannels);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < kNumChannels; ++c) starts[i](r, c) = uni(rng);
      }
    }
  }

  std::vector<Descent> results(restarts);
  const double goal = 1.0 - config.epsilon;
  const int wave = config.wave_size > 0 ? config.wave_size : restarts;
  int executed = 0;
  for (int begin = 0; begin < restarts; begin += wave) {
    const int end = std::min(restarts, begin + wave);
    parallel_for(begin, end, config.threads, [&](int i) {
      results[i] = run_descent(system, target, t, spec.omega_max, starts[i], config);
    });
    executed = end;
    if (config.early_stop) {
      bool any = false;
      for (int i = begin; i < end; ++i) any = any || results[i].fidelity >= goal;
      if (any) break;
    }
  }

  OptimResult out;
  for (int i = 0; i < executed; ++i) {
    records[i].fidelity = results[i].fidelity;
    records[i].iterations = results[i].iterations;
    out.per_restart.push_back(records[i]);
    if (results[i].fidelity > out.best_fidelity || out.best_restart < 0) {
      out.best_fidelity = results[i].fidelity;
      out.best_restart = i;
    }
  }
  out.best_schedule = PulseSchedule(t, spec.omega_max * results[out.best_restart].u);
  out.converged = out.best_fidelity >= goal;
  return out;
}

SpeedLimitResult find_speed_limit(const DeviceSpec& spec, const TargetGate& target,
                                  const OptimizerConfig& config,
                                  std::optional<std::pair<double, double>> t_bracket) {
  SpeedLimitResult out;
  out.t_min_ns = t_min(kak_decompose(target.unitary).content, spec, target.tag);
  const double tmin = out.t_min_ns;
  if (!(tmin > 1e-9)) {
    throw Error(ErrorCode::kInvalidArgument, "find_speed_limit: target is a local gate");
  }
  OptimizerConfig probe_config = config;
  probe_config.early_stop = true;

  std::vector<std::pair<double, Eigen::MatrixXd>> solutions;
  auto probe = [&](double t) {
    std::vector<Eigen::MatrixXd> warm;
    if (!solutions.empty()) {
      auto nearest = std::min_element(solutions.begin(), solutions.end(), [&](auto& a, auto& b) {
        return std::abs(a.first - t) < std::abs(b.first - t);
      });
      warm.push_back(nearest->second);
    }
    OptimResult r = optimize_pulse(spec, target.unitary, t, probe_config, warm);
    out.probes.push_back({t, r.best_fidelity, r.converged});
    if (r.converged) solutions.emplace_back(t, r.best_schedule.amplitudes);
    return r;
  };

  double lo = t_bracket ? t_bracket->first : 0.75 * tmin;
  double hi = t_bracket ? t_bracket->second : 1.5 * tmin;
  if (!(lo > 0.0) || !(hi > lo)) {
    throw Error(ErrorCode::kInvalidArgument, "find_speed_limit: bracket must satisfy 0 < lo < hi");
  }
  const double ceiling = 4.0 * tmin;
  bool lo_failed = false;
  OptimResult best = probe(hi);
  while (!best.converged) {
    if (hi >= ceiling * (1 - 1e-12)) {
      throw Error(ErrorCode::kBracketNotFound,
                  "find_speed_limit: no converged schedule up to 4 T_min");
    }
    lo = hi;
    lo_failed = true;
    hi = std::min(ceiling, 1.25 * hi);
    best = probe(hi);
  }
  while (!lo_failed) {
    OptimResult r = probe(lo);
    if (!r.converged) break;
    hi = lo;
    best = std::move(r);
    lo *= 0.75;
    if (lo < 0.05 * tmin) {
      lo = 0.0;
      break;
    }
  }
  while (hi - lo >= 0.01 * tmin) {
    const double mid = 0.5 * (lo + hi);
    OptimResult r = probe(mid);
    if (r.converged) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  out.t_f_ns = hi;
  out.ratio = hi / tmin;
  out.at_t_f = std::move(best);
  return out;
}

std::vector<SweepPoint> sweep_fidelity_vs_time(const DeviceSpec& spec, const Mat4& target,
                                               const OptimizerConfig& config,
                                               const std::vector<double>& t_grid) {
  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "sweep: t_grid must be positive and ascending");
    }
  }
  // Longest durations first: each point is warm-started from the best schedule
  // one step longer, which keeps the curve from dropping into poor local optima.
  std::vector<SweepPoint> out(t_grid.size());
  for (size_t i = t_grid.size(); i-- > 0;) {
    SweepPoint& point = out[i];
    point.t_ns = t_grid[i];
    std::vector<Eigen::MatrixXd> warm;
    if (i + 1 < t_grid.size() && !out[i + 1].failed) warm.push_back(out[i + 1].best_schedule.amplitudes);
    const auto start = std::chrono::steady_clock::now();
    try {
      const OptimResult r = optimize_pulse(spec, target, point.t_ns, config, warm);
      point.best_fidelity = r.best_fidelity;
      point.converged = r.converged;
      point.best_seed = r.best_seed();
      point.best_schedule = r.best_schedule;
    } catch (const Error& e) {
      point.failed = true;
      point.message = e.what();
    }
    point.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

RobustnessResult robustness_study(const DeviceSpec& spec, const PulseSchedule& schedule,
                                  const Mat4& target, double sigma_fraction, int trials,
                                  std::uint64_t seed) {
  if (!(sigma_fraction >= 0.0) || trials < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "robustness_study: need sigma_fraction >= 0 and trials >= 1");
  }
  const ControlSystem system = make_control_system(spec);
  auto infidelity = [&](const PulseSchedule& s) {
    return 1.0 - avg_gate_fidelity_closed_form(target, propagate(system, s).u);
  };
  RobustnessResult out;
  out.noiseless_infidelity = infidelity(schedule);
  const double sigma = sigma_fraction * spec.omega_max;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  for (int k = 0; k < trials; ++k) {
    if (sigma == 0.0) {
      out.samples.push_back(out.noiseless_infidelity);
      continue;
    }
    PulseSchedule noisy = schedule;
    for (int m = 0; m < noisy.segments(); ++m) {
      for (int c = 0; c < kNumChannels; ++c) noisy.amplitudes(m, c) += noise(rng);
    }
    out.samples.push_back(infidelity(noisy));
  }
  double sum = 0.0;
  for (double s : out.samples) sum += s;
  out.mean_infidelity = sum / trials;
  double var = 0.0;
  for (double s : out.samples) var += (s - out.mean_infidelity) * (s - out.mean_infidelity);
  out.std_infidelity = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
  return out;
}

}  // namespace qsl
