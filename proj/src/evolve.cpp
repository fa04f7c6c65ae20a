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

#include "qsl/evolve.hpp"

namespace qsl {

namespace {

void require_structure(const PulseSchedule& schedule) {
  if (schedule.num_segments < 1 || schedule.amplitudes.rows() != schedule.num_segments ||
      schedule.amplitudes.cols() != kNumChannels) {
    throw Error(ErrorCode::kInvalidArgument, "propagate: schedule must be M x 4 with M >= 1");
  }
  if (!(schedule.t_ns >= 0.0) || !schedule.amplitudes.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "propagate: non-finite or negative schedule data");
  }
}

void require_valid(const DeviceSpec& spec, const PulseSchedule& schedule) {
  const ScheduleReport report = validate_schedule(spec, schedule);
  if (!report.ok()) throw Error(ErrorCode::kScheduleViolation, report.summary());
}

}  // namespace

PropagatorResult propagate(const ControlSystem& system, const PulseSchedule& schedule) {
  require_structure(schedule);
  const double dt = schedule.segment_duration();
  PropagatorResult out;
  for (int m = 0; m < schedule.segments(); ++m) {
    out.u = HermitianSpectrum<4>(segment_hamiltonian(system, schedule, m)).exp(dt) * out.u;
  }
  return out;
}

PropagatorResult propagate_with_gradient(const ControlSystem& system,
                                         const PulseSchedule& schedule) {
  require_structure(schedule);
  const int segments = schedule.segments();
  const double dt = schedule.segment_duration();

  std::vector<Mat4> steps(segments);
  std::vector<Mat4> local(static_cast<size_t>(segments) * kNumChannels);
  for (int m = 0; m < segments; ++m) {
    const HermitianSpectrum<4> spectrum(segment_hamiltonian(system, schedule, m));
    steps[m] = spectrum.exp(dt);
    const Mat4 kernel = spectrum.derivative_kernel(dt);
    for (int c = 0; c < kNumChannels; ++c) {
      local[m * kNumChannels + c] = spectrum.dexp(system.drives[c], kernel);
    }
  }

  // before[m] = U_{m-1} ... U_0, after[m] = U_{M-1} ... U_{m+1}.
  std::vector<Mat4> before(segments), after(segments);
  Mat4 acc = Mat4::Identity();
  for (int m = 0; m < segments; ++m) {
    before[m] = acc;
    acc = steps[m] * acc;
  }
  PropagatorResult out;
  out.u = acc;
  acc.setIdentity();
  for (int m = segments - 1; m >= 0; --m) {
    after[m] = acc;
    acc = acc * steps[m];
  }

  out.grads.resize(local.size());
  for (int m = 0; m < segments; ++m) {
    for (int c = 0; c < kNumChannels; ++c) {
      const size_t k = m * kNumChannels + c;
      out.grads[k] = after[m] * local[k] * before[m];
    }
  }
  return out;
}

PropagatorResult propagate(const DeviceSpec& spec, const PulseSchedule& schedule) {
  require_valid(spec, schedule);
  return propagate(make_control_system(spec), schedule);
}

PropagatorResult propagate_with_gradient(const DeviceSpec& spec, const PulseSchedule& schedule) {
  require_valid(spec, schedule);
  return propagate_with_gradient(make_control_system(spec), schedule);
}

Mat4 dark_evolution(const DeviceSpec& spec, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "dark_evolution: t must be >= 0");
  return HermitianSpectrum<4>(static_hamiltonian(spec)).exp(t);
}

}  // namespace qsl
