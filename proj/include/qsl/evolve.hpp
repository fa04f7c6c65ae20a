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

// Propagators of the piecewise-constant rotating-frame model and their exact
// derivatives with respect to every segment amplitude.

#include <vector>

#include "qsl/matcore.hpp"
#include "qsl/model.hpp"

namespace qsl {

struct PropagatorResult {
  Mat4 u = Mat4::Identity();
  // dU / d amplitude(m, c) at index m * kNumChannels + c; empty unless requested.
  std::vector<Mat4> grads;
};

// U = U_{M-1} ... U_1 U_0 with U_m = exp(-i H_m T / M). Throws
// kScheduleViolation when validate_schedule rejects the schedule.
PropagatorResult propagate(const DeviceSpec& spec, const PulseSchedule& schedule);
PropagatorResult propagate_with_gradient(const DeviceSpec& spec, const PulseSchedule& schedule);

// Same products without the amplitude bound check (structure is still
// checked). Used by the optimizer's inner loop and by noise studies, where
// perturbed amplitudes may exceed the bound on purpose.
PropagatorResult propagate(const ControlSystem& system, const PulseSchedule& schedule);
PropagatorResult propagate_with_gradient(const ControlSystem& system,
                                         const PulseSchedule& schedule);

// exp(-i H0 t); throws kInvalidArgument for t < 0.
Mat4 dark_evolution(const DeviceSpec& spec, double t);

}  // namespace qsl
