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

#include <optional>
#include <string>

#include "qsl/matcore.hpp"

namespace qsl {

enum class NamedGate { kCNOT, kCZ, kSWAP, kSqrtSWAP, kISWAP };

std::string to_string(NamedGate gate);
std::optional<NamedGate> parse_named_gate(const std::string& name);

Mat4 gate_matrix(NamedGate gate);

// Single-qubit rotations exp(-i theta sigma / 2).
Mat2 rx(double theta);
Mat2 ry(double theta);
Mat2 rz(double theta);

}  // namespace qsl
