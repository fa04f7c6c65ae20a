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

// Cartan (KAK) decomposition of two-qubit unitaries,
//   u = e^{i phi} (U1 (x) U2) exp(-i sum_g lambda_g sigma^g (x) sigma^g) (V1 (x) V2),
// and the interaction-limited gate time that follows from it.

#include <array>
#include <optional>

#include "qsl/gates.hpp"
#include "qsl/matcore.hpp"
#include "qsl/model.hpp"

namespace qsl {

// Cartan coefficients in radians. kak_decompose returns the Weyl-chamber
// representative pi/4 >= lx >= ly >= |lz|.
struct InteractionContent {
  std::array<double, 3> lambda{0.0, 0.0, 0.0};

  double sum_abs() const;
  bool is_canonical(double tol = 1e-12) const;
};

struct LocalGates {
  Mat2 u1 = Mat2::Identity();
  Mat2 u2 = Mat2::Identity();
  Mat2 v1 = Mat2::Identity();
  Mat2 v2 = Mat2::Identity();
  double global_phase = 0.0;  // u = e^{i global_phase} reconstruct(content, locals)
};

struct KakDecomposition {
  InteractionContent content;
  LocalGates locals;
};

// Columns are the magic (Bell-type) basis used to diagonalize the core.
const Mat4& magic_basis();

// exp(-i (lx XX + ly YY + lz ZZ)).
Mat4 interaction_core(const std::array<double, 3>& lambda);

// Maps any Cartan triple to its Weyl-chamber representative.
InteractionContent canonicalize(const std::array<double, 3>& lambda);

// Throws kNotUnitary when u is not unitary to 1e-10.
KakDecomposition kak_decompose(const Mat4& u);

// (U1 (x) U2) core (V1 (x) V2), without the global phase.
Mat4 reconstruct(const InteractionContent& content, const LocalGates& locals);

// Analytical speed limit in ns. Ising uses (|lx| + |ly| + |lz|) / g. XY and
// XXZ only expose tabulated constants for CNOT, CZ and SWAP and throw
// kUnsupportedGateForInteraction otherwise.
double t_min(const InteractionContent& content, const DeviceSpec& spec,
             std::optional<NamedGate> gate_tag = std::nullopt);

}  // namespace qsl
