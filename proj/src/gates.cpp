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

#include "qsl/gates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace qsl {

std::string to_string(NamedGate gate) {
  switch (gate) {
    case NamedGate::kCNOT: return "CNOT";
    case NamedGate::kCZ: return "CZ";
    case NamedGate::kSWAP: return "SWAP";
    case NamedGate::kSqrtSWAP: return "SQRT_SWAP";
    case NamedGate::kISWAP: return "ISWAP";
  }
  return "UNKNOWN";
}

std::optional<NamedGate> parse_named_gate(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "CNOT" || upper == "CX") return NamedGate::kCNOT;
  if (upper == "CZ") return NamedGate::kCZ;
  if (upper == "SWAP") return NamedGate::kSWAP;
  if (upper == "SQRT_SWAP" || upper == "SQRTSWAP") return NamedGate::kSqrtSWAP;
  if (upper == "ISWAP") return NamedGate::kISWAP;
  return std::nullopt;
}

Mat4 gate_matrix(NamedGate gate) {
  Mat4 u = Mat4::Zero();
  switch (gate) {
    case NamedGate::kCNOT:
      u(0, 0) = u(1, 1) = 1.0;
      u(2, 3) = u(3, 2) = 1.0;
      break;
    case NamedGate::kCZ:
      u.diagonal() << 1.0, 1.0, 1.0, -1.0;
      break;
    case NamedGate::kSWAP:
      u(0, 0) = u(3, 3) = 1.0;
      u(1, 2) = u(2, 1) = 1.0;
      break;
    case NamedGate::kSqrtSWAP:
      u(0, 0) = u(3, 3) = 1.0;
      u(1, 1) = u(2, 2) = Complex(0.5, 0.5);
      u(1, 2) = u(2, 1) = Complex(0.5, -0.5);
      break;
    case NamedGate::kISWAP:
      u(0, 0) = u(3, 3) = 1.0;
      u(1, 2) = u(2, 1) = kI;
      break;
  }
  return u;
}

Mat2 rx(double theta) {
  return std::cos(theta / 2) * pauli::identity() - kI * std::sin(theta / 2) * pauli::x();
}

Mat2 ry(double theta) {
  return std::cos(theta / 2) * pauli::identity() - kI * std::sin(theta / 2) * pauli::y();
}

Mat2 rz(double theta) {
  return std::cos(theta / 2) * pauli::identity() - kI * std::sin(theta / 2) * pauli::z();
}

}  // namespace qsl
