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

// Average gate fidelity and conversions between channel representations.
//
// Pauli ordering follows two_qubit_paulis(): P_{4a+b} = sigma_a (x) sigma_b
// with sigma = (I, X, Y, Z). PTM entries are R_ij = Tr[P_i E(P_j)] / 4, so the
// identity channel maps to the 16 x 16 identity. The chi matrix is defined by
// E(rho) = sum_mn chi_mn P_m rho P_n with unnormalized Paulis.

#include <random>
#include <string_view>
#include <vector>

#include "qsl/matcore.hpp"

namespace qsl {

using Mat16 = Eigen::Matrix<double, 16, 16>;
using CMat16 = Eigen::Matrix<Complex, 16, 16>;

inline constexpr std::string_view kPtmNormalization = "quarter-trace";

struct PTM {
  Mat16 r = Mat16::Identity();
};

struct ChiMatrix {
  CMat16 chi = CMat16::Zero();
};

// 1/5 + (1/20) sum_j Tr(U U_j U^dagger V U_j V^dagger) over the Paulis
// scaled by 1/2. Throws kNotUnitary.
double avg_gate_fidelity(const Mat4& u_target, const Mat4& u_actual);

// (|Tr(U^dagger V)|^2 + 4) / 20, no input checks.
double avg_gate_fidelity_closed_form(const Mat4& u_target, const Mat4& u_actual);

PTM ptm_of_unitary(const Mat4& u);
PTM ptm_of_kraus(const std::vector<Mat4>& kraus);

// Throws kNonHermitianChi.
PTM ptm_of_chi(const ChiMatrix& chi);
ChiMatrix chi_of_ptm(const PTM& ptm);

// Tolerance on the first PTM row used by the trace-preservation checks.
inline constexpr double kTraceTolerance = 1e-6;
double trace_preservation_error(const PTM& ptm);

// (Tr(R_target^T R_actual) / 4 + 1) / 5. Throws kNotTracePreserving.
double avg_fidelity_from_ptm(const PTM& r_actual, const Mat4& u_target);

// Choi matrix J = sum_ij R_ij P_i (x) P_j^T / 4 (trace 4, PSD iff CP) and back.
CMat16 choi_of_ptm(const PTM& ptm);
PTM ptm_of_choi(const CMat16& choi);

// Kraus operators of a random CPTP map: blocks of a Haar-random isometry from
// C^4 into C^4 (x) C^n_kraus.
std::vector<Mat4> random_kraus_channel(int n_kraus, std::mt19937_64& rng);

}  // namespace qsl
