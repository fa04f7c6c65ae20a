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

#include "qsl/gatefid.hpp"

#include <Eigen/LU>

namespace qsl {

namespace {

// Column (16 m + n) holds vec(R) for chi = e_m e_n^T, with vec(R) indexed 16 i + j.
const CMat& chi_to_ptm_map() {
  static const CMat map = [] {
    const auto& p = two_qubit_paulis();
    CMat out(256, 256);
    for (int m = 0; m < 16; ++m) {
      for (int n = 0; n < 16; ++n) {
        for (int j = 0; j < 16; ++j) {
          const Mat4 image = p[m] * p[j] * p[n];
          for (int i = 0; i < 16; ++i) {
            out(16 * i + j, 16 * m + n) = (p[i] * image).trace() / 4.0;
          }
        }
      }
    }
    return out;
  }();
  return map;
}

const Eigen::PartialPivLU<CMat>& chi_to_ptm_lu() {
  static const Eigen::PartialPivLU<CMat> lu(chi_to_ptm_map());
  return lu;
}

// P_i (x) P_j^T as 16 x 16 matrices.
const std::vector<CMat16>& choi_basis() {
  static const std::vector<CMat16> basis = [] {
    const auto& p = two_qubit_paulis();
    std::vector<CMat16> out;
    out.reserve(256);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        const Mat4 pjt = p[j].transpose();
        CMat16 block;
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) block.block<4, 4>(4 * a, 4 * b) = p[i](a, b) * pjt;
        }
        out.push_back(block);
      }
    }
    return out;
  }();
  return basis;
}

}  // namespace

double avg_gate_fidelity(const Mat4& u_target, const Mat4& u_actual) {
  require_unitary(u_target, "avg_gate_fidelity target");
  require_unitary(u_actual, "avg_gate_fidelity actual");
  Complex sum = 0.0;
  for (const Mat4& p : two_qubit_paulis()) {
    const Mat4 uj = 0.5 * p;
    sum += (u_target * uj * u_target.adjoint() * u_actual * uj * u_actual.adjoint()).trace();
  }
  return 0.2 + sum.real() / 20.0;
}

double avg_gate_fidelity_closed_form(const Mat4& u_target, const Mat4& u_actual) {
  return (std::norm((u_target.adjoint() * u_actual).trace()) + 4.0) / 20.0;
}

PTM ptm_of_unitary(const Mat4& u) {
  require_unitary(u, "ptm_of_unitary input");
  const auto& p = two_qubit_paulis();
  PTM out;
  for (int j = 0; j < 16; ++j) {
    const Mat4 image = u * p[j] * u.adjoint();
    for (int i = 0; i < 16; ++i) out.r(i, j) = (p[i] * image).trace().real() / 4.0;
  }
  return out;
}

PTM ptm_of_kraus(const std::vector<Mat4>& kraus) {
  const auto& p = two_qubit_paulis();
  PTM out;
  out.r.setZero();
  for (int j = 0; j < 16; ++j) {
    Mat4 image = Mat4::Zero();
    for (const Mat4& k : kraus) image += k * p[j] * k.adjoint();
    for (int i = 0; i < 16; ++i) out.r(i, j) = (p[i] * image).trace().real() / 4.0;
  }
  return out;
}

PTM ptm_of_chi(const ChiMatrix& chi) {
  if (!chi.chi.allFinite() || hermiticity_error(chi.chi) >= 1e-10) {
    throw Error(ErrorCode::kNonHermitianChi, "ptm_of_chi: chi is not Hermitian");
  }
  CVec v(256);
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) v(16 * m + n) = chi.chi(m, n);
  }
  const CVec r = chi_to_ptm_map() * v;
  PTM out;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) out.r(i, j) = r(16 * i + j).real();
  }
  return out;
}

ChiMatrix chi_of_ptm(const PTM& ptm) {
  CVec r(256);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) r(16 * i + j) = ptm.r(i, j);
  }
  const CVec v = chi_to_ptm_lu().solve(r);
  ChiMatrix out;
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) out.chi(m, n) = v(16 * m + n);
  }
  // Real PTMs map to Hermitian chi; drop the rounding residue.
  out.chi = 0.5 * (out.chi + out.chi.adjoint()).eval();
  return out;
}

double trace_preservation_error(const PTM& ptm) {
  Eigen::Matrix<double, 1, 16> e0 = Eigen::Matrix<double, 1, 16>::Zero();
  e0(0) = 1.0;
  return (ptm.r.row(0) - e0).cwiseAbs().maxCoeff();
}

double avg_fidelity_from_ptm(const PTM& r_actual, const Mat4& u_target) {
  if (!(trace_preservation_error(r_actual) < kTraceTolerance)) {
    throw Error(ErrorCode::kNotTracePreserving,
                "avg_fidelity_from_ptm: channel is not trace preserving");
  }
  const Mat16 target = ptm_of_unitary(u_target).r;
  return ((target.transpose() * r_actual.r).trace() / 4.0 + 1.0) / 5.0;
}

CMat16 choi_of_ptm(const PTM& ptm) {
  const auto& basis = choi_basis();
  CMat16 out = CMat16::Zero();
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      if (ptm.r(i, j) != 0.0) out += (ptm.r(i, j) / 4.0) * basis[16 * i + j];
    }
  }
  return out;
}

PTM ptm_of_choi(const CMat16& choi) {
  const auto& basis = choi_basis();
  PTM out;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      // Both factors are Hermitian, so the overlap is real for Hermitian choi.
      out.r(i, j) = basis[16 * i + j].cwiseProduct(choi.transpose()).sum().real() / 4.0;
    }
  }
  return out;
}

std::vector<Mat4> random_kraus_channel(int n_kraus, std::mt19937_64& rng) {
  if (n_kraus < 1) {
    throw Error(ErrorCode::kInvalidArgument, "random_kraus_channel: need at least one operator");
  }
  const CMat big = random_unitary(4 * n_kraus, rng);
  std::vector<Mat4> out;
  for (int k = 0; k < n_kraus; ++k) out.push_back(big.block(4 * k, 0, 4, 4));
  return out;
}

}  // namespace qsl
