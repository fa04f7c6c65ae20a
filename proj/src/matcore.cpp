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

#include "qsl/matcore.hpp"

#include <cmath>

namespace qsl {

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return out;
}

CMat expm_hermitian(const CMat& h, double t) {
  return HermitianSpectrum<Eigen::Dynamic>(h).exp(t);
}

CMat dexpm_hermitian(const CMat& h, const CMat& dh, double t) {
  require_hermitian(dh, "dexpm_hermitian direction");
  if (dh.rows() != h.rows() || dh.cols() != h.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "dexpm_hermitian: dimension mismatch");
  }
  return HermitianSpectrum<Eigen::Dynamic>(h).dexp(dh, t);
}

namespace pauli {

Mat2 identity() { return Mat2::Identity(); }

Mat2 x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Mat2 y() {
  Mat2 m;
  m << 0.0, -kI, kI, 0.0;
  return m;
}

Mat2 z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

std::vector<CMat> pauli_basis(int n_qubits, bool normalized) {
  if (n_qubits != 1 && n_qubits != 2) {
    throw Error(ErrorCode::kInvalidArgument, "pauli_basis: n_qubits must be 1 or 2");
  }
  const std::vector<CMat> single = {pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
  std::vector<CMat> out;
  if (n_qubits == 1) {
    out = single;
  } else {
    for (const auto& a : single) {
      for (const auto& b : single) out.push_back(kron(a, b));
    }
  }
  if (normalized) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.front().rows()));
    for (auto& p : out) p *= scale;
  }
  return out;
}

const std::vector<Mat4>& two_qubit_paulis() {
  static const std::vector<Mat4> paulis = [] {
    const Mat2 single[4] = {pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
    std::vector<Mat4> out;
    out.reserve(16);
    for (const auto& a : single) {
      for (const auto& b : single) out.push_back(kron(a, b));
    }
    return out;
  }();
  return paulis;
}

CMat random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat z(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) z(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ();
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

CMat random_hermitian(int dim, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  CMat a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(normal(rng), normal(rng));
  }
  return 0.5 * (a + a.adjoint());
}

double phase_insensitive_distance(const CMat& a, const CMat& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).norm();
}

}  // namespace qsl
