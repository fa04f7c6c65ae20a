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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qsl/matcore.hpp"
#include "test_support.hpp"

namespace qsl {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Kron, ZZIsDiagonal) {
  const Mat4 zz = kron(pauli::z(), pauli::z());
  Mat4 expected = Mat4::Zero();
  expected.diagonal() << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LT((zz - expected).norm(), 1e-15);
}

TEST(Kron, IdentityFactors) {
  EXPECT_LT((kron(pauli::identity(), pauli::identity()) - Mat4::Identity()).norm(), 1e-15);
}

TEST(Kron, XZBlockStructure) {
  const Mat4 xz = kron(pauli::x(), pauli::z());
  EXPECT_LT((xz.block<2, 2>(0, 0)).norm(), 1e-15);
  EXPECT_LT((xz.block<2, 2>(2, 2)).norm(), 1e-15);
  EXPECT_LT((xz.block<2, 2>(0, 2) - pauli::z()).norm(), 1e-15);
  EXPECT_LT((xz.block<2, 2>(2, 0) - pauli::z()).norm(), 1e-15);
}

TEST(Kron, DynamicMatchesFixed) {
  std::mt19937_64 rng(3);
  const CMat a = random_unitary(2, rng);
  const CMat b = random_unitary(2, rng);
  const Mat2 fa = a;
  const Mat2 fb = b;
  EXPECT_LT((kron(a, b) - CMat(kron(fa, fb))).norm(), 1e-15);
  EXPECT_EQ(kron(CMat(CMat::Identity(3, 3)), CMat(CMat::Identity(3, 3))).rows(), 9);
}

TEST(ExpmHermitian, PauliXQuarterTurn) {
  const CMat u = expm_hermitian(CMat(pauli::x()), kPi / 2);
  EXPECT_LT((u - (-kI) * CMat(pauli::x())).norm(), 1e-14);
}

TEST(ExpmHermitian, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(5);
  const CMat h = random_hermitian(4, rng);
  EXPECT_LT((expm_hermitian(h, 0.0) - CMat::Identity(4, 4)).norm(), 1e-14);
}

TEST(ExpmHermitian, IsingDiagonalGivesControlledPhase) {
  const double g = 0.3;
  Mat4 h = Mat4::Zero();
  h.diagonal() << 3 * g, -g, -g, -g;
  const Mat4 u = expm_hermitian(h, kPi / (4 * g));
  Mat4 expected = Mat4::Zero();
  expected.diagonal() << -1.0, 1.0, 1.0, 1.0;
  expected *= std::exp(kI * kPi / 4.0);
  EXPECT_LT((u - expected).norm(), 1e-13);
}

TEST(ExpmHermitian, RejectsNonHermitian) {
  CMat h = CMat::Zero(2, 2);
  h(0, 1) = 1.0;
  try {
    expm_hermitian(h, 1.0);
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonHermitian);
  }
  EXPECT_THROW(expm_hermitian(CMat::Zero(2, 3), 1.0), Error);
}

TEST(ExpmHermitian, MatchesTaylorOracleAndIsUnitary) {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3, 4, 9, 16}) {
    for (int trial = 0; trial < 10; ++trial) {
      const CMat h = random_hermitian(dim, rng);
      const double t = 0.1 + trial * 0.37;
      const CMat u = expm_hermitian(h, t);
      EXPECT_LT(unitarity_error(u), 1e-12);
      EXPECT_LT((u - testing::oracle_unitary(h, t)).norm(), 1e-11) << "dim " << dim;
    }
  }
}

TEST(ExpmHermitian, GroupProperty) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat h = random_hermitian(4, rng);
    const CMat lhs = expm_hermitian(h, 0.7 + 1.3);
    const CMat rhs = expm_hermitian(h, 0.7) * expm_hermitian(h, 1.3);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(ExpmHermitian, FixedSizeMatchesDynamic) {
  std::mt19937_64 rng(17);
  const CMat h = random_hermitian(4, rng);
  const Mat4 hf = h;
  EXPECT_LT((CMat(expm_hermitian(hf, 0.9)) - expm_hermitian(h, 0.9)).norm(), 1e-13);
}

TEST(DexpmHermitian, ZeroDirection) {
  std::mt19937_64 rng(19);
  const CMat h = random_hermitian(4, rng);
  EXPECT_LT(dexpm_hermitian(h, CMat::Zero(4, 4), 1.2).norm(), 1e-15);
}

TEST(DexpmHermitian, CommutingDirection) {
  const CMat z = pauli::z();
  const double t = 0.8;
  const CMat expected = -kI * t * z * expm_hermitian(z, t);
  EXPECT_LT((dexpm_hermitian(z, z, t) - expected).norm(), 1e-14);
}

TEST(DexpmHermitian, DegenerateSpectrum) {
  // Identity generator: every pair of eigenvalues is degenerate.
  const CMat h = CMat::Identity(4, 4) * 0.5;
  std::mt19937_64 rng(23);
  const CMat dh = random_hermitian(4, rng);
  const double t = 1.7;
  const CMat expected = -kI * t * std::exp(-kI * 0.5 * t) * dh;
  EXPECT_LT((dexpm_hermitian(h, dh, t) - expected).norm(), 1e-13);
}

TEST(DexpmHermitian, MatchesCentralDifferences) {
  std::mt19937_64 rng(29);
  const double step = 1e-6;
  for (int dim : {2, 4}) {
    for (int trial = 0; trial < 50; ++trial) {
      const CMat h = random_hermitian(dim, rng);
      const CMat dh = random_hermitian(dim, rng);
      const double t = 0.2 + 0.05 * trial;
      const CMat fd = (testing::oracle_unitary(h + step * dh, t) -
                       testing::oracle_unitary(h - step * dh, t)) /
                      (2 * step);
      const CMat exact = dexpm_hermitian(h, dh, t);
      EXPECT_LT((exact - fd).norm() / exact.norm(), 1e-6);
    }
  }
}

TEST(DexpmHermitian, MatchesBlockExponential) {
  // d/de exp(A + e E) is the upper-right block of exp([[A, E], [0, A]]).
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat h = random_hermitian(4, rng);
    const CMat dh = random_hermitian(4, rng);
    const double t = 1.1;
    CMat block = CMat::Zero(8, 8);
    block.topLeftCorner(4, 4) = -kI * t * h;
    block.bottomRightCorner(4, 4) = -kI * t * h;
    block.topRightCorner(4, 4) = -kI * t * dh;
    const CMat oracle = testing::taylor_expm(block).topRightCorner(4, 4);
    EXPECT_LT((dexpm_hermitian(h, dh, t) - oracle).norm(), 1e-11);
  }
}

TEST(PauliBasis, SingleQubitOrdering) {
  const auto basis = pauli_basis(1, false);
  ASSERT_EQ(basis.size(), 4u);
  EXPECT_LT((basis[3] - CMat(pauli::z())).norm(), 1e-15);
  EXPECT_LT((basis[1] - CMat(pauli::x())).norm(), 1e-15);
}

TEST(PauliBasis, TwoQubitOrthogonality) {
  const auto basis = pauli_basis(2, false);
  ASSERT_EQ(basis.size(), 16u);
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) {
      const Complex tr = (basis[m] * basis[n]).trace();
      EXPECT_NEAR(std::abs(tr - Complex(m == n ? 4.0 : 0.0)), 0.0, 1e-14);
    }
  }
  EXPECT_LT((basis[1] - kron(CMat(pauli::identity()), CMat(pauli::x()))).norm(), 1e-15);
  EXPECT_LT((basis[15] - kron(CMat(pauli::z()), CMat(pauli::z()))).norm(), 1e-15);
}

TEST(PauliBasis, NormalizedIsOrthonormal) {
  const auto basis = pauli_basis(2, true);
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) {
      const Complex tr = (basis[m].adjoint() * basis[n]).trace();
      EXPECT_NEAR(std::abs(tr - Complex(m == n ? 1.0 : 0.0)), 0.0, 1e-14);
    }
  }
  EXPECT_THROW(pauli_basis(3, false), Error);
}

TEST(PauliBasis, FixedSizeListMatches) {
  const auto dynamic = pauli_basis(2, false);
  const auto& fixed = two_qubit_paulis();
  for (int k = 0; k < 16; ++k) EXPECT_LT((dynamic[k] - CMat(fixed[k])).norm(), 1e-15);
}

TEST(RandomUnitary, IsUnitary) {
  std::mt19937_64 rng(37);
  for (int dim : {2, 4, 8}) EXPECT_LT(unitarity_error(random_unitary(dim, rng)), 1e-12);
}

}  // namespace
}  // namespace qsl
