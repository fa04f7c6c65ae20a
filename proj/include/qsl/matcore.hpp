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

// Dense complex linear algebra for the small matrices used throughout the
// library (dimensions 2, 3, 4, 9, 16).
//
// Conventions: sigma_z = diag(+1, -1) in the basis |0>, |1>. Two-qubit states
// are ordered |00>, |01>, |10>, |11> with qubit 1 as the left tensor factor.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsl/errors.hpp"

namespace qsl {

using Complex = std::complex<double>;
inline constexpr Complex kI{0.0, 1.0};

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

template <int N>
using CMatN = Eigen::Matrix<Complex, N, N>;

// Entries of A - A^dagger below this are treated as rounding noise.
inline constexpr double kHermitianTolerance = 1e-12;

// Eigenvalue gaps (rad/ns) below this use the degenerate limit of the
// exponential's divided difference.
inline constexpr double kDegeneracyThreshold = 1e-9;

template <class Derived>
double hermiticity_error(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <class Derived>
double unitarity_error(const Eigen::MatrixBase<Derived>& u) {
  using Plain = typename Derived::PlainObject;
  const Plain id = Plain::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff();
}

template <class Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kNonHermitian, std::string(what) + ": matrix is not square");
  }
  if (hermiticity_error(a) >= kHermitianTolerance) {
    throw Error(ErrorCode::kNonHermitian, std::string(what) + ": matrix is not Hermitian");
  }
}

template <class Derived>
void require_unitary(const Eigen::MatrixBase<Derived>& u, const char* what) {
  if (u.rows() != u.cols() || !u.allFinite() || unitarity_error(u) >= 1e-10) {
    throw Error(ErrorCode::kNotUnitary, std::string(what) + " is not unitary");
  }
}

// Eigendecomposition h = V diag(theta) V^dagger of a Hermitian matrix, reused
// for both exp(-i h t) and its directional derivatives.
template <int N>
class HermitianSpectrum {
 public:
  using Matrix = CMatN<N>;
  using RealVector = Eigen::Matrix<double, N, 1>;

  explicit HermitianSpectrum(const Matrix& h) {
    require_hermitian(h, "HermitianSpectrum");
    // Symmetrize so the solver sees an exactly Hermitian input.
    const Matrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hs);
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }

  const RealVector& eigenvalues() const { return values_; }
  const Matrix& eigenvectors() const { return vectors_; }
  Eigen::Index dim() const { return values_.size(); }

  // exp(-i h t).
  Matrix exp(double t) const {
    Matrix scaled = vectors_;
    for (Eigen::Index a = 0; a < dim(); ++a) {
      scaled.col(a) *= std::exp(-kI * (values_(a) * t));
    }
    return scaled * vectors_.adjoint();
  }

  // Divided-difference kernel phi_ab of the exponential map, in the eigenbasis.
  Matrix derivative_kernel(double t) const {
    const Eigen::Index n = dim();
    Matrix phi(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        const double gap = values_(a) - values_(b);
        const double mean = 0.5 * (values_(a) + values_(b));
        const Complex carrier = std::exp(-kI * (mean * t));
        if (std::abs(gap) < kDegeneracyThreshold) {
          phi(a, b) = -kI * t * carrier;
        } else {
          // (e^{-i a t} - e^{-i b t}) / (a - b), written without cancellation.
          phi(a, b) = -2.0 * kI * carrier * (std::sin(0.5 * gap * t) / gap);
        }
      }
    }
    return phi;
  }

  // d/de exp(-i (h + e dh) t) at e = 0 (Daleckii-Krein).
  Matrix dexp(const Matrix& dh, double t) const { return dexp(dh, derivative_kernel(t)); }

  Matrix dexp(const Matrix& dh, const Matrix& kernel) const {
    const Matrix g = vectors_.adjoint() * dh * vectors_;
    return vectors_ * g.cwiseProduct(kernel) * vectors_.adjoint();
  }

 private:
  RealVector values_;
  Matrix vectors_;
};

CMat kron(const CMat& a, const CMat& b);
Mat4 kron(const Mat2& a, const Mat2& b);

// exp(-i h t) for Hermitian h; throws kNonHermitian.
CMat expm_hermitian(const CMat& h, double t);

// Directional derivative of exp(-i h t) along dh; throws kNonHermitian.
CMat dexpm_hermitian(const CMat& h, const CMat& dh, double t);

template <int N>
CMatN<N> expm_hermitian(const CMatN<N>& h, double t) {
  return HermitianSpectrum<N>(h).exp(t);
}

namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
}  // namespace pauli

// {I, X, Y, Z} per qubit, left factor major: P0 = I(x)I, P1 = I(x)X, ...,
// P15 = Z(x)Z. The normalized variant divides by sqrt(d).
std::vector<CMat> pauli_basis(int n_qubits, bool normalized);

// The 16 two-qubit Paulis (unnormalized) as fixed-size matrices.
const std::vector<Mat4>& two_qubit_paulis();

// Haar-random unitary via QR of a complex Ginibre matrix with phase fix.
CMat random_unitary(int dim, std::mt19937_64& rng);

// Random Hermitian matrix with i.i.d. Gaussian entries of the given scale.
CMat random_hermitian(int dim, std::mt19937_64& rng, double scale = 1.0);

// Frobenius distance between a and b after removing the best global phase.
double phase_insensitive_distance(const CMat& a, const CMat& b);

}  // namespace qsl
