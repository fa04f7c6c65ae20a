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

#include "qsl/kak.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace qsl {

namespace {

constexpr double kPi = std::numbers::pi;

// Magic-basis eigenphases of the core for a Cartan triple; the core is
// M diag(e^{i theta}) M^dagger.
std::array<double, 4> core_phases(const std::array<double, 3>& l) {
  return {-l[0] + l[1] - l[2], -l[0] - l[1] + l[2], l[0] + l[1] + l[2], l[0] - l[1] - l[2]};
}

// Real orthogonal O with O^T m O diagonal, for a complex symmetric unitary m.
// Re(m) and Im(m) commute; a generic real combination separates their joint
// eigenspaces.
Eigen::Matrix4d diagonalize_symmetric_unitary(const Mat4& m) {
  const Eigen::Matrix4d re = m.real();
  const Eigen::Matrix4d im = m.imag();
  Eigen::Matrix4d best;
  double best_offdiag = 1e300;
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double angle = 0.4142135623730951 + 0.7853981633974483 * attempt;
    const Eigen::Matrix4d mix = std::cos(angle) * re + std::sin(angle) * im;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(0.5 * (mix + mix.transpose()));
    const Eigen::Matrix4d o = solver.eigenvectors();
    Mat4 d = o.transpose().cast<Complex>() * m * o.cast<Complex>();
    d.diagonal().setZero();
    const double offdiag = d.cwiseAbs().maxCoeff();
    if (offdiag < best_offdiag) {
      best_offdiag = offdiag;
      best = o;
    }
    if (offdiag < 1e-11) break;
  }
  return best;
}

// Splits k = a (x) b (up to a scalar) into SU(2) factors; returns the scalar's
// phase so that k = e^{i phase} a (x) b.
double split_kronecker(const Mat4& k, Mat2& a, Mat2& b) {
  // Realignment: rows index (i1, j1) of a, columns (i2, j2) of b.
  Mat4 realigned;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int j1 = 0; j1 < 2; ++j1) {
      for (int i2 = 0; i2 < 2; ++i2) {
        for (int j2 = 0; j2 < 2; ++j2) {
          realigned(2 * i1 + j1, 2 * i2 + j2) = k(2 * i1 + i2, 2 * j1 + j2);
        }
      }
    }
  }
  Eigen::JacobiSVD<Mat4> svd(realigned, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector4cd av = svd.matrixU().col(0);
  const Eigen::Vector4cd bv = svd.matrixV().col(0).conjugate();
  a << av(0), av(1), av(2), av(3);
  b << bv(0), bv(1), bv(2), bv(3);
  a *= 1.0 / std::sqrt(a.determinant());
  b *= 1.0 / std::sqrt(b.determinant());
  const Complex overlap = (kron(a, b).adjoint() * k).trace() / 4.0;
  return std::arg(overlap);
}

}  // namespace

double InteractionContent::sum_abs() const {
  return std::abs(lambda[0]) + std::abs(lambda[1]) + std::abs(lambda[2]);
}

bool InteractionContent::is_canonical(double tol) const {
  const auto& l = lambda;
  return l[0] <= kPi / 4 + tol && l[0] >= l[1] - tol && l[1] >= std::abs(l[2]) - tol &&
         l[1] >= -tol;
}

const Mat4& magic_basis() {
  static const Mat4 m = [] {
    Mat4 out;
    const double s = 1.0 / std::sqrt(2.0);
    out << 1.0, 0.0, 0.0, kI, 0.0, kI, 1.0, 0.0, 0.0, kI, -1.0, 0.0, 1.0, 0.0, 0.0, -kI;
    return Mat4(s * out);
  }();
  return m;
}

Mat4 interaction_core(const std::array<double, 3>& lambda) {
  const auto theta = core_phases(lambda);
  Eigen::Vector4cd phases;
  for (int k = 0; k < 4; ++k) phases(k) = std::exp(kI * theta[k]);
  const Mat4& m = magic_basis();
  return m * phases.asDiagonal() * m.adjoint();
}

InteractionContent canonicalize(const std::array<double, 3>& lambda) {
  std::array<double, 3> l{};
  int negatives = 0;
  for (int g = 0; g < 3; ++g) {
    // Shifts by pi/2 multiply the core by a local Pauli product.
    double v = lambda[g] - (kPi / 2) * std::round(lambda[g] / (kPi / 2));
    if (v < 0.0) ++negatives;
    l[g] = std::abs(v);
  }
  // Local Clifford conjugations permute the triple freely.
  std::sort(l.begin(), l.end(), std::greater<>());
  // Sign flips come in pairs; a leftover flip lands on the smallest entry.
  if (negatives % 2 == 1) l[2] = -l[2];
  if (std::abs(l[0] - kPi / 4) < 1e-12 && l[2] < 0.0) l[2] = -l[2];
  if (l[2] == 0.0) l[2] = 0.0;  // drop negative zero
  return InteractionContent{l};
}

KakDecomposition kak_decompose(const Mat4& u) {
  if (!u.allFinite() || unitarity_error(u) >= 1e-10) {
    throw Error(ErrorCode::kNotUnitary, "kak_decompose: input is not unitary");
  }
  const Mat4& m = magic_basis();
  const Complex root = std::pow(u.determinant(), 0.25);
  const Mat4 special = u / root;
  const Mat4 um = m.adjoint() * special * m;
  const Mat4 sym = um.transpose() * um;

  Eigen::Matrix4d o = diagonalize_symmetric_unitary(sym);
  if (o.determinant() < 0.0) o.col(0) *= -1.0;
  const Mat4 oc = o.cast<Complex>();
  const Mat4 diag = oc.transpose() * sym * oc;

  std::array<double, 4> theta{};
  for (int k = 0; k < 4; ++k) theta[k] = 0.5 * std::arg(diag(k, k));
  auto right_factor = [&]() {
    Eigen::Vector4cd inv;
    for (int k = 0; k < 4; ++k) inv(k) = std::exp(-kI * theta[k]);
    return Mat4(um * oc * inv.asDiagonal());
  };
  Mat4 k1 = right_factor();
  if (k1.determinant().real() < 0.0) {
    theta[0] += kPi;
    k1 = right_factor();
  }

  const std::array<double, 3> raw{-(theta[0] + theta[1]) / 2, -(theta[1] + theta[3]) / 2,
                                  -(theta[0] + theta[3]) / 2};
  const InteractionContent content = canonicalize(raw);

  // Align the canonical core with the computed one: theta and the canonical
  // phases agree up to a permutation, per-entry signs and a fourth root of 1.
  const auto canon = core_phases(content.lambda);
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<int, 4> best_perm = perm;
  std::array<double, 4> best_sign{1, 1, 1, 1};
  Complex best_c = 1.0;
  double best_residual = 1e300;
  const Complex roots[4] = {1.0, kI, -1.0, -kI};
  do {
    for (const Complex c : roots) {
      std::array<double, 4> sign{};
      double residual = 0.0;
      double sign_product = 1.0;
      for (int k = 0; k < 4; ++k) {
        const Complex actual = std::exp(kI * theta[k]);
        const Complex target = c * std::exp(kI * canon[perm[k]]);
        sign[k] = (actual / target).real() >= 0.0 ? 1.0 : -1.0;
        sign_product *= sign[k];
        residual = std::max(residual, std::abs(actual - sign[k] * target));
      }
      if (sign_product > 0.0 && residual < best_residual) {
        best_residual = residual;
        best_perm = perm;
        best_sign = sign;
        best_c = c;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) p(k, best_perm[k]) = 1.0;
  if (p.determinant() < 0.0) p.col(0) *= -1.0;
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) s(k, k) = best_sign[k];

  const Mat4 left_so4 = k1 * (s * p).cast<Complex>();
  const Mat4 right_so4 = p.transpose().cast<Complex>() * oc.transpose();

  KakDecomposition out;
  out.content = content;
  const double phase_left =
      split_kronecker(m * left_so4 * m.adjoint(), out.locals.u1, out.locals.u2);
  const double phase_right =
      split_kronecker(m * right_so4 * m.adjoint(), out.locals.v1, out.locals.v2);
  out.locals.global_phase = std::arg(root * best_c) + phase_left + phase_right;

  const Mat4 rebuilt = std::exp(kI * out.locals.global_phase) * reconstruct(content, out.locals);
  if ((rebuilt - u).norm() > 1e-8) {
    throw Error(ErrorCode::kDidNotConverge, "kak_decompose: reconstruction check failed");
  }
  return out;
}

Mat4 reconstruct(const InteractionContent& content, const LocalGates& locals) {
  return kron(locals.u1, locals.u2) * interaction_core(content.lambda) *
         kron(locals.v1, locals.v2);
}

double t_min(const InteractionContent& content, const DeviceSpec& spec,
             std::optional<NamedGate> gate_tag) {
  if (spec.interaction == InteractionKind::kIsing) return content.sum_abs() / spec.g;
  if (!gate_tag) {
    throw Error(ErrorCode::kUnsupportedGateForInteraction,
                "t_min: " + to_string(spec.interaction) + " needs a tabulated gate tag");
  }
  switch (*gate_tag) {
    case NamedGate::kCNOT:
    case NamedGate::kCZ:
      return kPi / (4 * spec.g);
    case NamedGate::kSWAP:
      if (spec.interaction == InteractionKind::kXY) return 3 * kPi / (8 * spec.g);
      if (std::abs(spec.eta - 0.5) < 1e-12) return 3 * kPi / (10 * spec.g);
      break;
    default:
      break;
  }
  throw Error(ErrorCode::kUnsupportedGateForInteraction,
              "t_min: no tabulated speed limit for " + to_string(*gate_tag) + " with " +
                  to_string(spec.interaction) + " interaction");
}

}  // namespace qsl
