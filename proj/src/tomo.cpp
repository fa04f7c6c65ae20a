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

#include "qsl/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "qsl/gates.hpp"

namespace qsl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSettings = kPostRotations * kPreRotations;

using Mat4x16 = Eigen::Matrix<double, 4, 16>;
using Vec16 = Eigen::Matrix<double, 16, 1>;

// Pauli vector (Tr P_m rho) of |00><00|.
Vec16 initial_pauli_vector() {
  Vec16 s = Vec16::Zero();
  s(0) = s(3) = s(12) = s(15) = 1.0;  // II, IZ, ZI, ZZ
  return s;
}

// Populations <j| rho |j> from the Pauli vector: Dm(j, m) = <j|P_m|j> / 4.
Mat4x16 population_map() {
  Mat4x16 d;
  const auto& p = two_qubit_paulis();
  for (int j = 0; j < 4; ++j) {
    for (int m = 0; m < 16; ++m) d(j, m) = p[m](j, j).real() / 4.0;
  }
  return d;
}

// Precomputed linear forms p_j(k, l) = w_{k}.row(j) R v_l.
struct Design {
  std::array<Mat4x16, kPostRotations> w;
  Eigen::Matrix<double, 16, kPreRotations> v;

  explicit Design(const ConfusionMatrix& confusion) {
    const RotationSets& rot = RotationSets::standard();
    const Mat4x16 dm = confusion.p * population_map();
    for (int k = 0; k < kPostRotations; ++k) w[k] = dm * ptm_of_unitary(rot.post[k]).r;
    const Vec16 s0 = initial_pauli_vector();
    for (int l = 0; l < kPreRotations; ++l) v.col(l) = ptm_of_unitary(rot.pre[l]).r * s0;
  }

  // 4 x 36 block of probabilities for post-rotation k.
  Eigen::Matrix<double, 4, kPreRotations> probabilities(const Mat16& r, int k) const {
    return w[k] * r * v;
  }
};

double negative_log_likelihood(const Design& design, const std::vector<double>& weights,
                               double total, const Mat16& r, double floor) {
  double f = 0.0;
  for (int k = 0; k < kPostRotations; ++k) {
    const auto p = design.probabilities(r, k);
    for (int j = 0; j < 4; ++j) {
      for (int l = 0; l < kPreRotations; ++l) {
        const double n = weights[CountsTensor::index(j, k, l)];
        if (n > 0.0) f -= n * std::log(std::max(p(j, l), floor));
      }
    }
  }
  return f / total;
}

Mat16 likelihood_gradient(const Design& design, const std::vector<double>& weights, double total,
                          const Mat16& r, double floor) {
  Mat16 g = Mat16::Zero();
  for (int k = 0; k < kPostRotations; ++k) {
    const auto p = design.probabilities(r, k);
    Eigen::Matrix<double, 4, kPreRotations> ratio;
    for (int j = 0; j < 4; ++j) {
      for (int l = 0; l < kPreRotations; ++l) {
        const double n = weights[CountsTensor::index(j, k, l)];
        ratio(j, l) = n > 0.0 ? n / std::max(p(j, l), floor) : 0.0;
      }
    }
    g.noalias() -= design.w[k].transpose() * ratio * design.v.transpose();
  }
  return g / total;
}

// Choi index 4 a + b: a output, b input. TP means Tr_out J = I.
CMat16 project_trace_preserving(const CMat16& j) {
  Mat4 partial = Mat4::Zero();
  for (int a = 0; a < 4; ++a) partial += j.block<4, 4>(4 * a, 4 * a);
  const Mat4 excess = (partial - Mat4::Identity()) / 4.0;
  CMat16 out = j;
  for (int a = 0; a < 4; ++a) out.block<4, 4>(4 * a, 4 * a) -= excess;
  return out;
}

CMat16 project_psd(const CMat16& j, double* min_eigenvalue = nullptr) {
  Eigen::SelfAdjointEigenSolver<CMat16> solver(0.5 * (j + j.adjoint()));
  if (min_eigenvalue) *min_eigenvalue = solver.eigenvalues().minCoeff();
  const Eigen::Matrix<double, 16, 1> clipped = solver.eigenvalues().cwiseMax(0.0);
  return solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_weights(const std::vector<double>& weights) {
  if (weights.size() != static_cast<std::size_t>(kOutcomes * kSettings)) {
    throw Error(ErrorCode::kInvalidArgument, "mle_reconstruct: weights must have 1296 entries");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "mle_reconstruct: weights must be non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mle_reconstruct: no counts");
}

}  // namespace

const RotationSets& RotationSets::standard() {
  static const RotationSets sets = [] {
    RotationSets out;
    const std::array<Mat2, 6> pre = {ry(kPi / 2), ry(-kPi / 2), rx(-kPi / 2),
                                     rx(kPi / 2), Mat2::Identity(), rx(kPi)};
    const std::array<std::string, 6> pre_names = {"Y90", "Y-90", "X-90", "X90", "I", "X180"};
    const std::array<Mat2, 3> post = {Mat2::Identity(), rx(-kPi / 2), ry(kPi / 2)};
    const std::array<std::string, 3> post_names = {"I", "X-90", "Y90"};
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        out.pre[6 * a + b] = kron(pre[a], pre[b]);
        out.pre_labels[6 * a + b] = pre_names[a] + "," + pre_names[b];
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        out.post[3 * a + b] = kron(post[a], post[b]);
        out.post_labels[3 * a + b] = post_names[a] + "," + post_names[b];
      }
    }
    return out;
  }();
  return sets;
}

void ConfusionMatrix::validate() const {
  for (int j = 0; j < 4; ++j) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double v = p(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "confusion matrix entries must lie in [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument, "confusion matrix columns must sum to 1");
    }
  }
}

ConfusionMatrix ConfusionMatrix::ideal() { return ConfusionMatrix{}; }

ConfusionMatrix ConfusionMatrix::symmetric_readout(double error1, double error2) {
  auto single = [](double e) {
    Eigen::Matrix2d m;
    m << 1.0 - e, e, e, 1.0 - e;
    return m;
  };
  const Eigen::Matrix2d a = single(error1);
  const Eigen::Matrix2d b = single(error2);
  ConfusionMatrix out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.p.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  out.validate();
  return out;
}

void CountsTensor::validate() const {
  if (shots < 1) throw Error(ErrorCode::kInvalidArgument, "counts: shots must be >= 1");
  if (n.size() != static_cast<std::size_t>(kOutcomes * kSettings)) {
    throw Error(ErrorCode::kInvalidArgument, "counts: expected 4 x 9 x 36 entries");
  }
  for (int k = 0; k < kPostRotations; ++k) {
    for (int l = 0; l < kPreRotations; ++l) {
      std::int64_t sum = 0;
      for (int j = 0; j < kOutcomes; ++j) {
        if (at(j, k, l) < 0) throw Error(ErrorCode::kInvalidArgument, "counts: negative entry");
        sum += at(j, k, l);
      }
      if (sum != shots) {
        throw Error(ErrorCode::kInvalidArgument,
                    "counts: setting (" + std::to_string(k) + ", " + std::to_string(l) +
                        ") does not sum to the shot count");
      }
    }
  }
}

Eigen::Vector4d predict_probabilities(const PTM& r, int k, int l,
                                      const ConfusionMatrix& confusion) {
  if (k < 0 || k >= kPostRotations || l < 0 || l >= kPreRotations) {
    throw Error(ErrorCode::kIndexOutOfRange, "predict_probabilities: rotation index out of range");
  }
  if (trace_preservation_error(r) > kTraceTolerance) {
    throw Error(ErrorCode::kNotTracePreserving, "predict_probabilities: process is not TP");
  }
  const RotationSets& rot = RotationSets::standard();
  const Vec16 state = r.r * ptm_of_unitary(rot.pre[l]).r * initial_pauli_vector();
  return confusion.p * population_map() * ptm_of_unitary(rot.post[k]).r * state;
}

std::vector<double> expected_counts(const PTM& r, const ConfusionMatrix& confusion, int shots) {
  if (trace_preservation_error(r) > kTraceTolerance) {
    throw Error(ErrorCode::kNotTracePreserving, "expected_counts: process is not TP");
  }
  const Design design(confusion);
  std::vector<double> out(kOutcomes * kSettings);
  for (int k = 0; k < kPostRotations; ++k) {
    const auto p = design.probabilities(r.r, k);
    for (int j = 0; j < 4; ++j) {
      for (int l = 0; l < kPreRotations; ++l) {
        out[CountsTensor::index(j, k, l)] = shots * std::max(p(j, l), 0.0);
      }
    }
  }
  return out;
}

CountsTensor simulate_qpt(const PTM& channel, const ConfusionMatrix& confusion, int shots,
                          std::uint64_t seed) {
  if (shots < 1) throw Error(ErrorCode::kInvalidArgument, "simulate_qpt: shots must be >= 1");
  confusion.validate();
  if (trace_preservation_error(channel) > kTraceTolerance) {
    throw Error(ErrorCode::kNotTracePreserving, "simulate_qpt: process is not TP");
  }
  const Design design(confusion);
  std::mt19937_64 rng(seed);
  CountsTensor out;
  out.shots = shots;
  for (int k = 0; k < kPostRotations; ++k) {
    const auto p = design.probabilities(channel.r, k);
    for (int l = 0; l < kPreRotations; ++l) {
      std::array<double, 4> q{};
      double norm = 0.0;
      for (int j = 0; j < 4; ++j) norm += (q[j] = std::max(p(j, l), 0.0));
      // Multinomial as a chain of conditional binomials.
      std::int64_t left = shots;
      double mass = 1.0;
      for (int j = 0; j < 3; ++j) {
        const double pj = q[j] / norm;
        const double cond = mass > 0.0 ? std::clamp(pj / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> draw(left, cond);
        const std::int64_t c = draw(rng);
        out.at(j, k, l) = c;
        left -= c;
        mass -= pj;
      }
      out.at(3, k, l) = left;
    }
  }
  return out;
}

double min_choi_eigenvalue(const PTM& r) {
  const CMat16 j = choi_of_ptm(r);
  Eigen::SelfAdjointEigenSolver<CMat16> solver(0.5 * (j + j.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

// Dykstra alternation; slow but dependable. The PSD step keeps its correction
// term, the affine TP step needs none.
CMat16 dykstra_cptp(const CMat16& start, double tolerance, int max_iterations) {
  CMat16 x = start;
  CMat16 p = CMat16::Zero();
  for (int it = 0; it < max_iterations; ++it) {
    double min_eig = 0.0;
    const CMat16 y = project_psd(x + p, &min_eig);
    p = x + p - y;
    const CMat16 next = project_trace_preserving(y);
    const double change = (next - x).norm();
    x = next;
    if (change < tolerance && min_eig > -tolerance) break;
  }
  return x;
}

CMat16 lift(const Mat4& lambda) {
  CMat16 out = CMat16::Zero();
  for (int a = 0; a < 4; ++a) out.block<4, 4>(4 * a, 4 * a) = lambda;
  return out;
}

Mat4 partial_trace_out(const CMat16& j) {
  Mat4 out = Mat4::Zero();
  for (int a = 0; a < 4; ++a) out += j.block<4, 4>(4 * a, 4 * a);
  return out;
}

// Coordinates of a Hermitian 4 x 4 matrix in the orthonormal basis P_a / 2.
Vec16 coords(const Mat4& h) {
  Vec16 c;
  const auto& p = two_qubit_paulis();
  for (int a = 0; a < 16; ++a) c(a) = (p[a] * h).trace().real() / 2.0;
  return c;
}

Mat4 from_coords(const Vec16& c) {
  Mat4 out = Mat4::Zero();
  const auto& p = two_qubit_paulis();
  for (int a = 0; a < 16; ++a) out += (c(a) / 2.0) * p[a];
  return out;
}

struct DualState {
  CMat16 j;      // PSD part of J0 - I (x) Lambda
  Vec16 grad;    // coordinates of Tr_out j - I
  Eigen::SelfAdjointEigenSolver<CMat16> solver;
};

DualState dual_state(const CMat16& j0, const Vec16& lambda) {
  DualState s;
  const CMat16 a = j0 - lift(from_coords(lambda));
  s.solver.compute(0.5 * (a + a.adjoint()));
  const Eigen::Matrix<double, 16, 1> clipped = s.solver.eigenvalues().cwiseMax(0.0);
  s.j = s.solver.eigenvectors() * clipped.asDiagonal() * s.solver.eigenvectors().adjoint();
  s.grad = coords(partial_trace_out(s.j) - Mat4::Identity());
  return s;
}

// Exact Frobenius projection by semismooth Newton on the dual of the TP
// constraint: J(Lambda) = PSD(J0 - I (x) Lambda), solve Tr_out J(Lambda) = I.
bool newton_cptp(const CMat16& j0, double tolerance, CMat16& out) {
  Vec16 lambda = Vec16::Zero();
  DualState s = dual_state(j0, lambda);
  const auto& p = two_qubit_paulis();
  for (int it = 0; it < 100; ++it) {
    const double residual = s.grad.norm();
    if (residual < tolerance) {
      out = s.j;
      return true;
    }
    // Generalized Jacobian of the PSD projection in the eigenbasis.
    const auto& ev = s.solver.eigenvalues();
    const CMat16& v = s.solver.eigenvectors();
    Mat16 omega;
    for (int i = 0; i < 16; ++i) {
      for (int k = 0; k < 16; ++k) {
        const double li = ev(i), lk = ev(k);
        if (std::abs(li - lk) > 1e-14) {
          omega(i, k) = (std::max(li, 0.0) - std::max(lk, 0.0)) / (li - lk);
        } else {
          omega(i, k) = li > 0.0 ? 1.0 : 0.0;
        }
      }
    }
    Mat16 jac;
    for (int b = 0; b < 16; ++b) {
      const CMat16 dir = v.adjoint() * lift(0.5 * p[b]) * v;
      const CMat16 dj = v * (omega.cast<Complex>().cwiseProduct(dir)) * v.adjoint();
      jac.col(b) = coords(partial_trace_out(dj));
    }
    jac += 1e-12 * Mat16::Identity();
    // Tr_out PSD(J0 - I (x) Lambda) decreases along +Lambda, so step with +jac^-1 grad.
    const Vec16 step = jac.ldlt().solve(s.grad);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      DualState trial = dual_state(j0, lambda + t * step);
      if (trial.grad.norm() < (1.0 - 1e-4 * t) * residual) {
        lambda += t * step;
        s = std::move(trial);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return false;
  }
  return false;
}

}  // namespace

PTM project_cptp(const PTM& r, double tolerance, int max_iterations) {
  const CMat16 j0 = choi_of_ptm(r);
  CMat16 j;
  if (!newton_cptp(j0, tolerance, j)) j = dykstra_cptp(j0, tolerance, max_iterations);
  return ptm_of_choi(j);
}

MleResult mle_reconstruct(const CountsTensor& counts, const ConfusionMatrix& confusion,
                          const MleConfig& config) {
  counts.validate();
  std::vector<double> weights(counts.n.begin(), counts.n.end());
  return mle_reconstruct(weights, confusion, config);
}

MleResult mle_reconstruct(const std::vector<double>& weights, const ConfusionMatrix& confusion,
                          const MleConfig& config) {
  require_weights(weights);
  confusion.validate();
  if (config.max_iterations < 1 || !(config.tolerance > 0.0) ||
      !(config.probability_floor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mle_reconstruct: invalid configuration");
  }
  const Design design(confusion);
  double total = 0.0;
  for (const double w : weights) total += w;
  const double floor = config.probability_floor;

  const auto nll = [&](const Mat16& x) { return negative_log_likelihood(design, weights, total, x, floor); };
  const auto grad = [&](const Mat16& x) { return likelihood_gradient(design, weights, total, x, floor); };
  // Extrapolated points may leave the CPTP set; only use them while every
  // observed outcome keeps a positive probability.
  const auto usable = [&](const Mat16& x) {
    for (int k = 0; k < kPostRotations; ++k) {
      const auto p = design.probabilities(x, k);
      for (int j = 0; j < 4; ++j) {
        for (int l = 0; l < kPreRotations; ++l) {
          if (weights[CountsTensor::index(j, k, l)] > 0.0 && !(p(j, l) > floor)) return false;
        }
      }
    }
    return true;
  };

  // Accelerated projected gradient with backtracking and momentum restarts.
  Mat16 r = Mat16::Zero();
  r(0, 0) = 1.0;  // completely depolarizing start, interior of the CPTP set
  double f = nll(r);
  Mat16 y = r;
  double fy = f;
  Mat16 gy = grad(y);
  double step = 1.0;
  double theta = 1.0;
  bool at_r = true;

  MleResult out;
  out.last_step = 1.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    out.iterations = it;
    Mat16 candidate;
    double fc = 0.0;
    for (;;) {
      candidate = project_cptp(PTM{y - step * gy}, 1e-13, 2000).r;
      const Mat16 d = candidate - y;
      fc = nll(candidate);
      if (fc <= fy + (gy.array() * d.array()).sum() + d.squaredNorm() / (2.0 * step) || step < 1e-10) break;
      step *= 0.5;
    }
    if (fc > f && !at_r) {
      y = r;
      fy = f;
      gy = grad(r);
      theta = 1.0;
      at_r = true;
      continue;
    }
    const double move = (candidate - r).norm();
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Mat16 y_next = candidate + ((theta - 1.0) / theta_next) * (candidate - r);
    r = candidate;
    f = std::min(fc, f);
    theta = theta_next;
    out.last_step = move;
    if (move < config.tolerance) {
      out.converged = true;
      break;
    }
    at_r = !usable(y_next);
    if (at_r) {
      y_next = r;
      theta = 1.0;
    }
    y = y_next;
    fy = nll(y);
    gy = grad(y);
    step = std::min(step * 1.5, 1e6);
  }
  // Convex combinations of CPTP maps stay CPTP; clean up rounding drift.
  out.ptm = project_cptp(PTM{r}, 1e-13, 2000);
  out.negative_log_likelihood = negative_log_likelihood(design, weights, total, out.ptm.r, floor);
  return out;
}

ChiMatrix spam_correct(const ChiMatrix& chi_u_exp, const ChiMatrix& chi_i_exp,
                       const Mat4& u_target) {
  require_unitary(u_target, "spam_correct target");
  const auto& p = two_qubit_paulis();
  const Mat4 u_dag = u_target.adjoint();
  CMat16 t;
  CMat16 v;
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) {
      const Mat4 pp = p[m] * p[n];
      t(m, n) = (pp * u_dag).trace() / 4.0;
      v(m, n) = pp.trace() / 4.0;
    }
  }
  Eigen::FullPivLU<CMat16> lu(t);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw Error(ErrorCode::kSingularT, "spam_correct: T is singular for this target");
  }
  const CMat16 middle = t * chi_u_exp.chi * t.adjoint() - v * chi_i_exp.chi * v.adjoint() +
                        chi_i_exp.chi;
  const CMat16 t_inv = lu.inverse();
  CMat16 corrected = t_inv * middle * t_inv.adjoint();
  corrected = 0.5 * (corrected + corrected.adjoint());
  return chi_of_ptm(project_cptp(ptm_of_chi(ChiMatrix{corrected})));
}

StatisticalError estimate_statistical_error(const CountsTensor& counts, const Mat4& u_target,
                                            const ConfusionMatrix& confusion, int trials,
                                            std::uint64_t seed, std::optional<double> noise_std,
                                            const MleConfig& config) {
  if (trials < 2) {
    throw Error(ErrorCode::kInvalidArgument, "estimate_statistical_error: trials must be >= 2");
  }
  counts.validate();
  require_unitary(u_target, "estimate_statistical_error target");
  const double sigma = noise_std.value_or(1.0 / std::sqrt(static_cast<double>(counts.shots)));
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "estimate_statistical_error: noise std must be >= 0");
  }
  // Outcome frequencies <-> diagonal Pauli expectations (II, IZ, ZI, ZZ).
  Eigen::Matrix4d h;
  h << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  const double shots = counts.shots;

  StatisticalError out;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(trial)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> weights(kOutcomes * kSettings);
    for (int k = 0; k < kPostRotations; ++k) {
      for (int l = 0; l < kPreRotations; ++l) {
        Eigen::Vector4d f;
        for (int j = 0; j < 4; ++j) f(j) = counts.at(j, k, l) / shots;
        Eigen::Vector4d e = h * f;
        for (int m = 1; m < 4; ++m) e(m) += sigma * normal(rng);
        Eigen::Vector4d perturbed = (h * e / 4.0).cwiseMax(0.0);
        const double norm = perturbed.sum();
        if (norm > 0.0) perturbed /= norm; else perturbed = f;
        for (int j = 0; j < 4; ++j) weights[CountsTensor::index(j, k, l)] = shots * perturbed(j);
      }
    }
    const MleResult fit = mle_reconstruct(weights, confusion, config);
    out.samples.push_back(avg_fidelity_from_ptm(fit.ptm, u_target));
  }
  double mean = 0.0;
  for (const double s : out.samples) mean += s;
  mean /= trials;
  double var = 0.0;
  for (const double s : out.samples) var += (s - mean) * (s - mean);
  out.mean_fidelity = mean;
  out.std_fidelity = std::sqrt(var / (trials - 1));
  return out;
}

}  // namespace qsl
