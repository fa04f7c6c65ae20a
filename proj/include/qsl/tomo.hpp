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

// Simulated two-qubit process tomography: 36 preparations x 9 measurement
// settings on |00>, readout through a confusion matrix, maximum-likelihood
// reconstruction over CPTP maps, SPAM correction and statistical error bars.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsl/gatefid.hpp"
#include "qsl/matcore.hpp"

namespace qsl {

inline constexpr int kOutcomes = 4;
inline constexpr int kPostRotations = 9;
inline constexpr int kPreRotations = 36;

// pre[6a + b] = s_a (x) s_b with s = (Y90, Y-90, X-90, X90, I, X180);
// post[3a + b] = s_a (x) s_b with s = (I, X-90, Y90). X_theta = exp(-i theta X / 2).
struct RotationSets {
  std::array<Mat4, kPreRotations> pre;
  std::array<Mat4, kPostRotations> post;
  std::array<std::string, kPreRotations> pre_labels;
  std::array<std::string, kPostRotations> post_labels;

  static const RotationSets& standard();
};

// p(i, j) = Prob(read |i> | prepared |j>), column-stochastic.
struct ConfusionMatrix {
  Eigen::Matrix4d p = Eigen::Matrix4d::Identity();

  void validate() const;
  static ConfusionMatrix ideal();
  // Independent symmetric bit-flip readout errors on each qubit.
  static ConfusionMatrix symmetric_readout(double error1, double error2);
};

// n(j, k, l): outcome j, post-rotation k, pre-rotation l.
struct CountsTensor {
  int shots = 0;
  std::vector<std::int64_t> n = std::vector<std::int64_t>(kOutcomes * kPostRotations * kPreRotations);

  static int index(int j, int k, int l) { return (j * kPostRotations + k) * kPreRotations + l; }
  std::int64_t& at(int j, int k, int l) { return n[index(j, k, l)]; }
  std::int64_t at(int j, int k, int l) const { return n[index(j, k, l)]; }
  void validate() const;
};

// Outcome distribution for pre-rotation l, process r, post-rotation k.
// Throws kIndexOutOfRange and kNotTracePreserving.
Eigen::Vector4d predict_probabilities(const PTM& r, int k, int l, const ConfusionMatrix& confusion);

// Expected counts shots * p for every setting (real valued).
std::vector<double> expected_counts(const PTM& r, const ConfusionMatrix& confusion, int shots);

CountsTensor simulate_qpt(const PTM& channel, const ConfusionMatrix& confusion, int shots,
                          std::uint64_t seed);

struct MleConfig {
  int max_iterations = 5000;
  double tolerance = 1e-9;      // on the Frobenius length of an accepted step
  double probability_floor = 1e-12;
};

struct MleResult {
  PTM ptm;
  bool converged = false;
  int iterations = 0;
  double negative_log_likelihood = 0.0;  // per count
  double last_step = 0.0;
};

// Maximizes sum n log p over CPTP maps by accelerated projected gradient
// (backtracking, momentum restarts), starting from the completely
// depolarizing channel. Never
// throws on non-convergence; check MleResult::converged.
MleResult mle_reconstruct(const CountsTensor& counts, const ConfusionMatrix& confusion,
                          const MleConfig& config = {});
// Same with real-valued weights laid out as CountsTensor::n.
MleResult mle_reconstruct(const std::vector<double>& weights, const ConfusionMatrix& confusion,
                          const MleConfig& config = {});

// Nearest CPTP map in Frobenius norm. Newton iteration on the dual of the
// trace-preserving constraint; falls back to Dykstra alternation between the
// PSD cone and the affine set if Newton stalls.
PTM project_cptp(const PTM& r, double tolerance = 1e-12, int max_iterations = 10000);

// Choi eigenvalue floor and first-row residual of a candidate CPTP map.
double min_choi_eigenvalue(const PTM& r);

// chi_corr = T^-1 (T chi_U T^dag - V chi_I V^dag + chi_I) (T^dag)^-1 with
// T_mn = Tr(P_m P_n U^dag) / 4 and V_mn = Tr(P_m P_n) / 4, then projected to
// the nearest CPTP map. Throws kSingularT.
ChiMatrix spam_correct(const ChiMatrix& chi_u_exp, const ChiMatrix& chi_i_exp,
                       const Mat4& u_target);

struct StatisticalError {
  double std_fidelity = 0.0;
  double mean_fidelity = 0.0;
  std::vector<double> samples;
};

// Each trial perturbs the measured <IZ>, <ZI>, <ZZ> of every setting with
// N(0, noise_std) (default 1 / sqrt(shots)), maps back to frequencies,
// reconstructs and scores against u_target. Requires trials >= 2.
StatisticalError estimate_statistical_error(const CountsTensor& counts, const Mat4& u_target,
                                            const ConfusionMatrix& confusion, int trials,
                                            std::uint64_t seed,
                                            std::optional<double> noise_std = std::nullopt,
                                            const MleConfig& config = {});

}  // namespace qsl
