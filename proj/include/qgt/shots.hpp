// Copyright 2026 The qgt Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Finite-shot gradient estimation and the reliability/fidelity statistics
// used to accept a shot budget.
//
// Shot accounting: every evaluation point gets fresh shots at budget M. A
// subspace estimate therefore costs (2 s + 1) M shots: both shifts for each
// coordinate plus the base point used for the head gradient.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgt/grad.hpp"
#include "qgt/heads.hpp"

namespace qgt {

struct ShotEstimate {
  int circuit_id = 0;
  int repetition = 0;
  std::uint64_t shots = 0;
  /// Estimated J_S^T g_F; length 1 for the single-parameter probe.
  Eigen::VectorXd value;
  /// |g_F| evaluated at the M-shot estimate of F(theta).
  double feature_grad_norm = 0.0;
  /// Chain-rule factors of the estimated Jacobian, when requested.
  std::optional<double> sigma_max;
  std::optional<double> transmittance;
};

/// One repetition of the shift-rule estimator from precomputed exact shifted
/// distributions.
ShotEstimate finite_shot_gradient(const ShiftedFeatures& exact, const Head& head,
                                  std::uint64_t shots, Rng& rng,
                                  bool with_decomposition = false);

ShotEstimate finite_shot_gradient(const ParamCircuit& circuit, const QuantumState& input,
                                  const Eigen::VectorXd& theta, const FeatureMap& map,
                                  const Head& head, std::span<const int> subspace,
                                  std::uint64_t shots, Rng& rng);

/// Signal-to-noise value with an explicit +infinity sentinel (nonzero mean,
/// zero sample variance). Infinite values order above every finite one.
struct Snr {
  double value = 0.0;
  bool infinite = false;

  static Snr inf() { return {0.0, true}; }
  double as_double() const {
    return infinite ? std::numeric_limits<double>::infinity() : value;
  }
  friend bool operator<(const Snr& a, const Snr& b) {
    if (a.infinite || b.infinite) return !a.infinite && b.infinite;
    return a.value < b.value;
  }
  bool operator>=(double kappa) const { return infinite || value >= kappa; }
};

/// |mean| / sample std over repetitions (R >= 2).
Snr snr_single(std::span<const double> repetitions);
/// |mean|_2 / sqrt(sum_j sample var_j) over repetitions (R >= 2).
Snr snr_multi(std::span<const Eigen::VectorXd> repetitions);
/// Median after a deterministic sort; mean of the middle pair for even counts.
Snr median(std::vector<Snr> values);

/// Groups by circuit_id, then takes the median of per-circuit SNRs.
Snr med_snr_single(std::span<const ShotEstimate> estimates);
Snr med_snr_multi(std::span<const ShotEstimate> estimates);

inline constexpr double kRelBiasStabilizer = 1e-12;

/// |mean - exact| / (|exact| + eps_stab).
double rel_bias(const Eigen::Ref<const Eigen::VectorXd>& mean,
                const Eigen::Ref<const Eigen::VectorXd>& exact, double eps_stab);

/// Median over circuits of rel_bias(repetition mean, exact gradient).
double med_rel_bias(std::span<const ShotEstimate> estimates,
                    const std::map<int, Eigen::VectorXd>& exact,
                    double eps_stab = kRelBiasStabilizer);

double median(std::vector<double> values);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

enum class ProbeKind { Single, Multi };

std::string to_string(ProbeKind kind);
ProbeKind parse_probe_kind(const std::string& name);

struct GridPoint {
  std::uint64_t shots = 0;
  Snr med_snr;
  std::optional<double> med_rel_bias;
};

struct FrontierResult {
  int n = 0;
  HeadKind head = HeadKind::Linear;
  ProbeKind probe = ProbeKind::Single;
  std::optional<std::uint64_t> m_star;
  std::vector<GridPoint> grid;
  double kappa = 2.0;
  double tau = 0.5;

  bool attained() const { return m_star.has_value(); }
};

inline constexpr double kDefaultKappa = 2.0;
inline constexpr double kDefaultTau = 0.5;

/// Single: min M with MedSNR >= kappa. Multi: min M with MedSNR >= kappa and
/// MedRelBias <= tau. The whole grid is kept in the result.
FrontierResult frontier_search(ProbeKind probe, int n, HeadKind head, std::vector<GridPoint> grid,
                               double kappa = kDefaultKappa, double tau = kDefaultTau);

/// Powers of two 2^lo .. 2^hi.
std::vector<std::uint64_t> power_of_two_grid(int lo = 7, int hi = 20);

struct RidgelineRow {
  int circuit_id = 0;
  int repetition = 0;
  std::uint64_t shots = 0;
  double log10_feature_grad = 0.0;
  double log10_transmitted = 0.0;
};

std::vector<RidgelineRow> export_ridgeline(std::span<const ShotEstimate> estimates);

}  // namespace qgt
