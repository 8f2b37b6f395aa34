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

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "qgt/heads.hpp"
#include "qgt/interface.hpp"
#include "qgt/qsim.hpp"

namespace qgt {

/// Sorted, distinct parameter indices forming a coordinate subspace.
struct SubspaceSketch {
  std::vector<int> indices;
  std::uint64_t seed = 0;

  /// s indices drawn uniformly without replacement from [0, P).
  static SubspaceSketch draw(int num_params, int s, std::uint64_t seed);
  /// All P indices in order.
  static SubspaceSketch full(int num_params);
  int size() const { return static_cast<int>(indices.size()); }
};

/// Exact features at theta and at theta +- (pi/2) e_k for every k in S.
struct ShiftedFeatures {
  Eigen::VectorXd base;
  Eigen::MatrixXd plus;
  Eigen::MatrixXd minus;

  /// Column k = [F(theta + pi/2 e_k) - F(theta - pi/2 e_k)] / 2.
  Eigen::MatrixXd jacobian() const { return (plus - minus) / 2.0; }
};

/// Throws std::invalid_argument unless every index in S is in range and drives
/// exactly one single-qubit rotation (the condition for the two-term shift
/// rule to be exact).
void check_shift_rule_applicable(const ParamCircuit& circuit, std::span<const int> subspace);

ShiftedFeatures shifted_features(const ParamCircuit& circuit, const QuantumState& input,
                                 const Eigen::VectorXd& theta, const FeatureMap& map,
                                 std::span<const int> subspace);

/// m x |S| feature Jacobian by the parameter-shift rule on exact features.
Eigen::MatrixXd shift_feature_jacobian(const ParamCircuit& circuit, const QuantumState& input,
                                       const Eigen::VectorXd& theta, const FeatureMap& map,
                                       std::span<const int> subspace);

/// J^T g_F with g_F evaluated at the exact features F(theta).
Eigen::VectorXd loss_gradient_exact(const ParamCircuit& circuit, const QuantumState& input,
                                    const Eigen::VectorXd& theta, const FeatureMap& map,
                                    const Head& head, std::span<const int> subspace);

/// Shift rule applied directly to a scalar expectation-valued objective of the
/// output state. Exact only when `objective` is linear in rho.
Eigen::VectorXd scalar_shift_gradient(const ParamCircuit& circuit, const QuantumState& input,
                                      const Eigen::VectorXd& theta, std::span<const int> subspace,
                                      const std::function<double(const QuantumState&)>& objective);

inline constexpr double kSandwichSlack = 1e-9;
inline constexpr double kDegeneracyGap = 1e-10;

/// Three-factor decomposition of J^T g. Construction enforces
/// sigma T |g| <= |J^T g| <= sigma |g| to kSandwichSlack relative and throws
/// std::logic_error otherwise.
class ChainRuleReport {
 public:
  ChainRuleReport(Eigen::MatrixXd jacobian, Eigen::VectorXd g, double sigma_max,
                  Eigen::VectorXd u_max, double transmittance, double transmitted_norm,
                  bool near_degenerate);

  double sigma_max() const { return sigma_max_; }
  const Eigen::VectorXd& u_max() const { return u_max_; }
  double g_norm() const { return g_norm_; }
  double transmittance() const { return transmittance_; }
  double transmitted_norm() const { return transmitted_norm_; }
  bool near_degenerate() const { return near_degenerate_; }
  /// True when g = 0 and transmittance was set to 0 by convention.
  bool zero_signal() const { return g_norm_ == 0.0; }
  const Eigen::MatrixXd& jacobian() const { return jacobian_; }
  const Eigen::VectorXd& g() const { return g_; }

  /// sigma_max * T * |g|.
  double lower_bound() const { return sigma_max_ * transmittance_ * g_norm_; }
  /// sigma_max * |g|.
  double upper_bound() const { return sigma_max_ * g_norm_; }

  nlohmann::json to_json(bool include_matrices = false) const;

 private:
  Eigen::MatrixXd jacobian_;
  Eigen::VectorXd g_;
  double sigma_max_;
  Eigen::VectorXd u_max_;
  double g_norm_;
  double transmittance_;
  double transmitted_norm_;
  bool near_degenerate_;
};

ChainRuleReport chain_rule_decompose(Eigen::MatrixXd jacobian, Eigen::VectorXd g);

template <typename DerivedJ, typename DerivedG>
ChainRuleReport chain_rule_decompose(const Eigen::MatrixBase<DerivedJ>& jacobian,
                                     const Eigen::MatrixBase<DerivedG>& g) {
  return chain_rule_decompose(Eigen::MatrixXd(jacobian), Eigen::VectorXd(g));
}

struct VarianceBridgeReport {
  double trace_cov = 0.0;
  double bound = 0.0;
  bool holds = false;
};

inline constexpr double kVarianceBridgeSlack = 1e-6;

/// Tr Cov(grad L) against mean[(sigma_max |g|)^2] over an ensemble. Uses the
/// 1/N (population) covariance of the supplied gradients.
VarianceBridgeReport variance_bridge_check(std::span<const Eigen::VectorXd> gradients,
                                           std::span<const std::pair<double, double>> sigma_g);

struct NllAmplification {
  double predicted = 0.0;    // N / sqrt(s)
  double measured = 0.0;     // |grad_p NLL| at p uniform, q uniform on s outcomes
  double linear_norm = 0.0;  // |q|, the linear head's signal in the same setup
};

NllAmplification nll_amplification_probe(int width, int support);

struct PbjThresholds {
  double sigma = 0.0;
  double g_norm = 0.0;
  double transmittance = 0.0;
};

/// Fraction of reports with every chain-rule factor at or above its threshold.
double pbj_factor_check(std::span<const ChainRuleReport> reports, const PbjThresholds& t);

}  // namespace qgt
