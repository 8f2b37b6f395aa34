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
#include "qgt/grad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace qgt {

SubspaceSketch SubspaceSketch::draw(int num_params, int s, std::uint64_t seed) {
  if (s < 1 || s > num_params)
    throw std::invalid_argument("subspace size must satisfy 1 <= s <= P (s=" +
                                std::to_string(s) + ", P=" + std::to_string(num_params) + ")");
  std::vector<int> pool(static_cast<std::size_t>(num_params));
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng = make_rng(seed);
  for (int i = 0; i < s; ++i) {
    std::uniform_int_distribution<int> pick(i, num_params - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  SubspaceSketch sk;
  sk.indices.assign(pool.begin(), pool.begin() + s);
  std::sort(sk.indices.begin(), sk.indices.end());
  sk.seed = seed;
  return sk;
}

SubspaceSketch SubspaceSketch::full(int num_params) {
  SubspaceSketch sk;
  sk.indices.resize(static_cast<std::size_t>(num_params));
  std::iota(sk.indices.begin(), sk.indices.end(), 0);
  return sk;
}

void check_shift_rule_applicable(const ParamCircuit& circuit, std::span<const int> subspace) {
  circuit.validate();
  std::vector<int> uses(static_cast<std::size_t>(circuit.num_params), 0);
  for (const Gate& g : circuit.gates)
    if (g.param_index) ++uses[static_cast<std::size_t>(*g.param_index)];
  for (int k : subspace) {
    if (k < 0 || k >= circuit.num_params)
      throw std::invalid_argument("subspace index " + std::to_string(k) + " out of range");
    if (uses[static_cast<std::size_t>(k)] != 1)
      throw std::invalid_argument("parameter " + std::to_string(k) +
                                  " must drive exactly one rotation for the shift rule");
  }
}

ShiftedFeatures shifted_features(const ParamCircuit& circuit, const QuantumState& input,
                                 const Eigen::VectorXd& theta, const FeatureMap& map,
                                 std::span<const int> subspace) {
  check_shift_rule_applicable(circuit, subspace);
  if (map.num_qubits() != circuit.num_qubits)
    throw std::invalid_argument("interface and circuit qubit counts differ");
  constexpr double kShift = std::numbers::pi / 2.0;
  const auto features_at = [&](const Eigen::VectorXd& t) {
    return exact_features(run(circuit, input, t), map).values;
  };
  ShiftedFeatures out;
  out.base = features_at(theta);
  const auto s = static_cast<Eigen::Index>(subspace.size());
  out.plus.resize(map.width(), s);
  out.minus.resize(map.width(), s);
  Eigen::VectorXd shifted = theta;
  for (Eigen::Index col = 0; col < s; ++col) {
    const int k = subspace[static_cast<std::size_t>(col)];
    shifted(k) = theta(k) + kShift;
    out.plus.col(col) = features_at(shifted);
    shifted(k) = theta(k) - kShift;
    out.minus.col(col) = features_at(shifted);
    shifted(k) = theta(k);
  }
  return out;
}

Eigen::MatrixXd shift_feature_jacobian(const ParamCircuit& circuit, const QuantumState& input,
                                       const Eigen::VectorXd& theta, const FeatureMap& map,
                                       std::span<const int> subspace) {
  return shifted_features(circuit, input, theta, map, subspace).jacobian();
}

Eigen::VectorXd loss_gradient_exact(const ParamCircuit& circuit, const QuantumState& input,
                                    const Eigen::VectorXd& theta, const FeatureMap& map,
                                    const Head& head, std::span<const int> subspace) {
  const ShiftedFeatures sf = shifted_features(circuit, input, theta, map, subspace);
  return sf.jacobian().transpose() * feature_gradient(head, sf.base);
}

Eigen::VectorXd scalar_shift_gradient(const ParamCircuit& circuit, const QuantumState& input,
                                      const Eigen::VectorXd& theta, std::span<const int> subspace,
                                      const std::function<double(const QuantumState&)>& objective) {
  check_shift_rule_applicable(circuit, subspace);
  constexpr double kShift = std::numbers::pi / 2.0;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(subspace.size()));
  Eigen::VectorXd shifted = theta;
  for (std::size_t col = 0; col < subspace.size(); ++col) {
    const int k = subspace[col];
    shifted(k) = theta(k) + kShift;
    const double up = objective(run(circuit, input, shifted));
    shifted(k) = theta(k) - kShift;
    const double down = objective(run(circuit, input, shifted));
    shifted(k) = theta(k);
    grad(static_cast<Eigen::Index>(col)) = (up - down) / 2.0;
  }
  return grad;
}

ChainRuleReport::ChainRuleReport(Eigen::MatrixXd jacobian, Eigen::VectorXd g, double sigma_max,
                                 Eigen::VectorXd u_max, double transmittance,
                                 double transmitted_norm, bool near_degenerate)
    : jacobian_(std::move(jacobian)),
      g_(std::move(g)),
      sigma_max_(sigma_max),
      u_max_(std::move(u_max)),
      g_norm_(g_.norm()),
      transmittance_(transmittance),
      transmitted_norm_(transmitted_norm),
      near_degenerate_(near_degenerate) {
  if (jacobian_.rows() != g_.size())
    throw std::invalid_argument("Jacobian rows must match the feature gradient length");
  if (!(transmittance_ >= 0.0 && transmittance_ <= 1.0 + kSandwichSlack))
    throw std::logic_error("transmittance outside [0, 1]: " + std::to_string(transmittance_));
  const double upper = upper_bound();
  const double slack = kSandwichSlack * upper;
  if (lower_bound() > transmitted_norm_ + slack || transmitted_norm_ > upper + slack)
    throw std::logic_error("chain-rule sandwich violated: lower=" + std::to_string(lower_bound()) +
                           " transmitted=" + std::to_string(transmitted_norm_) +
                           " upper=" + std::to_string(upper));
}

nlohmann::json ChainRuleReport::to_json(bool include_matrices) const {
  nlohmann::json j{{"sigma_max", sigma_max_},
                   {"g_norm", g_norm_},
                   {"transmittance", transmittance_},
                   {"transmitted_norm", transmitted_norm_},
                   {"near_degenerate", near_degenerate_},
                   {"zero_signal", zero_signal()}};
  if (include_matrices) {
    j["u_max"] = std::vector<double>(u_max_.data(), u_max_.data() + u_max_.size());
    j["g"] = std::vector<double>(g_.data(), g_.data() + g_.size());
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < jacobian_.rows(); ++r) {
      const Eigen::VectorXd row = jacobian_.row(r).transpose();
      rows.emplace_back(row.data(), row.data() + row.size());
    }
    j["jacobian"] = rows;
  }
  return j;
}

ChainRuleReport chain_rule_decompose(Eigen::MatrixXd jacobian, Eigen::VectorXd g) {
  if (jacobian.rows() != g.size())
    throw std::invalid_argument("Jacobian rows must match the feature gradient length");
  if (jacobian.rows() == 0 || jacobian.cols() == 0)
    throw std::invalid_argument("Jacobian must be nonempty");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sigma = sv(0);
  Eigen::VectorXd u = svd.matrixU().col(0);
  // Sign convention: first non-negligible component positive.
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > 1e-12) {
      if (u(i) < 0) u = -u;
      break;
    }
  }
  const bool degenerate = sv.size() > 1 && sigma > 0.0 && (sigma - sv(1)) < kDegeneracyGap * sigma;
  const double gn = g.norm();
  const double t = gn > 0.0 ? std::min(1.0, std::abs(g.dot(u)) / gn) : 0.0;
  const double transmitted = (jacobian.transpose() * g).norm();
  return ChainRuleReport(std::move(jacobian), std::move(g), sigma, std::move(u), t, transmitted,
                         degenerate);
}

VarianceBridgeReport variance_bridge_check(std::span<const Eigen::VectorXd> gradients,
                                           std::span<const std::pair<double, double>> sigma_g) {
  if (gradients.size() < 2)
    throw std::invalid_argument("variance bridge needs at least two ensemble members");
  if (sigma_g.size() != gradients.size())
    throw std::invalid_argument("gradient and (sigma, |g|) ensembles differ in size");
  const Eigen::Index dim = gradients[0].size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& x : gradients) {
    if (x.size() != dim) throw std::invalid_argument("inconsistent gradient dimensions");
    mean += x;
  }
  const double count = static_cast<double>(gradients.size());
  mean /= count;
  VarianceBridgeReport r;
  for (const auto& x : gradients) r.trace_cov += (x - mean).squaredNorm();
  r.trace_cov /= count;
  for (const auto& [sigma, gnorm] : sigma_g) r.bound += (sigma * gnorm) * (sigma * gnorm);
  r.bound /= count;
  r.holds = r.trace_cov <= r.bound * (1.0 + kVarianceBridgeSlack);
  return r;
}

NllAmplification nll_amplification_probe(int width, int support) {
  if (width < 1) throw std::invalid_argument("interface width must be >= 1");
  if (support < 1 || support > width)
    throw std::invalid_argument("support size must satisfy 1 <= s <= N");
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(width, 1.0 / width);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(width);
  q.head(support).setConstant(1.0 / support);
  NllAmplification r;
  r.predicted = static_cast<double>(width) / std::sqrt(static_cast<double>(support));
  r.measured = feature_gradient(Head(HeadKind::Nll, q, 0.0), p).norm();
  r.linear_norm = feature_gradient(Head(HeadKind::Linear, q, 0.0), p).norm();
  return r;
}

double pbj_factor_check(std::span<const ChainRuleReport> reports, const PbjThresholds& t) {
  if (reports.empty()) throw std::invalid_argument("PB&J check needs at least one report");
  if (t.sigma < 0.0 || t.g_norm < 0.0 || t.transmittance < 0.0)
    throw std::invalid_argument("thresholds must be nonnegative");
  const auto hits = std::count_if(reports.begin(), reports.end(), [&](const ChainRuleReport& r) {
    return r.sigma_max() >= t.sigma && r.g_norm() >= t.g_norm &&
           r.transmittance() >= t.transmittance;
  });
  return static_cast<double>(hits) / static_cast<double>(reports.size());
}

}  // namespace qgt
