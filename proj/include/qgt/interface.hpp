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

// Measurement interfaces: maps from computational-basis outcomes to feature
// indices. Both shipped interfaces expose full probability distributions, so
// F_j(rho) = tr(rho Pi_j) with Pi_j the projector onto the outcomes that land
// in feature j.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "qgt/qsim.hpp"

namespace qgt {

/// Contiguous blocks covering qubits 0..n-1. When b does not divide n the
/// first (n mod b) blocks carry one extra qubit.
struct BlockPartition {
  int num_qubits = 0;
  std::vector<int> sizes;

  static BlockPartition canonical(int n, int b);

  int num_blocks() const { return static_cast<int>(sizes.size()); }
  /// First qubit of block j.
  int offset(int j) const;
  /// prod_j (|B_j| + 1).
  std::uint64_t width() const;
};

/// prod_j (|B_j| + 1) for the canonical partition.
std::uint64_t feature_width(int n, int b);

/// Popcount of each block of `bitstring` (an n-bit basis index).
std::vector<int> block_weights(std::uint64_t bitstring, const BlockPartition& partition);

/// Mixed-radix index of a weight tuple, w_1 most significant.
std::uint64_t weight_tuple_index(const std::vector<int>& weights,
                                 const BlockPartition& partition);
std::vector<int> weight_tuple_from_index(std::uint64_t index,
                                         const BlockPartition& partition);

enum class InterfaceKind { BlockWeights, FullDistribution };

class FeatureMap {
 public:
  static FeatureMap block_weights(int n, int b);
  /// Identity map onto all 2^n outcomes (m = 2^n stress case).
  static FeatureMap full_distribution(int n);

  InterfaceKind kind() const { return kind_; }
  int num_qubits() const { return partition_.num_qubits; }
  const BlockPartition& partition() const { return partition_; }
  Eigen::Index width() const { return width_; }
  std::string id() const;

  Eigen::Index feature_index(std::uint64_t basis) const {
    return static_cast<Eigen::Index>(lookup_[basis]);
  }

  /// Pushes a distribution over the 2^n basis states onto the features.
  Eigen::VectorXd pushforward(const Eigen::Ref<const Eigen::VectorXd>& basis_probs) const;

  /// (n, b, block sizes, width, indexing order).
  nlohmann::json descriptor() const;

 private:
  FeatureMap(InterfaceKind kind, BlockPartition partition);

  InterfaceKind kind_;
  BlockPartition partition_;
  Eigen::Index width_;
  std::vector<std::uint32_t> lookup_;
};

struct FeatureVector {
  std::string interface_id;
  Eigen::VectorXd values;
};

template <typename Scalar>
FeatureVector exact_features(const BasicState<Scalar>& state, const FeatureMap& map) {
  if (state.num_qubits() != map.num_qubits())
    throw std::invalid_argument("state and interface qubit counts differ");
  return {map.id(), map.pushforward(state.probabilities().template cast<double>())};
}

/// Empirical features of `shots` computational-basis measurements.
template <typename Scalar>
FeatureVector sampled_features(const BasicState<Scalar>& state, const FeatureMap& map,
                               std::uint64_t shots, Rng& rng) {
  if (state.num_qubits() != map.num_qubits())
    throw std::invalid_argument("state and interface qubit counts differ");
  const Histogram h = sample(state, shots, rng);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(map.width());
  for (const auto& [basis, count] : h) v(map.feature_index(basis)) += static_cast<double>(count);
  return {map.id(), v / static_cast<double>(shots)};
}

/// Empirical distribution of `shots` draws from an exact feature
/// distribution. Same law as sampled_features on the underlying state.
Eigen::VectorXd resample(const Eigen::Ref<const Eigen::VectorXd>& exact, std::uint64_t shots,
                         Rng& rng);

/// (p + eps) / (1 + m eps).
Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& p, double eps);
FeatureVector smooth(const FeatureVector& dist, double eps);

/// Interface header followed by the flat value array.
nlohmann::json to_json(const FeatureVector& features, const FeatureMap& map);

}  // namespace qgt
