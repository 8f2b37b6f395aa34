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
#include "qgt/interface.hpp"

#include <bit>
#include <stdexcept>

namespace qgt {

BlockPartition BlockPartition::canonical(int n, int b) {
  if (n < 1) throw std::invalid_argument("partition needs n >= 1");
  if (b < 1 || b > n) throw std::invalid_argument("block count must satisfy 1 <= b <= n");
  BlockPartition p;
  p.num_qubits = n;
  p.sizes.assign(static_cast<std::size_t>(b), n / b);
  for (int j = 0; j < n % b; ++j) ++p.sizes[static_cast<std::size_t>(j)];
  return p;
}

int BlockPartition::offset(int j) const {
  int off = 0;
  for (int k = 0; k < j; ++k) off += sizes[static_cast<std::size_t>(k)];
  return off;
}

std::uint64_t BlockPartition::width() const {
  std::uint64_t m = 1;
  for (int s : sizes) m *= static_cast<std::uint64_t>(s + 1);
  return m;
}

std::uint64_t feature_width(int n, int b) { return BlockPartition::canonical(n, b).width(); }

std::vector<int> block_weights(std::uint64_t bitstring, const BlockPartition& partition) {
  const int n = partition.num_qubits;
  std::vector<int> w;
  w.reserve(partition.sizes.size());
  int start = 0;
  for (int size : partition.sizes) {
    // Qubits start..start+size-1 occupy bits n-start-size .. n-start-1.
    const std::uint64_t mask = ((std::uint64_t(1) << size) - 1) << (n - start - size);
    w.push_back(std::popcount(bitstring & mask));
    start += size;
  }
  return w;
}

std::uint64_t weight_tuple_index(const std::vector<int>& weights,
                                 const BlockPartition& partition) {
  if (weights.size() != partition.sizes.size())
    throw std::invalid_argument("weight tuple length differs from block count");
  std::uint64_t index = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const int radix = partition.sizes[j] + 1;
    if (weights[j] < 0 || weights[j] >= radix)
      throw std::invalid_argument("block weight out of range");
    index = index * static_cast<std::uint64_t>(radix) + static_cast<std::uint64_t>(weights[j]);
  }
  return index;
}

std::vector<int> weight_tuple_from_index(std::uint64_t index,
                                         const BlockPartition& partition) {
  std::vector<int> w(partition.sizes.size());
  for (std::size_t j = w.size(); j-- > 0;) {
    const auto radix = static_cast<std::uint64_t>(partition.sizes[j] + 1);
    w[j] = static_cast<int>(index % radix);
    index /= radix;
  }
  return w;
}

FeatureMap::FeatureMap(InterfaceKind kind, BlockPartition partition)
    : kind_(kind), partition_(std::move(partition)) {
  const int n = partition_.num_qubits;
  if (n > kMaxQubits) throw std::invalid_argument("interface qubit count too large");
  const std::uint64_t dim = std::uint64_t(1) << n;
  width_ = static_cast<Eigen::Index>(partition_.width());
  lookup_.resize(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    lookup_[x] = kind_ == InterfaceKind::FullDistribution
                     ? static_cast<std::uint32_t>(x)
                     : static_cast<std::uint32_t>(
                           weight_tuple_index(qgt::block_weights(x, partition_), partition_));
  }
}

FeatureMap FeatureMap::block_weights(int n, int b) {
  return FeatureMap(InterfaceKind::BlockWeights, BlockPartition::canonical(n, b));
}

FeatureMap FeatureMap::full_distribution(int n) {
  return FeatureMap(InterfaceKind::FullDistribution, BlockPartition::canonical(n, n));
}

std::string FeatureMap::id() const {
  if (kind_ == InterfaceKind::FullDistribution)
    return "full:n=" + std::to_string(num_qubits());
  return "block:n=" + std::to_string(num_qubits()) + ",b=" +
         std::to_string(partition_.num_blocks());
}

Eigen::VectorXd FeatureMap::pushforward(const Eigen::Ref<const Eigen::VectorXd>& basis_probs) const {
  if (static_cast<std::size_t>(basis_probs.size()) != lookup_.size())
    throw std::invalid_argument("basis distribution length must be 2^n");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(width_);
  for (std::size_t x = 0; x < lookup_.size(); ++x)
    f(lookup_[x]) += basis_probs(static_cast<Eigen::Index>(x));
  return f;
}

nlohmann::json FeatureMap::descriptor() const {
  return {{"id", id()},
          {"kind", kind_ == InterfaceKind::FullDistribution ? "full" : "block_weights"},
          {"n", num_qubits()},
          {"b", partition_.num_blocks()},
          {"block_sizes", partition_.sizes},
          {"width", width_},
          {"indexing", kind_ == InterfaceKind::FullDistribution
                           ? "basis index, qubit 0 most significant"
                           : "mixed radix, w_1 most significant"}};
}

Eigen::VectorXd resample(const Eigen::Ref<const Eigen::VectorXd>& exact, std::uint64_t shots,
                         Rng& rng) {
  if (shots < 1) throw std::invalid_argument("resample: shot count must be >= 1");
  const std::vector<std::uint64_t> counts = multinomial(exact, shots, rng);
  Eigen::VectorXd v(exact.size());
  const double inv = 1.0 / static_cast<double>(shots);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) * inv;
  return v;
}

Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("smoothing constant must be positive");
  const double m = static_cast<double>(p.size());
  return (p.array() + eps) / (1.0 + m * eps);
}

FeatureVector smooth(const FeatureVector& dist, double eps) {
  return {dist.interface_id, smooth(dist.values, eps)};
}

nlohmann::json to_json(const FeatureVector& features, const FeatureMap& map) {
  if (features.values.size() != map.width())
    throw std::invalid_argument("feature vector width differs from interface");
  std::vector<double> values(features.values.data(),
                             features.values.data() + features.values.size());
  return {{"interface", map.descriptor()}, {"values", values}};
}

}  // namespace qgt
