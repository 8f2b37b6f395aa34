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
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace qgt {

/// Engine used for every stochastic step. Streams are never shared between
/// work items; each one is seeded from derive_seed().
using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Hashes a purpose tag and a coordinate tuple into a 64-bit seed. The map is
/// a pure function of its inputs; distinct tags give independent families.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a(tag));
  for (std::uint64_t c : coords) h = detail::splitmix64(h ^ detail::splitmix64(c));
  return h;
}

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

/// FNV-1a over raw bytes; used for config and target checksums.
inline std::uint64_t checksum_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Multinomial draw of `shots` outcomes over `probs` by sequential
/// conditional binomials. Distributionally identical to drawing the shots one
/// at a time, at O(len(probs)) cost.
template <typename ProbRange>
std::vector<std::uint64_t> multinomial(const ProbRange& probs, std::uint64_t shots,
                                       Rng& rng) {
  const auto size = static_cast<std::size_t>(probs.size());
  std::vector<std::uint64_t> counts(size, 0);
  if (shots == 0) throw std::invalid_argument("multinomial: shot count must be >= 1");
  std::size_t last = size;
  double mass = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double p = probs[i];
    if (p < 0.0) throw std::invalid_argument("multinomial: negative probability");
    if (p > 0.0) last = i;
    mass += p;
  }
  if (last == size) throw std::invalid_argument("multinomial: zero total probability");

  std::uint64_t remaining = shots;
  for (std::size_t i = 0; i <= last && remaining > 0; ++i) {
    const double p = probs[i];
    if (p <= 0.0) continue;
    if (i == last || mass <= p) {
      counts[i] = remaining;
      break;
    }
    std::binomial_distribution<std::uint64_t> draw(remaining, p / mass);
    const std::uint64_t k = draw(rng);
    counts[i] = k;
    remaining -= k;
    mass -= p;
  }
  return counts;
}

}  // namespace qgt
