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
#include "qgt/shots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qgt {

ShotEstimate finite_shot_gradient(const ShiftedFeatures& exact, const Head& head,
                                  std::uint64_t shots, Rng& rng, bool with_decomposition) {
  if (shots < 1) throw std::invalid_argument("shot budget must be >= 1");
  const Eigen::Index s = exact.plus.cols();
  Eigen::MatrixXd jac(exact.plus.rows(), s);
  for (Eigen::Index k = 0; k < s; ++k) {
    const Eigen::VectorXd up = resample(exact.plus.col(k), shots, rng);
    const Eigen::VectorXd down = resample(exact.minus.col(k), shots, rng);
    jac.col(k) = (up - down) / 2.0;
  }
  const Eigen::VectorXd base = resample(exact.base, shots, rng);
  const Eigen::VectorXd g = feature_gradient(head, base);
  ShotEstimate e;
  e.shots = shots;
  e.value = jac.transpose() * g;
  e.feature_grad_norm = g.norm();
  if (with_decomposition) {
    const ChainRuleReport r = chain_rule_decompose(std::move(jac), g);
    e.sigma_max = r.sigma_max();
    e.transmittance = r.transmittance();
  }
  return e;
}

ShotEstimate finite_shot_gradient(const ParamCircuit& circuit, const QuantumState& input,
                                  const Eigen::VectorXd& theta, const FeatureMap& map,
                                  const Head& head, std::span<const int> subspace,
                                  std::uint64_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("shot budget must be >= 1");
  return finite_shot_gradient(shifted_features(circuit, input, theta, map, subspace), head, shots,
                              rng);
}

namespace {

Snr ratio(double signal, double noise_var) {
  if (noise_var == 0.0) return signal == 0.0 ? Snr{0.0, false} : Snr::inf();
  return {signal / std::sqrt(noise_var), false};
}

template <typename Fn>
std::map<int, std::vector<const ShotEstimate*>> group_by_circuit(
    std::span<const ShotEstimate> estimates, Fn&& check) {
  std::map<int, std::vector<const ShotEstimate*>> groups;
  for (const auto& e : estimates) {
    check(e);
    groups[e.circuit_id].push_back(&e);
  }
  return groups;
}

}  // namespace

Snr snr_single(std::span<const double> repetitions) {
  const std::size_t r = repetitions.size();
  if (r < 2) throw std::invalid_argument("SNR needs at least two repetitions");
  double mean = 0.0;
  for (double x : repetitions) mean += x;
  mean /= static_cast<double>(r);
  double var = 0.0;
  for (double x : repetitions) var += (x - mean) * (x - mean);
  var /= static_cast<double>(r - 1);
  return ratio(std::abs(mean), var);
}

Snr snr_multi(std::span<const Eigen::VectorXd> repetitions) {
  const std::size_t r = repetitions.size();
  if (r < 2) throw std::invalid_argument("SNR needs at least two repetitions");
  const Eigen::Index dim = repetitions[0].size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& x : repetitions) {
    if (x.size() != dim) throw std::invalid_argument("repetition vectors differ in length");
    mean += x;
  }
  mean /= static_cast<double>(r);
  double var = 0.0;
  for (const auto& x : repetitions) var += (x - mean).squaredNorm();
  var /= static_cast<double>(r - 1);
  return ratio(mean.norm(), var);
}

Snr median(std::vector<Snr> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  const Snr& lo = values[mid - 1];
  const Snr& hi = values[mid];
  if (lo.infinite || hi.infinite) return Snr::inf();
  return {0.5 * (lo.value + hi.value), false};
}

Snr med_snr_single(std::span<const ShotEstimate> estimates) {
  const auto groups = group_by_circuit(estimates, [](const ShotEstimate& e) {
    if (e.value.size() != 1)
      throw std::invalid_argument("single-parameter estimates must be scalar");
  });
  if (groups.empty()) throw std::invalid_argument("no estimates");
  std::vector<Snr> snrs;
  for (const auto& [id, reps] : groups) {
    std::vector<double> xs;
    for (const auto* e : reps) xs.push_back(e->value(0));
    snrs.push_back(snr_single(xs));
  }
  return median(std::move(snrs));
}

Snr med_snr_multi(std::span<const ShotEstimate> estimates) {
  const auto groups = group_by_circuit(estimates, [](const ShotEstimate&) {});
  if (groups.empty()) throw std::invalid_argument("no estimates");
  std::vector<Snr> snrs;
  for (const auto& [id, reps] : groups) {
    std::vector<Eigen::VectorXd> xs;
    for (const auto* e : reps) xs.push_back(e->value);
    snrs.push_back(snr_multi(xs));
  }
  return median(std::move(snrs));
}

double rel_bias(const Eigen::Ref<const Eigen::VectorXd>& mean,
                const Eigen::Ref<const Eigen::VectorXd>& exact, double eps_stab) {
  if (mean.size() != exact.size())
    throw std::invalid_argument("estimate and exact gradient dimensions differ");
  return (mean - exact).norm() / (exact.norm() + eps_stab);
}

double med_rel_bias(std::span<const ShotEstimate> estimates,
                    const std::map<int, Eigen::VectorXd>& exact, double eps_stab) {
  const auto groups = group_by_circuit(estimates, [](const ShotEstimate&) {});
  if (groups.empty()) throw std::invalid_argument("no estimates");
  std::vector<double> biases;
  for (const auto& [id, reps] : groups) {
    const auto it = exact.find(id);
    if (it == exact.end())
      throw std::invalid_argument("no exact gradient for circuit " + std::to_string(id));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(reps.front()->value.size());
    for (const auto* e : reps) {
      if (e->value.size() != mean.size())
        throw std::invalid_argument("repetition vectors differ in length");
      mean += e->value;
    }
    mean /= static_cast<double>(reps.size());
    biases.push_back(rel_bias(mean, it->second, eps_stab));
  }
  return median(std::move(biases));
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return values[lo];
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::string to_string(ProbeKind kind) { return kind == ProbeKind::Single ? "single" : "multi"; }

ProbeKind parse_probe_kind(const std::string& name) {
  if (name == "single") return ProbeKind::Single;
  if (name == "multi") return ProbeKind::Multi;
  throw std::invalid_argument("unknown probe kind '" + name + "'");
}

FrontierResult frontier_search(ProbeKind probe, int n, HeadKind head, std::vector<GridPoint> grid,
                               double kappa, double tau) {
  if (grid.empty()) throw std::invalid_argument("frontier search needs a nonempty shot grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i].shots <= grid[i - 1].shots)
      throw std::invalid_argument("shot grid must be strictly increasing");
  FrontierResult r;
  r.n = n;
  r.head = head;
  r.probe = probe;
  r.kappa = kappa;
  r.tau = tau;
  for (const auto& pt : grid) {
    bool ok = pt.med_snr >= kappa;
    if (probe == ProbeKind::Multi) {
      if (!pt.med_rel_bias)
        throw std::invalid_argument("multi-parameter frontier needs MedRelBias at every grid point");
      ok = ok && *pt.med_rel_bias <= tau;
    }
    if (ok) {
      r.m_star = pt.shots;
      break;
    }
  }
  r.grid = std::move(grid);
  return r;
}

std::vector<std::uint64_t> power_of_two_grid(int lo, int hi) {
  if (lo < 0 || hi < lo || hi > 62) throw std::invalid_argument("bad power-of-two grid bounds");
  std::vector<std::uint64_t> grid;
  for (int k = lo; k <= hi; ++k) grid.push_back(std::uint64_t(1) << k);
  return grid;
}

std::vector<RidgelineRow> export_ridgeline(std::span<const ShotEstimate> estimates) {
  if (estimates.empty()) throw std::invalid_argument("ridgeline export needs estimates");
  std::vector<RidgelineRow> rows;
  rows.reserve(estimates.size());
  for (const auto& e : estimates)
    rows.push_back({e.circuit_id, e.repetition, e.shots, std::log10(e.feature_grad_norm),
                    std::log10(e.value.norm())});
  return rows;
}

}  // namespace qgt
