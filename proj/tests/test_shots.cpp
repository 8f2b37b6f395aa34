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
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qgt/shots.hpp"

using namespace qgt;

namespace {

std::vector<int> all_params(const ParamCircuit& c) {
  std::vector<int> s(static_cast<std::size_t>(c.num_params));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

ShotEstimate scalar_estimate(int circuit, int rep, double v) {
  ShotEstimate e;
  e.circuit_id = circuit;
  e.repetition = rep;
  e.shots = 1;
  e.value = Eigen::VectorXd::Constant(1, v);
  return e;
}

ShotEstimate vector_estimate(int circuit, int rep, Eigen::VectorXd v) {
  ShotEstimate e;
  e.circuit_id = circuit;
  e.repetition = rep;
  e.shots = 1;
  e.value = std::move(v);
  return e;
}

std::vector<GridPoint> snr_curve(std::initializer_list<std::pair<std::uint64_t, double>> pts) {
  std::vector<GridPoint> g;
  for (auto [m, s] : pts) g.push_back({m, Snr{s, false}, std::nullopt});
  return g;
}

}  // namespace

TEST(FiniteShot, ConvergesToExactGradient) {
  const int n = 4;
  const ParamCircuit c = build_student(n, 2);
  const Eigen::VectorXd theta = initial_parameters(c, 21);
  const FeatureMap map = FeatureMap::block_weights(n, 2);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(map.width(), 1.0, 2.0).normalized().cwiseAbs2();
  for (auto kind : {HeadKind::Linear, HeadKind::Jsd}) {
    const Head head(kind, q);
    const auto s = all_params(c);
    const Eigen::VectorXd exact = loss_gradient_exact(c, QuantumState(n), theta, map, head, s);
    Rng rng = make_rng(22);
    const ShotEstimate e = finite_shot_gradient(c, QuantumState(n), theta, map, head, s, 1'000'000, rng);
    EXPECT_LT((e.value - exact).norm(), 1e-2 * exact.norm()) << to_string(kind);
  }
}

TEST(FiniteShot, PointMassFeaturesHaveNoNoise) {
  ParamCircuit c;
  c.num_qubits = 3;
  c.num_params = 3;
  for (int q = 0; q < 3; ++q) c.gates.push_back(Gate::rotation(Pauli::Z, q, q));
  const FeatureMap map = FeatureMap::block_weights(3, 3);
  const Head head(HeadKind::Nll, Eigen::VectorXd::Constant(map.width(), 1.0 / map.width()));
  const ShiftedFeatures sf =
      shifted_features(c, QuantumState(3), Eigen::Vector3d(0.3, 1.1, -2.0), map, all_params(c));
  std::vector<ShotEstimate> reps;
  Rng rng = make_rng(23);
  for (int r = 0; r < 5; ++r) {
    reps.push_back(finite_shot_gradient(sf, head, 64, rng));
    reps.back().repetition = r;
    EXPECT_EQ(reps.back().value, reps.front().value);
  }
  EXPECT_EQ(reps.front().value.norm(), 0.0);
  const Snr snr = med_snr_multi(reps);
  EXPECT_FALSE(snr.infinite);
  EXPECT_EQ(snr.value, 0.0);
}

TEST(FiniteShot, Deterministic) {
  const ParamCircuit c = build_student(4, 1);
  const Eigen::VectorXd theta = initial_parameters(c, 24);
  const FeatureMap map = FeatureMap::block_weights(4, 2);
  const Head head(HeadKind::Nll, Eigen::VectorXd::Constant(map.width(), 1.0 / map.width()));
  const auto s = all_params(c);
  Rng a = make_rng(derive_seed(5, "shots", {3, 4})), b = make_rng(derive_seed(5, "shots", {3, 4}));
  const ShotEstimate x = finite_shot_gradient(c, QuantumState(4), theta, map, head, s, 500, a);
  const ShotEstimate y = finite_shot_gradient(c, QuantumState(4), theta, map, head, s, 500, b);
  EXPECT_EQ(x.value, y.value);
  EXPECT_EQ(x.feature_grad_norm, y.feature_grad_norm);
}

TEST(FiniteShot, RejectsZeroShots) {
  const ParamCircuit c = build_student(2, 1);
  const FeatureMap map = FeatureMap::block_weights(2, 1);
  const Head head(HeadKind::Linear, Eigen::VectorXd::Constant(map.width(), 1.0 / map.width()));
  Rng rng = make_rng(1);
  EXPECT_THROW(finite_shot_gradient(c, QuantumState(2), initial_parameters(c, 1), map, head,
                                    all_params(c), 0, rng),
               std::invalid_argument);
}

TEST(FiniteShot, DecompositionFactorsMatchTransmittedNorm) {
  const ParamCircuit c = build_student(4, 2);
  const FeatureMap map = FeatureMap::block_weights(4, 2);
  const Head head(HeadKind::Jsd, Eigen::VectorXd::Constant(map.width(), 1.0 / map.width()));
  const ShiftedFeatures sf = shifted_features(c, QuantumState(4), initial_parameters(c, 25), map,
                                              SubspaceSketch::draw(c.num_params, 6, 25).indices);
  Rng rng = make_rng(26);
  const ShotEstimate e = finite_shot_gradient(sf, head, 2048, rng, true);
  ASSERT_TRUE(e.sigma_max && e.transmittance);
  EXPECT_LE(*e.sigma_max * *e.transmittance * e.feature_grad_norm, e.value.norm() * (1 + 1e-9));
  EXPECT_LE(e.value.norm(), *e.sigma_max * e.feature_grad_norm * (1 + 1e-9));
}

TEST(Snr, SingleExamples) {
  EXPECT_EQ(snr_single(std::vector<double>{1, -1}).value, 0.0);
  EXPECT_FALSE(snr_single(std::vector<double>{1, -1}).infinite);
  EXPECT_TRUE(snr_single(std::vector<double>{2, 2, 2}).infinite);
  EXPECT_EQ(snr_single(std::vector<double>{0, 0}).value, 0.0);
  EXPECT_FALSE(snr_single(std::vector<double>{0, 0}).infinite);
  // mean 2, sample variance 1
  EXPECT_NEAR(snr_single(std::vector<double>{1, 2, 3}).value, 2.0, 1e-15);
  EXPECT_THROW(snr_single(std::vector<double>{1}), std::invalid_argument);
}

TEST(Snr, MedianOverCircuits) {
  std::vector<ShotEstimate> es;
  // circuit SNRs: 0.5, 2.0, 7.0 (mean/sample-std with two reps: |a+b|/|a-b|*sqrt(2)/... built directly)
  const std::vector<double> target{0.5, 2.0, 7.0};
  for (int c = 0; c < 3; ++c) {
    // reps m-d, m+d have sample std d*sqrt(2); choose d = 1/sqrt(2) so SNR = m.
    const double d = 1 / std::sqrt(2.0);
    es.push_back(scalar_estimate(c, 0, target[std::size_t(c)] - d));
    es.push_back(scalar_estimate(c, 1, target[std::size_t(c)] + d));
  }
  EXPECT_NEAR(med_snr_single(es).value, 2.0, 1e-12);
  EXPECT_EQ(median(std::vector<Snr>{{0.5, false}, {2.0, false}, {7.0, false}}).value, 2.0);
}

TEST(Snr, InfiniteSortsAboveFinite) {
  const Snr m = median({Snr::inf(), {1.0, false}, {3.0, false}});
  EXPECT_FALSE(m.infinite);
  EXPECT_EQ(m.value, 3.0);
  EXPECT_TRUE(median({Snr::inf(), Snr::inf(), {3.0, false}}).infinite);
  EXPECT_TRUE(Snr::inf() >= 1e300);
  EXPECT_TRUE(std::isinf(Snr::inf().as_double()));
}

TEST(Snr, MultiExamples) {
  const std::vector<Eigen::VectorXd> same(3, Eigen::Vector2d(0.3, -1));
  EXPECT_TRUE(snr_multi(same).infinite);
  const std::vector<Eigen::VectorXd> pm{Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)};
  EXPECT_EQ(snr_multi(pm).value, 0.0);
  const std::vector<Eigen::VectorXd> ragged{Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)};
  EXPECT_THROW(snr_multi(ragged), std::invalid_argument);
}

TEST(Snr, MultiHandFixture) {
  // Circuit 0: mean (2,1), summed sample variance 8/2 = 4 -> sqrt(5)/2.
  // Circuit 1: mean (1,2), summed sample variance 6/2 = 3 -> sqrt(5)/sqrt(3).
  std::vector<ShotEstimate> es{
      vector_estimate(0, 0, Eigen::Vector2d(1, 0)), vector_estimate(0, 1, Eigen::Vector2d(3, 0)),
      vector_estimate(0, 2, Eigen::Vector2d(2, 3)), vector_estimate(1, 0, Eigen::Vector2d(1, 1)),
      vector_estimate(1, 1, Eigen::Vector2d(1, 1)), vector_estimate(1, 2, Eigen::Vector2d(1, 4))};
  const double expected = 0.5 * (std::sqrt(5.0) / 2 + std::sqrt(5.0) / std::sqrt(3.0));
  EXPECT_NEAR(med_snr_multi(es).value, expected, 1e-12);
}

TEST(Snr, GrowsAsSquareRootOfShots) {
  const int n = 4;
  const ParamCircuit c = build_student(n, 2);
  const FeatureMap map = FeatureMap::block_weights(n, 2);
  const Head head(HeadKind::Linear, Eigen::VectorXd::LinSpaced(map.width(), 0.0, 1.0) /
                                        (0.5 * double(map.width())));
  // Coordinate with a clearly nonzero exact gradient.
  const Eigen::VectorXd theta = initial_parameters(c, 27);
  const Eigen::VectorXd g = loss_gradient_exact(c, QuantumState(n), theta, map, head, all_params(c));
  Eigen::Index k = 0;
  g.cwiseAbs().maxCoeff(&k);
  const std::vector<int> s{int(k)};
  const ShiftedFeatures sf = shifted_features(c, QuantumState(n), theta, map, s);
  std::vector<double> log_m, log_snr;
  for (std::uint64_t m = 64; m <= 16384; m *= 4) {
    std::vector<double> reps;
    for (int r = 0; r < 400; ++r) {
      Rng rng = make_rng(derive_seed(28, "slope", {m, std::uint64_t(r)}));
      reps.push_back(finite_shot_gradient(sf, head, m, rng).value(0));
    }
    log_m.push_back(std::log(double(m)));
    log_snr.push_back(std::log(snr_single(reps).value));
  }
  const double mx = std::accumulate(log_m.begin(), log_m.end(), 0.0) / double(log_m.size());
  const double my = std::accumulate(log_snr.begin(), log_snr.end(), 0.0) / double(log_snr.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < log_m.size(); ++i) {
    sxy += (log_m[i] - mx) * (log_snr[i] - my);
    sxx += (log_m[i] - mx) * (log_m[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, 0.5, 0.1);
}

TEST(RelBias, Examples) {
  const Eigen::Vector3d g(1, -2, 0.5);
  EXPECT_EQ(rel_bias(g, g, kRelBiasStabilizer), 0.0);
  EXPECT_NEAR(rel_bias(2 * g, g, kRelBiasStabilizer), 1.0, 1e-11);
  EXPECT_EQ(rel_bias(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), kRelBiasStabilizer), 0.0);
  EXPECT_THROW(rel_bias(Eigen::Vector2d(1, 0), g, kRelBiasStabilizer), std::invalid_argument);
}

TEST(RelBias, MedianOverCircuitsUsesRepetitionMean) {
  std::vector<ShotEstimate> es{vector_estimate(0, 0, Eigen::Vector2d(0, 0)),
                               vector_estimate(0, 1, Eigen::Vector2d(2, 0)),
                               vector_estimate(1, 0, Eigen::Vector2d(3, 0)),
                               vector_estimate(1, 1, Eigen::Vector2d(3, 0)),
                               vector_estimate(2, 0, Eigen::Vector2d(0, 1)),
                               vector_estimate(2, 1, Eigen::Vector2d(0, 1))};
  const std::map<int, Eigen::VectorXd> exact{
      {0, Eigen::Vector2d(1, 0)}, {1, Eigen::Vector2d(1, 0)}, {2, Eigen::Vector2d(1, 0)}};
  // Biases: 0, 2, sqrt(2).
  EXPECT_NEAR(med_rel_bias(es, exact), std::sqrt(2.0), 1e-11);
  EXPECT_THROW(med_rel_bias(es, {{0, Eigen::Vector2d(1, 0)}}), std::invalid_argument);
}

TEST(Quantiles, LinearInterpolation) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(quantile({0.0, 10.0}, 0.25), 2.5);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile({1.0}, 1.5), std::invalid_argument);
}

TEST(Frontier, Examples) {
  const auto r = frontier_search(ProbeKind::Single, 8, HeadKind::Linear,
                                 snr_curve({{128, 1.1}, {256, 1.8}, {512, 2.3}}));
  ASSERT_TRUE(r.attained());
  EXPECT_EQ(*r.m_star, 512u);
  EXPECT_EQ(r.grid.size(), 3u);
  const auto zero = frontier_search(ProbeKind::Single, 8, HeadKind::Linear,
                                    snr_curve({{128, 0.0}, {256, 1.8}}), 0.0);
  EXPECT_EQ(*zero.m_star, 128u);
  const auto none = frontier_search(ProbeKind::Single, 8, HeadKind::Nll,
                                    snr_curve({{128, 0.1}, {256, 0.2}}));
  EXPECT_FALSE(none.attained());
}

TEST(Frontier, InvalidGrids) {
  EXPECT_THROW(frontier_search(ProbeKind::Single, 8, HeadKind::Linear, {}), std::invalid_argument);
  EXPECT_THROW(frontier_search(ProbeKind::Single, 8, HeadKind::Linear,
                               snr_curve({{256, 1.0}, {256, 3.0}})),
               std::invalid_argument);
  EXPECT_THROW(frontier_search(ProbeKind::Multi, 8, HeadKind::Linear, snr_curve({{256, 3.0}})),
               std::invalid_argument);
}

TEST(Frontier, MultiNeedsBothCriteria) {
  std::vector<GridPoint> g{{128, Snr{3.0, false}, 0.9},
                           {256, Snr{1.0, false}, 0.1},
                           {512, Snr{2.5, false}, 0.4}};
  EXPECT_EQ(*frontier_search(ProbeKind::Multi, 8, HeadKind::Jsd, g).m_star, 512u);
  EXPECT_EQ(*frontier_search(ProbeKind::Single, 8, HeadKind::Jsd, g).m_star, 128u);
  g[2].med_snr = Snr::inf();
  g[2].med_rel_bias = 0.6;
  EXPECT_FALSE(frontier_search(ProbeKind::Multi, 8, HeadKind::Jsd, g).attained());
}

TEST(Frontier, NeverSkipsAFailingBudgetOnMonotoneCurves) {
  Rng rng = make_rng(29);
  std::uniform_real_distribution<double> step(0.0, 0.8);
  for (int t = 0; t < 200; ++t) {
    std::vector<GridPoint> g;
    double s = 0;
    for (std::uint64_t m : power_of_two_grid(7, 14)) {
      s += step(rng);
      g.push_back({m, Snr{s, false}, std::nullopt});
    }
    const auto r = frontier_search(ProbeKind::Single, 8, HeadKind::Linear, g);
    for (const auto& pt : g) {
      if (r.attained() && pt.shots < *r.m_star) EXPECT_LT(pt.med_snr.value, kDefaultKappa);
      if (r.attained() && pt.shots >= *r.m_star) EXPECT_GE(pt.med_snr.value, kDefaultKappa);
      if (!r.attained()) EXPECT_LT(pt.med_snr.value, kDefaultKappa);
    }
  }
}

TEST(Frontier, DefaultGrid) {
  const auto g = power_of_two_grid();
  EXPECT_EQ(g.size(), 14u);
  EXPECT_EQ(g.front(), 128u);
  EXPECT_EQ(g.back(), 1u << 20);
}

TEST(Ridgeline, RowsAndDecades) {
  ShotEstimate e = vector_estimate(3, 0, Eigen::Vector2d(0, 0.01));
  e.feature_grad_norm = 100.0;
  const std::vector<ShotEstimate> one{e};
  const auto rows = export_ridgeline(one);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].circuit_id, 3);
  EXPECT_NEAR(rows[0].log10_feature_grad, 2.0, 1e-15);
  EXPECT_NEAR(rows[0].log10_transmitted, -2.0, 1e-15);
  std::vector<ShotEstimate> span;
  for (int r = 0; r < 5; ++r) {
    ShotEstimate x = vector_estimate(0, r, Eigen::VectorXd::Constant(1, std::pow(10.0, -r)));
    x.feature_grad_norm = std::pow(10.0, r);
    span.push_back(x);
  }
  const auto wide = export_ridgeline(span);
  EXPECT_NEAR(wide.front().log10_transmitted - wide.back().log10_transmitted, 4.0, 1e-12);
  EXPECT_NEAR(wide.back().log10_feature_grad - wide.front().log10_feature_grad, 4.0, 1e-12);
  EXPECT_THROW(export_ridgeline(std::vector<ShotEstimate>{}), std::invalid_argument);
}
