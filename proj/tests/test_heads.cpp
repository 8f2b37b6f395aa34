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
#include <vector>

#include "qgt/heads.hpp"
#include "qgt/random.hpp"

using namespace qgt;

namespace {

Eigen::VectorXd random_simplex(Eigen::Index m, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd p(m);
  for (auto& x : p) x = e(rng) + 0.01;
  return p / p.sum();
}

Eigen::VectorXd uniform(Eigen::Index m) { return Eigen::VectorXd::Constant(m, 1.0 / m); }

// Independent formulas on already-positive distributions.
double kl(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) > 0) s += a(i) * std::log(a(i) / b(i));
  return s;
}

double entropy(const Eigen::VectorXd& q) {
  double h = 0;
  for (double x : q)
    if (x > 0) h -= x * std::log(x);
  return h;
}

}  // namespace

TEST(Loss, LinearUniformPair) {
  for (int m : {2, 9, 81}) {
    const Head h(HeadKind::Linear, uniform(m));
    EXPECT_NEAR(loss(h, uniform(m)), -1.0 / m, 1e-15);
  }
}

TEST(Loss, JsdIdentical) {
  Rng rng = make_rng(1);
  const Eigen::VectorXd q = random_simplex(16, rng);
  EXPECT_NEAR(loss(Head(HeadKind::Jsd, q), q), 0.0, 1e-12);
}

TEST(Loss, NllAtUniformIsLogWidth) {
  Rng rng = make_rng(2);
  for (int n : {4, 81, 1000}) {
    const Head h(HeadKind::Nll, random_simplex(n, rng));
    EXPECT_NEAR(loss(h, uniform(n)), std::log(double(n)), 1e-10);
  }
}

TEST(Loss, JsdMatchesKlDefinition) {
  Rng rng = make_rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd p = random_simplex(12, rng), q = random_simplex(12, rng);
    const Eigen::VectorXd mid = (p + q) / 2;
    EXPECT_NEAR(loss(Head(HeadKind::Jsd, q), p), 0.5 * kl(p, mid) + 0.5 * kl(q, mid), 1e-10);
  }
}

TEST(Loss, LengthMismatch) {
  const Head h(HeadKind::Nll, uniform(4));
  EXPECT_THROW(loss(h, uniform(5)), std::invalid_argument);
  EXPECT_THROW(feature_gradient(h, uniform(3)), std::invalid_argument);
}

TEST(Head, RejectsInvalidTarget) {
  EXPECT_THROW(Head(HeadKind::Linear, Eigen::Vector2d(0.7, 0.7)), std::invalid_argument);
  EXPECT_THROW(Head(HeadKind::Linear, Eigen::Vector2d(1.5, -0.5)), std::invalid_argument);
}

TEST(Head, DescriptorCarriesTargetChecksum) {
  const Head a(HeadKind::Jsd, uniform(4)), b(HeadKind::Jsd, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  EXPECT_NE(a.target_checksum(), b.target_checksum());
  EXPECT_EQ(a.descriptor().at("kind"), "jsd");
  EXPECT_EQ(a.descriptor().at("target_checksum"), a.target_checksum());
}

TEST(Head, NameRoundTrip) {
  for (auto k : {HeadKind::Linear, HeadKind::Jsd, HeadKind::Nll})
    EXPECT_EQ(parse_head_kind(to_string(k)), k);
  EXPECT_THROW(parse_head_kind("mse"), std::invalid_argument);
}

TEST(Gradient, LinearIsMinusTargetExactly) {
  Rng rng = make_rng(4);
  const Eigen::VectorXd q = random_simplex(10, rng);
  const Head h(HeadKind::Linear, q);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(feature_gradient(h, random_simplex(10, rng)), -q);
}

TEST(Gradient, NllAmplificationValues) {
  const int n = 81;
  for (int s : {1, 9, 81}) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    q.head(s).setConstant(1.0 / s);
    const Head h(HeadKind::Nll, q, 0.0);
    EXPECT_NEAR(feature_gradient(h, uniform(n)).norm(), n / std::sqrt(double(s)),
                1e-9 * n / std::sqrt(double(s)));
    EXPECT_NEAR(feature_gradient(Head(HeadKind::Linear, q), uniform(n)).norm(),
                1.0 / std::sqrt(double(s)), 1e-12);
  }
}

TEST(Gradient, JsdVanishesAtTarget) {
  Rng rng = make_rng(5);
  const Eigen::VectorXd q = random_simplex(20, rng);
  EXPECT_LT(feature_gradient(Head(HeadKind::Jsd, q), q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gradient, MatchesCentralDifferencesOfLoss) {
  Rng rng = make_rng(6);
  const double step = 1e-6;
  for (int pair = 0; pair < 100; ++pair) {
    const Eigen::Index m = 3 + pair % 14;
    const Eigen::VectorXd p = random_simplex(m, rng), q = random_simplex(m, rng);
    for (auto kind : {HeadKind::Linear, HeadKind::Jsd, HeadKind::Nll}) {
      const Head h(kind, q);
      const Eigen::VectorXd g = feature_gradient(h, p);
      for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd up = p, down = p;
        up(i) += step;
        down(i) -= step;
        const double fd = (loss(h, up) - loss(h, down)) / (2 * step);
        EXPECT_NEAR(fd, g(i), 1e-5 * std::abs(g(i)) + 1e-9)
            << to_string(kind) << " pair " << pair << " coord " << i;
      }
    }
  }
}

TEST(Properties, JsdSymmetricAndNonnegative) {
  Rng rng = make_rng(7);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd p = random_simplex(8, rng), q = random_simplex(8, rng);
    const double pq = loss(Head(HeadKind::Jsd, q), p);
    const double qp = loss(Head(HeadKind::Jsd, p), q);
    EXPECT_NEAR(pq, qp, 1e-12);
    EXPECT_GT(pq, 0.0);
    EXPECT_LE(pq, std::log(2.0) + 1e-12);
  }
}

TEST(Properties, GibbsInequality) {
  Rng rng = make_rng(8);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd p = random_simplex(8, rng), q = random_simplex(8, rng);
    const Head h(HeadKind::Nll, q);
    EXPECT_GE(loss(h, p), entropy(q) - 1e-10);
    EXPECT_NEAR(loss(h, q), entropy(q), 1e-10);
  }
}

TEST(Properties, SmoothingKeepsSparseTargetsFinite) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
  q(0) = 1.0;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
  p(1) = 1.0;
  for (auto kind : {HeadKind::Jsd, HeadKind::Nll}) {
    const Head h(kind, q);
    EXPECT_TRUE(std::isfinite(loss(h, p)));
    EXPECT_TRUE(feature_gradient(h, p).allFinite());
  }
}

TEST(AffineCheck, LinearIsConsistent) {
  Rng rng = make_rng(9);
  std::vector<Eigen::VectorXd> ps;
  for (int t = 0; t < 5; ++t) ps.push_back(random_simplex(6, rng));
  const auto r = affine_constancy_check(Head(HeadKind::Linear, random_simplex(6, rng)), ps);
  EXPECT_TRUE(r.is_affine_consistent);
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(AffineCheck, NllIsNot) {
  Rng rng = make_rng(10);
  const std::vector<Eigen::VectorXd> ps{random_simplex(6, rng), random_simplex(6, rng)};
  const auto r = affine_constancy_check(Head(HeadKind::Nll, random_simplex(6, rng)), ps);
  EXPECT_FALSE(r.is_affine_consistent);
  EXPECT_GT(r.max_deviation, 0.0);
}

TEST(AffineCheck, NeedsTwoSamples) {
  const std::vector<Eigen::VectorXd> one{uniform(3)};
  EXPECT_THROW(affine_constancy_check(Head(HeadKind::Linear, uniform(3)), one),
               std::invalid_argument);
}

TEST(Lipschitz, LinearIsTargetNorm) {
  Rng rng = make_rng(11);
  const Eigen::VectorXd q = random_simplex(7, rng);
  const std::vector<Eigen::VectorXd> ps{random_simplex(7, rng), random_simplex(7, rng)};
  EXPECT_DOUBLE_EQ(lipschitz_bound_probe(Head(HeadKind::Linear, q), ps), q.norm());
}

TEST(Lipschitz, JsdBoundedNearUniform) {
  Rng rng = make_rng(12);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<Eigen::VectorXd> ps;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd p = uniform(10);
    for (auto& x : p) x *= 1 + jitter(rng);
    ps.push_back(p / p.sum());
  }
  EXPECT_LT(lipschitz_bound_probe(Head(HeadKind::Jsd, uniform(10)), ps), 1.0);
}

TEST(Lipschitz, NllGrowsAsInverseFloor) {
  const Eigen::VectorXd q = uniform(4);
  const Head h(HeadKind::Nll, q);
  double previous = 0;
  for (double floor : {1e-2, 1e-4, 1e-6}) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(4, floor);
    p(0) = 1 - 3 * floor;
    const std::vector<Eigen::VectorXd> ps{p};
    const double sup = lipschitz_bound_probe(h, ps);
    EXPECT_NEAR(sup, std::sqrt(3.0) * 0.25 / floor, 1e-3 * sup);
    EXPECT_GT(sup, previous * 50);
    previous = sup;
  }
}

TEST(Composed, ChainRuleThroughAffineTransform) {
  Rng rng = make_rng(13);
  std::normal_distribution<double> g;
  // T sums adjacent pairs of a 6-vector into a 3-vector distribution.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 6);
  for (int i = 0; i < 3; ++i) a(i, 2 * i) = a(i, 2 * i + 1) = 1.0;
  const Eigen::VectorXd q = random_simplex(3, rng);
  const ComposedHead head(a, Eigen::VectorXd::Zero(3), Head(HeadKind::Nll, q));
  const Eigen::VectorXd f = random_simplex(6, rng);
  const Eigen::VectorXd grad = head.feature_gradient(f);
  for (Eigen::Index i = 0; i < 6; ++i) {
    Eigen::VectorXd up = f, down = f;
    up(i) += 1e-6;
    down(i) -= 1e-6;
    EXPECT_NEAR((head.loss(up) - head.loss(down)) / 2e-6, grad(i), 1e-6 * std::abs(grad(i)) + 1e-9);
  }
  EXPECT_LT((grad - a.transpose() * feature_gradient(head.criterion(), a * f)).norm(), 1e-15);
}
