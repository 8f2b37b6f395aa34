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
#include "qgt/heads.hpp"

#include <cmath>
#include <stdexcept>

#include "qgt/interface.hpp"
#include "qgt/random.hpp"

namespace qgt {

namespace {

Eigen::VectorXd maybe_smooth(const Eigen::Ref<const Eigen::VectorXd>& p, double eps) {
  return eps > 0.0 ? smooth(p, eps) : Eigen::VectorXd(p);
}

void check_width(const Head& head, const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != head.width())
    throw std::invalid_argument("feature vector length differs from head target");
}

}  // namespace

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::Linear: return "linear";
    case HeadKind::Jsd: return "jsd";
    case HeadKind::Nll: return "nll";
  }
  return "?";
}

HeadKind parse_head_kind(const std::string& name) {
  if (name == "linear") return HeadKind::Linear;
  if (name == "jsd") return HeadKind::Jsd;
  if (name == "nll") return HeadKind::Nll;
  throw std::invalid_argument("unknown head kind '" + name + "'");
}

Head::Head(HeadKind kind, Eigen::VectorXd target, double eps)
    : kind_(kind), target_(std::move(target)), eps_(eps) {
  if (target_.size() == 0) throw std::invalid_argument("head target must be nonempty");
  if (eps_ < 0.0) throw std::invalid_argument("smoothing constant must be nonnegative");
  if ((target_.array() < 0.0).any())
    throw std::invalid_argument("head target must be nonnegative");
  if (std::abs(target_.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("head target must sum to 1");
  smoothed_target_ = maybe_smooth(target_, eps_);
}

std::uint64_t Head::target_checksum() const {
  return checksum_bytes(target_.data(), sizeof(double) * static_cast<std::size_t>(target_.size()));
}

nlohmann::json Head::descriptor() const {
  return {{"kind", to_string(kind_)},
          {"epsilon", eps_},
          {"width", target_.size()},
          {"target_checksum", target_checksum()}};
}

double loss(const Head& head, const Eigen::Ref<const Eigen::VectorXd>& p) {
  check_width(head, p);
  switch (head.kind_) {
    case HeadKind::Linear:
      return -head.target_.dot(p);
    case HeadKind::Jsd: {
      const Eigen::ArrayXd ps = maybe_smooth(p, head.eps_).array();
      const Eigen::ArrayXd qs = head.smoothed_target_.array();
      const Eigen::ArrayXd mid = 0.5 * (ps + qs);
      // x log(x / mid) with the 0 log 0 = 0 convention for eps == 0.
      const Eigen::ArrayXd kp = (ps > 0.0).select(ps * (ps / mid).log(), 0.0);
      const Eigen::ArrayXd kq = (qs > 0.0).select(qs * (qs / mid).log(), 0.0);
      return 0.5 * kp.sum() + 0.5 * kq.sum();
    }
    case HeadKind::Nll: {
      const Eigen::ArrayXd ps = maybe_smooth(p, head.eps_).array();
      const Eigen::ArrayXd qs = head.smoothed_target_.array();
      return -(qs > 0.0).select(qs * ps.log(), 0.0).sum();
    }
  }
  return 0.0;
}

Eigen::VectorXd feature_gradient(const Head& head, const Eigen::Ref<const Eigen::VectorXd>& p) {
  check_width(head, p);
  switch (head.kind_) {
    case HeadKind::Linear:
      return -head.target_;
    case HeadKind::Jsd: {
      const Eigen::ArrayXd ps = maybe_smooth(p, head.eps_).array();
      const Eigen::ArrayXd mid = 0.5 * (ps + head.smoothed_target_.array());
      return (0.5 * (ps / mid).log()).matrix();
    }
    case HeadKind::Nll: {
      const Eigen::ArrayXd ps = maybe_smooth(p, head.eps_).array();
      return (-head.smoothed_target_.array() / ps).matrix();
    }
  }
  return {};
}

ComposedHead::ComposedHead(Eigen::MatrixXd transform, Eigen::VectorXd offset, Head criterion)
    : transform_(std::move(transform)), offset_(std::move(offset)), criterion_(std::move(criterion)) {
  if (transform_.rows() != offset_.size() || transform_.rows() != criterion_.width())
    throw std::invalid_argument("transform output width must match the criterion head");
}

Eigen::VectorXd ComposedHead::transform(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  if (features.size() != transform_.cols())
    throw std::invalid_argument("feature vector length differs from transform input");
  return transform_ * features + offset_;
}

double ComposedHead::loss(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  return qgt::loss(criterion_, transform(features));
}

Eigen::VectorXd ComposedHead::feature_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& features) const {
  return transform_.transpose() * qgt::feature_gradient(criterion_, transform(features));
}

AffineConstancyReport affine_constancy_check(const Head& head,
                                             std::span<const Eigen::VectorXd> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("affine constancy check needs at least two feature vectors");
  const Eigen::VectorXd g0 = feature_gradient(head, samples[0]);
  AffineConstancyReport r;
  for (std::size_t i = 1; i < samples.size(); ++i)
    r.max_deviation =
        std::max(r.max_deviation, (feature_gradient(head, samples[i]) - g0).lpNorm<Eigen::Infinity>());
  r.is_affine_consistent = r.max_deviation < kAffineTolerance;
  return r;
}

double lipschitz_bound_probe(const Head& head, std::span<const Eigen::VectorXd> samples) {
  if (samples.empty()) throw std::invalid_argument("Lipschitz probe needs samples");
  double sup = 0.0;
  for (const auto& p : samples) sup = std::max(sup, feature_gradient(head, p).norm());
  return sup;
}

}  // namespace qgt
