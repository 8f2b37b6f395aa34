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

// Classical heads f: R^m -> R on distribution-valued features, with their
// closed-form feature gradients g_F = grad_p f(p).
//
//   linear: -sum q p             grad -q
//   jsd:    KL(p||mid)/2 + KL(q||mid)/2, mid = (p+q)/2
//                                grad log(p/mid)/2
//   nll:    -sum q log p         grad -q/p
//
// JSD and NLL smooth p and q with (x + eps)/(1 + m eps) on every call; the
// linear head uses raw values. Natural logs throughout.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace qgt {

enum class HeadKind { Linear, Jsd, Nll };

inline constexpr double kDefaultSmoothing = 1e-12;

std::string to_string(HeadKind kind);
HeadKind parse_head_kind(const std::string& name);

class Head {
 public:
  /// eps == 0 disables smoothing (used for the pre-smoothing NLL probe).
  Head(HeadKind kind, Eigen::VectorXd target, double eps = kDefaultSmoothing);

  HeadKind kind() const { return kind_; }
  const Eigen::VectorXd& target() const { return target_; }
  double epsilon() const { return eps_; }
  Eigen::Index width() const { return target_.size(); }

  /// FNV-1a of the target's bytes.
  std::uint64_t target_checksum() const;
  /// {kind, eps, q checksum, width}.
  nlohmann::json descriptor() const;

 private:
  HeadKind kind_;
  Eigen::VectorXd target_;
  Eigen::VectorXd smoothed_target_;
  double eps_;

  friend double loss(const Head&, const Eigen::Ref<const Eigen::VectorXd>&);
  friend Eigen::VectorXd feature_gradient(const Head&, const Eigen::Ref<const Eigen::VectorXd>&);
};

double loss(const Head& head, const Eigen::Ref<const Eigen::VectorXd>& p);
Eigen::VectorXd feature_gradient(const Head& head, const Eigen::Ref<const Eigen::VectorXd>& p);

/// Compressed head L = C(T(F)) with an affine transform T(F) = A F + c in
/// front of a criterion head C. The chain rule gives g = A^T g_C(T(F)).
class ComposedHead {
 public:
  ComposedHead(Eigen::MatrixXd transform, Eigen::VectorXd offset, Head criterion);

  const Head& criterion() const { return criterion_; }
  Eigen::VectorXd transform(const Eigen::Ref<const Eigen::VectorXd>& features) const;
  double loss(const Eigen::Ref<const Eigen::VectorXd>& features) const;
  Eigen::VectorXd feature_gradient(const Eigen::Ref<const Eigen::VectorXd>& features) const;

 private:
  Eigen::MatrixXd transform_;
  Eigen::VectorXd offset_;
  Head criterion_;
};

struct AffineConstancyReport {
  bool is_affine_consistent = false;
  double max_deviation = 0.0;
};

inline constexpr double kAffineTolerance = 1e-12;

/// max_i ||g(p_i) - g(p_1)||_inf; affine-consistent iff below 1e-12.
AffineConstancyReport affine_constancy_check(const Head& head,
                                             std::span<const Eigen::VectorXd> samples);

/// sup_i ||g(p_i)||_2, the empirical Lipschitz constant over the samples.
double lipschitz_bound_probe(const Head& head, std::span<const Eigen::VectorXd> samples);

}  // namespace qgt
