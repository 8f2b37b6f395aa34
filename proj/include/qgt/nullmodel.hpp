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

// Transmittance null models. Shapes are stored diagonalized: every statistic
// here is invariant under a common orthogonal change of basis, so only the
// spectrum matters.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgt/random.hpp"

namespace qgt {

enum class SpectrumKind {
  Isotropic,
  WellConditioned,
  LowRank,
  Spiked,
  PowerLaw,
  Exponential,
  Block,
  Custom,
};

std::string to_string(SpectrumKind kind);
SpectrumKind parse_spectrum_kind(const std::string& name);

/// Isotropic block of `size` eigenvalues sharing total spectral mass `mass`.
struct BlockSpec {
  int size = 1;
  double mass = 1.0;
};

struct ShapeParams {
  double kappa = 2.0;   // well-conditioned: lambda in [1, kappa]
  int rank = 8;         // low-rank
  double spike = 3.0;   // spiked: lambda_1 = 1 + spike
  double alpha = 0.75;  // power-law: i^-alpha
  double decay = 1.0;   // exponential: e^{-decay i}
  std::vector<BlockSpec> blocks;

  std::string describe(SpectrumKind kind) const;
};

struct SpectralShape {
  SpectrumKind kind = SpectrumKind::Isotropic;
  int m = 0;
  ShapeParams params;
  Eigen::VectorXd eigenvalues;
};

/// Builds the menu spectrum for `kind`; throws std::invalid_argument on
/// invalid parameters (alpha < 0, decay <= 0, rank outside [1, m], ...).
SpectralShape make_shape(SpectrumKind kind, int m, const ShapeParams& params = {});
SpectralShape custom_shape(Eigen::VectorXd eigenvalues);

/// Sigma^{1/2} z / sqrt(z^T Sigma z), z ~ N(0, I).
Eigen::VectorXd sample_elliptical_direction(const SpectralShape& shape, Rng& rng);

/// Tr(Sigma)^2 / Tr(Sigma^2).
double effective_dimension(const SpectralShape& shape);
double effective_dimension(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues);

struct OverlapEstimate {
  double mean_square = 0.0;     // Monte-Carlo E[(u.v)^2]
  double standard_error = 0.0;  // of mean_square
  double closed_form = 0.0;     // Tr(Su Sv) / (Tr Su Tr Sv)
  std::uint64_t samples = 0;

  double rms() const;
  /// Delta-method standard error of rms().
  double rms_standard_error() const;
};

OverlapEstimate rms_overlap(const SpectralShape& u_shape, const SpectralShape& v_shape,
                            std::uint64_t samples, Rng& rng);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// E|<u, v>| for independent uniform unit vectors in R^m.
MeanEstimate isotropic_abs_overlap(int m, std::uint64_t samples, Rng& rng);

struct MenuRow {
  SpectralShape shape;
  double d_eff = 0.0;
  double predicted_overlap = 0.0;  // 1 / sqrt(d_eff)
  /// Well-conditioned: m/kappa <= d_eff <= m. Other kinds: 1 <= d_eff <= rank.
  bool bounds_ok = false;
  /// Block kind only: sum of per-block effective dimensions.
  std::optional<double> block_sum;
  std::optional<OverlapEstimate> monte_carlo;
};

MenuRow spectral_menu_row(SpectrumKind kind, int m, const ShapeParams& params = {});

}  // namespace qgt
