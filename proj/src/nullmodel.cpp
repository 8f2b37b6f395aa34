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
#include "qgt/nullmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qgt {

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Isotropic: return "isotropic";
    case SpectrumKind::WellConditioned: return "well-conditioned";
    case SpectrumKind::LowRank: return "low-rank";
    case SpectrumKind::Spiked: return "spiked";
    case SpectrumKind::PowerLaw: return "power-law";
    case SpectrumKind::Exponential: return "exponential";
    case SpectrumKind::Block: return "block";
    case SpectrumKind::Custom: return "custom";
  }
  return "?";
}

SpectrumKind parse_spectrum_kind(const std::string& name) {
  for (auto k : {SpectrumKind::Isotropic, SpectrumKind::WellConditioned, SpectrumKind::LowRank,
                 SpectrumKind::Spiked, SpectrumKind::PowerLaw, SpectrumKind::Exponential,
                 SpectrumKind::Block}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown spectral shape '" + name + "'");
}

std::string ShapeParams::describe(SpectrumKind kind) const {
  std::ostringstream os;
  switch (kind) {
    case SpectrumKind::WellConditioned: os << "kappa=" << kappa; break;
    case SpectrumKind::LowRank: os << "r=" << rank; break;
    case SpectrumKind::Spiked: os << "s=" << spike; break;
    case SpectrumKind::PowerLaw: os << "alpha=" << alpha; break;
    case SpectrumKind::Exponential: os << "c=" << decay; break;
    case SpectrumKind::Block:
      os << "blocks=";
      for (std::size_t i = 0; i < blocks.size(); ++i)
        os << (i ? "|" : "") << blocks[i].size << ':' << blocks[i].mass;
      break;
    default: break;
  }
  return os.str();
}

namespace {

void check_spectrum(const Eigen::VectorXd& lambda) {
  if (lambda.size() == 0) throw std::invalid_argument("spectrum must be nonempty");
  if ((lambda.array() < 0.0).any()) throw std::invalid_argument("eigenvalues must be >= 0");
  if (!(lambda.maxCoeff() > 0.0)) throw std::invalid_argument("spectrum is identically zero");
}

}  // namespace

SpectralShape make_shape(SpectrumKind kind, int m, const ShapeParams& params) {
  if (m < 1) throw std::invalid_argument("ambient dimension must be >= 1");
  SpectralShape s{kind, m, params, Eigen::VectorXd::Ones(m)};
  Eigen::VectorXd& lambda = s.eigenvalues;
  switch (kind) {
    case SpectrumKind::Isotropic:
      break;
    case SpectrumKind::WellConditioned:
      if (!(params.kappa >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
      if (m > 1) lambda = Eigen::VectorXd::LinSpaced(m, 1.0, params.kappa);
      break;
    case SpectrumKind::LowRank:
      if (params.rank < 1 || params.rank > m)
        throw std::invalid_argument("rank must satisfy 1 <= r <= m");
      lambda.setZero();
      lambda.head(params.rank).setOnes();
      break;
    case SpectrumKind::Spiked:
      if (!(params.spike >= 0.0)) throw std::invalid_argument("spike strength must be >= 0");
      lambda(0) = 1.0 + params.spike;
      break;
    case SpectrumKind::PowerLaw:
      if (!(params.alpha >= 0.0)) throw std::invalid_argument("power-law exponent must be >= 0");
      for (int i = 0; i < m; ++i) lambda(i) = std::pow(static_cast<double>(i + 1), -params.alpha);
      break;
    case SpectrumKind::Exponential:
      if (!(params.decay > 0.0)) throw std::invalid_argument("decay rate must be > 0");
      // e^{-c i} relative to the leading eigenvalue; d_eff is scale-free.
      for (int i = 0; i < m; ++i) lambda(i) = std::exp(-params.decay * i);
      break;
    case SpectrumKind::Block: {
      if (params.blocks.empty()) throw std::invalid_argument("block shape needs blocks");
      int at = 0;
      for (const auto& b : params.blocks) {
        if (b.size < 1 || !(b.mass > 0.0))
          throw std::invalid_argument("blocks need size >= 1 and mass > 0");
        if (at + b.size > m) throw std::invalid_argument("block sizes exceed m");
        lambda.segment(at, b.size).setConstant(b.mass / b.size);
        at += b.size;
      }
      if (at != m) throw std::invalid_argument("block sizes must sum to m");
      break;
    }
    case SpectrumKind::Custom:
      throw std::invalid_argument("use custom_shape for explicit spectra");
  }
  return s;
}

SpectralShape custom_shape(Eigen::VectorXd eigenvalues) {
  check_spectrum(eigenvalues);
  const int m = static_cast<int>(eigenvalues.size());
  return {SpectrumKind::Custom, m, {}, std::move(eigenvalues)};
}

Eigen::VectorXd sample_elliptical_direction(const SpectralShape& shape, Rng& rng) {
  check_spectrum(shape.eigenvalues);
  std::normal_distribution<double> normal;
  const Eigen::Index m = shape.eigenvalues.size();
  Eigen::VectorXd x(m);
  for (;;) {
    for (Eigen::Index i = 0; i < m; ++i) x(i) = std::sqrt(shape.eigenvalues(i)) * normal(rng);
    const double norm = x.norm();
    if (norm > 0.0) return x / norm;
  }
}

double effective_dimension(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues) {
  check_spectrum(eigenvalues);
  const double tr = eigenvalues.sum();
  return tr * tr / eigenvalues.squaredNorm();
}

double effective_dimension(const SpectralShape& shape) {
  return effective_dimension(shape.eigenvalues);
}

double OverlapEstimate::rms() const { return std::sqrt(mean_square); }

double OverlapEstimate::rms_standard_error() const {
  const double r = rms();
  return r > 0.0 ? standard_error / (2.0 * r) : 0.0;
}

OverlapEstimate rms_overlap(const SpectralShape& u_shape, const SpectralShape& v_shape,
                            std::uint64_t samples, Rng& rng) {
  if (u_shape.eigenvalues.size() != v_shape.eigenvalues.size())
    throw std::invalid_argument("shapes must share the ambient dimension");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd u = sample_elliptical_direction(u_shape, rng);
    const Eigen::VectorXd v = sample_elliptical_direction(v_shape, rng);
    const double o = u.dot(v);
    sum += o * o;
    sum_sq += o * o * o * o;
  }
  const double count = static_cast<double>(samples);
  OverlapEstimate e;
  e.samples = samples;
  e.mean_square = sum / count;
  const double var = samples > 1 ? (sum_sq - count * e.mean_square * e.mean_square) / (count - 1) : 0.0;
  e.standard_error = std::sqrt(std::max(var, 0.0) / count);
  e.closed_form = u_shape.eigenvalues.dot(v_shape.eigenvalues) /
                  (u_shape.eigenvalues.sum() * v_shape.eigenvalues.sum());
  return e;
}

MeanEstimate isotropic_abs_overlap(int m, std::uint64_t samples, Rng& rng) {
  if (m < 1) throw std::invalid_argument("dimension must be >= 1");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const SpectralShape iso = make_shape(SpectrumKind::Isotropic, m);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double o = std::abs(sample_elliptical_direction(iso, rng).dot(
        sample_elliptical_direction(iso, rng)));
    sum += o;
    sum_sq += o * o;
  }
  const double count = static_cast<double>(samples);
  MeanEstimate e;
  e.mean = sum / count;
  const double var = samples > 1 ? (sum_sq - count * e.mean * e.mean) / (count - 1) : 0.0;
  e.standard_error = std::sqrt(std::max(var, 0.0) / count);
  return e;
}

MenuRow spectral_menu_row(SpectrumKind kind, int m, const ShapeParams& params) {
  MenuRow row;
  row.shape = make_shape(kind, m, params);
  row.d_eff = effective_dimension(row.shape);
  row.predicted_overlap = 1.0 / std::sqrt(row.d_eff);
  const auto rank = static_cast<double>((row.shape.eigenvalues.array() > 0.0).count());
  // Relative slack for round-off in the sums.
  constexpr double kTol = 1e-12;
  row.bounds_ok = row.d_eff >= 1.0 - kTol && row.d_eff <= rank * (1.0 + kTol);
  if (kind == SpectrumKind::WellConditioned)
    row.bounds_ok = row.bounds_ok && row.d_eff >= (m / params.kappa) * (1.0 - kTol);
  if (kind == SpectrumKind::Block) {
    double sum = 0.0;
    int at = 0;
    for (const auto& b : params.blocks) {
      sum += effective_dimension(row.shape.eigenvalues.segment(at, b.size));
      at += b.size;
    }
    row.block_sum = sum;
  }
  return row;
}

}  // namespace qgt
