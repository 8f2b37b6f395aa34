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
#include "qgt/scaling.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qgt {

std::string to_string(ScalingModel model) {
  switch (model) {
    case ScalingModel::Poly: return "poly";
    case ScalingModel::PowerLog: return "power-log";
    case ScalingModel::QuasiPoly: return "quasi-poly";
    case ScalingModel::Exp: return "exp";
  }
  return "?";
}

double feature_map_phi(ScalingModel model, double n) {
  switch (model) {
    case ScalingModel::Poly:
      if (!(n > 0.0)) throw std::invalid_argument("poly model needs n > 0");
      return std::log(n);
    case ScalingModel::PowerLog:
      if (!(n >= 3.0)) throw std::invalid_argument("power-log model needs n >= 3");
      return std::log(n) + std::log(std::log(n));
    case ScalingModel::QuasiPoly: {
      if (!(n > 0.0)) throw std::invalid_argument("quasi-poly model needs n > 0");
      const double l = std::log(n);
      return l * l;
    }
    case ScalingModel::Exp:
      return n;
  }
  throw std::invalid_argument("unknown scaling model");
}

double aicc(double rss, int n_points, int k) {
  if (n_points <= k + 1)
    throw std::invalid_argument("AICc undefined for N <= k + 1 (N=" + std::to_string(n_points) + ")");
  if (rss < kDegenerateRss) return -std::numeric_limits<double>::infinity();
  const double nn = n_points;
  return nn * std::log(rss / nn) + 2.0 * k + 2.0 * k * (k + 1) / (nn - k - 1);
}

ScalingFit fit_model(ScalingModel model, std::span<const ScalingPoint> points) {
  if (points.size() < 4) throw std::invalid_argument("scaling fit needs at least 4 points");
  const auto count = static_cast<double>(points.size());
  std::vector<double> xs, ys;
  for (const auto& [n, y] : points) {
    if (!(y > 0.0)) throw std::invalid_argument("scaling fit needs y > 0");
    xs.push_back(feature_map_phi(model, n));
    ys.push_back(std::log(y));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling fit needs at least two distinct n");
  ScalingFit fit;
  fit.model = model;
  fit.beta1 = sxy / sxx;
  fit.beta0 = my - fit.beta1 * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.beta0 - fit.beta1 * xs[i];
    fit.rss += r * r;
  }
  fit.n_points = static_cast<int>(points.size());
  fit.degenerate = fit.rss < kDegenerateRss;
  fit.aicc = fit.aicc_defined() ? aicc(fit.rss, fit.n_points)
                                : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

DeltaAiccRow delta_aicc_row(const std::string& label, std::span<const ScalingPoint> points,
                            std::span<const ScalingModel> models) {
  if (models.empty()) throw std::invalid_argument("need at least one scaling model");
  DeltaAiccRow row;
  row.label = label;
  for (ScalingModel m : models) {
    ScalingFit f = fit_model(m, points);
    if (!f.aicc_defined())
      throw std::invalid_argument("AICc undefined for " + std::to_string(f.n_points) +
                                  " points; need more than " +
                                  std::to_string(kAiccParameters + 1));
    row.fits.push_back(f);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.fits.size(); ++i)
    if (row.fits[i].aicc < row.fits[best].aicc) best = i;
  row.winner = row.fits[best].model;
  row.aicc_best = row.fits[best].aicc;
  for (const auto& f : row.fits) {
    // Equal AICc (including two exact fits at -inf) means Delta 0.
    row.delta.push_back(f.aicc == row.aicc_best ? 0.0 : f.aicc - row.aicc_best);
  }
  return row;
}

std::vector<DeltaAiccRow> delta_aicc_table(
    const std::vector<std::pair<std::string, std::vector<ScalingPoint>>>& series,
    std::span<const ScalingModel> models) {
  std::vector<DeltaAiccRow> table;
  for (const auto& [label, pts] : series) table.push_back(delta_aicc_row(label, pts, models));
  return table;
}

std::string to_csv(const std::vector<DeltaAiccRow>& table) {
  std::ostringstream os;
  os.precision(17);
  os << "head";
  if (!table.empty())
    for (const auto& f : table.front().fits) os << ',' << to_string(f.model);
  os << ",AICc_best,winner\n";
  for (const auto& row : table) {
    os << row.label;
    for (double d : row.delta) os << ',' << d;
    os << ',' << row.aicc_best << ',' << to_string(row.winner) << '\n';
  }
  return os.str();
}

}  // namespace qgt
