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

// Two-parameter scaling laws log y = b0 + b1 phi(n), ranked by AICc.

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qgt {

enum class ScalingModel { Poly, PowerLog, QuasiPoly, Exp };

inline constexpr std::array<ScalingModel, 4> kScalingModels{
    ScalingModel::Poly, ScalingModel::PowerLog, ScalingModel::QuasiPoly, ScalingModel::Exp};

std::string to_string(ScalingModel model);

/// log n | log n + log log n | (log n)^2 | n.
double feature_map_phi(ScalingModel model, double n);

/// Coefficients plus noise variance.
inline constexpr int kAiccParameters = 3;
/// Fits with RSS below this are treated as exact.
inline constexpr double kDegenerateRss = 1e-20;

struct ScalingFit {
  ScalingModel model = ScalingModel::Poly;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double rss = 0.0;
  /// -inf for degenerate (exact) fits; NaN when N <= k + 1.
  double aicc = 0.0;
  int n_points = 0;
  bool degenerate = false;

  bool aicc_defined() const { return n_points > kAiccParameters + 1; }
};

using ScalingPoint = std::pair<double, double>;  // (n, y)

/// OLS of log y on phi(n). Needs >= 4 points with y > 0.
ScalingFit fit_model(ScalingModel model, std::span<const ScalingPoint> points);

/// N ln(RSS/N) + 2k + 2k(k+1)/(N-k-1).
double aicc(double rss, int n_points, int k = kAiccParameters);

struct DeltaAiccRow {
  std::string label;
  std::vector<ScalingFit> fits;
  std::vector<double> delta;
  ScalingModel winner = ScalingModel::Poly;
  double aicc_best = 0.0;
};

/// AICc per model and Delta relative to the row minimum. Ties go to the
/// earlier model in `models`.
DeltaAiccRow delta_aicc_row(const std::string& label, std::span<const ScalingPoint> points,
                            std::span<const ScalingModel> models = kScalingModels);

/// Table with one row per labelled series.
std::vector<DeltaAiccRow> delta_aicc_table(
    const std::vector<std::pair<std::string, std::vector<ScalingPoint>>>& series,
    std::span<const ScalingModel> models = kScalingModels);

/// Rows: series; columns: models then AICc_best.
std::string to_csv(const std::vector<DeltaAiccRow>& table);

}  // namespace qgt
