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

// Experiment pipelines and their on-disk layout.
//
// A run directory holds
//   config.json     the full configuration
//   records.jsonl   append-only records, each tagged with the config checksum
//   frontier.csv    one row per (probe, b, n, head)
//   ridgeline.csv   per-repetition finite-shot norms at the multi frontier
//   scaling.csv     Delta-AICc table
//   nullmodel.csv   spectral menu report
//   bsweep.csv      block-count comparison
//   run_meta.json   wall-clock metadata (not part of the reproducible set)
//
// Every random stream is seeded from (master seed, purpose, coordinates), so
// outputs are identical for any worker count and across resumed runs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "qgt/grad.hpp"
#include "qgt/heads.hpp"
#include "qgt/nullmodel.hpp"
#include "qgt/scaling.hpp"
#include "qgt/shots.hpp"

namespace qgt {

struct ExperimentConfig {
  std::vector<int> n_list{8, 10, 12, 14, 16, 18, 20, 22, 24};
  int b = 4;
  std::vector<int> b_list{4, 6};
  std::vector<HeadKind> heads{HeadKind::Linear, HeadKind::Jsd, HeadKind::Nll};
  ProbeKind probe = ProbeKind::Single;
  int circuits = 200;
  int reps = 30;
  int subspace = 32;
  std::vector<std::uint64_t> shots_grid = power_of_two_grid(7, 20);
  double kappa = kDefaultKappa;
  double tau = kDefaultTau;
  double epsilon = kDefaultSmoothing;
  std::uint64_t teacher_shots = 200000;
  std::uint64_t master_seed = 0;
  /// Student depth; teacher_depth(n) when unset.
  std::optional<int> student_depth;
  /// Multi probe: compute the exact decomposition only, no shot grid.
  bool exact_only = false;
  std::vector<std::string> null_kinds{"isotropic", "well-conditioned", "low-rank", "spiked",
                                      "power-law", "exponential", "block"};
  int null_m = 256;
  std::uint64_t null_samples = 100000;
  /// Not part of the checksum.
  std::string out_dir;
};

/// Single probe: C=200, R=30. Multi probe: C=60, R=200, s=32.
ExperimentConfig default_config(ProbeKind probe);

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
/// FNV-1a of the canonical JSON dump, out_dir excluded.
std::uint64_t config_checksum(const ExperimentConfig& config);

int student_depth_for(const ExperimentConfig& config, int n);

/// Seeds: pure functions of the master seed and the grid coordinates.
std::uint64_t teacher_seed(std::uint64_t master, int n);
std::uint64_t teacher_shot_seed(std::uint64_t master, int n);
std::uint64_t student_seed(std::uint64_t master, int n, int circuit);
std::uint64_t coordinate_seed(std::uint64_t master, int n, int circuit);
std::uint64_t subspace_seed(std::uint64_t master, int n, int circuit);
std::uint64_t shot_seed(std::uint64_t master, ProbeKind probe, int b, int n, HeadKind head,
                        int circuit, int rep, std::uint64_t shots);

/// Finite-shot teacher target on the interface: one teacher per n, measured
/// once at `teacher_shots` and pushed through `map`.
Eigen::VectorXd teacher_target(const ExperimentConfig& config, const FeatureMap& map);

struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

Quartiles quartiles(const std::vector<double>& values);

struct ChainRuleFactors {
  double sigma_max = 0.0;
  double transmittance = 0.0;
  double g_norm = 0.0;
  double transmitted_norm = 0.0;
  bool near_degenerate = false;
};

struct SingleProbeSummary {
  int b = 0;
  int n = 0;
  Eigen::Index width = 0;
  HeadKind head = HeadKind::Linear;
  std::vector<int> coordinates;
  /// Exact directional derivative per circuit.
  std::vector<double> exact;
  FrontierResult frontier;
  /// Median |exact derivative| over circuits.
  double resolved_exact_median = 0.0;
  /// Median |repetition mean| over circuits at M*, when attained.
  std::optional<double> resolved_shot_median;
};

struct MultiProbeSummary {
  int b = 0;
  int n = 0;
  Eigen::Index width = 0;
  HeadKind head = HeadKind::Linear;
  std::vector<ChainRuleFactors> factors;
  /// Full reports; only populated when computed in this process.
  std::vector<ChainRuleReport> reports;
  /// Exact subspace gradient J_S^T g_F per circuit.
  std::vector<Eigen::VectorXd> gradients;
  Quartiles sigma_max, transmittance, g_norm, transmitted;
  VarianceBridgeReport bridge;
  std::optional<FrontierResult> frontier;
  std::optional<Quartiles> shot_g_norm, shot_transmitted, shot_sigma_max, shot_transmittance;
  std::vector<RidgelineRow> ridgeline;
};

struct RunRecord {
  std::uint64_t config_checksum = 0;
  std::vector<SingleProbeSummary> single;
  std::vector<MultiProbeSummary> multi;
  std::vector<DeltaAiccRow> scaling;
  std::vector<MenuRow> nullmodel;
};

/// Per n and head: C circuits, one uniform coordinate each, exact derivative
/// and finite-shot estimates over the shot grid, MedSNR frontier.
RunRecord run_single_probe(const ExperimentConfig& config);

/// Per n and head: random s-subsets, exact chain-rule reports, variance
/// bridge, and (unless exact_only) the joint MedSNR/MedRelBias frontier with
/// finite-shot counterparts and a ridgeline export at M*.
RunRecord run_multi_probe(const ExperimentConfig& config);

/// Delta-AICc table over the median exact transmitted norm per head. Needs at
/// least 5 system sizes (AICc with k = 3 is undefined for N <= 4).
std::vector<DeltaAiccRow> run_scaling(const ExperimentConfig& config, const RunRecord& source);

/// Loads `source_dir`, classifies, and writes scaling.csv into `out_dir`.
std::vector<DeltaAiccRow> run_scaling_dir(const std::string& source_dir, const std::string& out_dir);

std::vector<MenuRow> run_nullmodel_suite(const ExperimentConfig& config);

/// Single and multi probes for every b in config.b_list; writes bsweep.csv.
RunRecord run_b_sweep(const ExperimentConfig& config);

/// Reads config.json and records.jsonl of a run directory.
ExperimentConfig load_config(const std::string& dir);
RunRecord load_run(const std::string& dir);

/// Checksum consistency plus per-(probe, b, n, head) headline numbers.
nlohmann::json summarize_run(const std::string& dir);

}  // namespace qgt
