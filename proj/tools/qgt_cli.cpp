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

// qgt: command-line front end for the experiment pipelines.
//
//   qgt single   --n 8,10 --heads linear,nll --out runs/a
//   qgt multi    --n 8 --subspace 16 --exact-only --out runs/b
//   qgt scaling  --from runs/b
//   qgt nullmodel --kinds isotropic,spiked --m 256
//   qgt bsweep   --n 12 --b-list 4,6
//   qgt report   --run runs/a
//
// Success prints a JSON summary on stdout. Failure prints
// {"error": {"kind": ..., "message": ...}} on stderr and exits nonzero.

#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qgt/experiment.hpp"

namespace {

using nlohmann::json;

struct Flags {
  qgt::ExperimentConfig config;
  std::vector<std::string> heads;
  int depth = 0;
};

void add_run_flags(CLI::App* sub, Flags& f) {
  auto& c = f.config;
  sub->add_option("--n", c.n_list, "system sizes")->delimiter(',');
  sub->add_option("--b", c.b, "block count");
  sub->add_option("--heads", f.heads, "linear, jsd, nll")->delimiter(',');
  sub->add_option("--circuits", c.circuits, "student circuits per size");
  sub->add_option("--reps", c.reps, "finite-shot repetitions per circuit");
  sub->add_option("--shots-grid", c.shots_grid, "increasing shot budgets")->delimiter(',');
  sub->add_option("--kappa", c.kappa, "MedSNR acceptance threshold");
  sub->add_option("--tau", c.tau, "MedRelBias acceptance threshold");
  sub->add_option("--epsilon", c.epsilon, "head smoothing");
  sub->add_option("--teacher-shots", c.teacher_shots, "teacher measurement budget");
  sub->add_option("--depth", f.depth, "student depth (default: teacher depth)");
  sub->add_option("--seed", c.master_seed, "master seed");
  sub->add_option("--out", c.out_dir, "run directory");
}

qgt::ExperimentConfig finish(Flags& f, const std::string& pipeline) {
  auto& c = f.config;
  if (!f.heads.empty()) {
    c.heads.clear();
    for (const auto& h : f.heads) c.heads.push_back(qgt::parse_head_kind(h));
  }
  if (f.depth > 0) c.student_depth = f.depth;
  if (c.out_dir.empty()) {
    char id[17];
    std::snprintf(id, sizeof id, "%016llx",
                  static_cast<unsigned long long>(qgt::config_checksum(c)));
    c.out_dir = "runs/" + pipeline + "-" + id;
  }
  return c;
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient transmission experiments for quantum generative models"};
  app.require_subcommand(1);

  Flags single{qgt::default_config(qgt::ProbeKind::Single), {}, 0};
  auto* single_cmd = app.add_subcommand("single", "single-parameter probe");
  add_run_flags(single_cmd, single);

  Flags multi{qgt::default_config(qgt::ProbeKind::Multi), {}, 0};
  auto* multi_cmd = app.add_subcommand("multi", "subspace probe");
  add_run_flags(multi_cmd, multi);
  multi_cmd->add_option("--subspace", multi.config.subspace, "subspace size s");
  multi_cmd->add_flag("--exact-only", multi.config.exact_only, "skip the finite-shot grid");

  Flags sweep{qgt::default_config(qgt::ProbeKind::Single), {}, 0};
  auto* sweep_cmd = app.add_subcommand("bsweep", "single and subspace probes across block counts");
  add_run_flags(sweep_cmd, sweep);
  sweep_cmd->add_option("--b-list", sweep.config.b_list, "block counts")->delimiter(',');
  sweep_cmd->add_option("--subspace", sweep.config.subspace, "subspace size s");

  Flags null{qgt::default_config(qgt::ProbeKind::Single), {}, 0};
  auto* null_cmd = app.add_subcommand("nullmodel", "spectral-shape menu with Monte-Carlo checks");
  null_cmd->add_option("--kinds", null.config.null_kinds, "spectral shapes")->delimiter(',');
  null_cmd->add_option("--m", null.config.null_m, "ambient dimension");
  null_cmd->add_option("--samples", null.config.null_samples, "Monte-Carlo pairs");
  null_cmd->add_option("--seed", null.config.master_seed, "master seed");
  null_cmd->add_option("--out", null.config.out_dir, "run directory");

  std::string scaling_from, scaling_out;
  auto* scaling_cmd = app.add_subcommand("scaling", "Delta-AICc table from a subspace run");
  scaling_cmd->add_option("--from", scaling_from, "source run directory")->required();
  scaling_cmd->add_option("--out", scaling_out, "output directory (default: --from)");

  std::string report_run;
  auto* report_cmd = app.add_subcommand("report", "summarize a run directory");
  report_cmd->add_option("--run", report_run, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    json out;
    if (*single_cmd) {
      const auto c = finish(single, "single");
      qgt::run_single_probe(c);
      out = qgt::summarize_run(c.out_dir);
    } else if (*multi_cmd) {
      const auto c = finish(multi, "multi");
      qgt::run_multi_probe(c);
      out = qgt::summarize_run(c.out_dir);
    } else if (*sweep_cmd) {
      const auto c = finish(sweep, "bsweep");
      qgt::run_b_sweep(c);
      out = qgt::summarize_run(c.out_dir);
    } else if (*null_cmd) {
      const auto c = finish(null, "nullmodel");
      const auto rows = qgt::run_nullmodel_suite(c);
      out = {{"run", c.out_dir}, {"rows", json::array()}};
      for (const auto& r : rows)
        out["rows"].push_back({{"shape", qgt::to_string(r.shape.kind)},
                               {"d_eff", r.d_eff},
                               {"predicted_rms_overlap", r.predicted_overlap},
                               {"mc_rms", r.monte_carlo ? json(r.monte_carlo->rms()) : json()}});
    } else if (*scaling_cmd) {
      const std::string dest = scaling_out.empty() ? scaling_from : scaling_out;
      const auto table = qgt::run_scaling_dir(scaling_from, dest);
      out = {{"run", dest}, {"rows", json::array()}};
      for (const auto& row : table)
        out["rows"].push_back({{"head", row.label},
                               {"winner", qgt::to_string(row.winner)},
                               {"delta", row.delta}});
    } else if (*report_cmd) {
      out = qgt::summarize_run(report_run);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    emit_error("invalid_argument", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
}
