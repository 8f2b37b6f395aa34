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
#include "qgt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qgt/interface.hpp"
#include "qgt/parallel.hpp"
#include "qgt/qsim.hpp"
#include "qgt/random.hpp"

namespace qgt {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig default_config(ProbeKind probe) {
  ExperimentConfig c;
  c.probe = probe;
  if (probe == ProbeKind::Multi) {
    c.circuits = 60;
    c.reps = 200;
    c.subspace = 32;
  }
  return c;
}

int student_depth_for(const ExperimentConfig& config, int n) {
  return config.student_depth.value_or(teacher_depth(n));
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename T>
bool has_duplicates(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(!c.n_list.empty(), "n_list must be nonempty");
  require(!has_duplicates(c.n_list), "n_list has duplicate sizes");
  for (int n : c.n_list)
    require(n >= 4 && n % 2 == 0 && n <= kMaxQubits,
            "system size " + std::to_string(n) + " must be even and in [4, " +
                std::to_string(kMaxQubits) + "]");
  const int n_min = *std::min_element(c.n_list.begin(), c.n_list.end());
  require(c.b >= 1 && c.b <= n_min, "block count b must satisfy 1 <= b <= min(n_list)");
  require(!c.heads.empty(), "at least one head is required");
  require(!has_duplicates(c.heads), "heads has duplicates");
  require(c.circuits >= 1, "circuit count must be >= 1");
  require(c.reps >= 2, "repetition count must be >= 2");
  require(!c.shots_grid.empty(), "shot grid must be nonempty");
  require(c.shots_grid.front() >= 1, "shot budgets must be >= 1");
  for (std::size_t i = 1; i < c.shots_grid.size(); ++i)
    require(c.shots_grid[i] > c.shots_grid[i - 1], "shot grid must be strictly increasing");
  require(std::isfinite(c.kappa) && c.kappa >= 0.0, "kappa must be finite and >= 0");
  require(std::isfinite(c.tau) && c.tau >= 0.0, "tau must be finite and >= 0");
  require(std::isfinite(c.epsilon) && c.epsilon > 0.0, "smoothing epsilon must be > 0");
  require(c.teacher_shots >= 1, "teacher_shots must be >= 1");
  if (c.student_depth) require(*c.student_depth >= 1, "student depth must be >= 1");
  if (c.probe == ProbeKind::Multi) {
    require(c.subspace >= 1, "subspace size must be >= 1");
    for (int n : c.n_list) {
      const int p = 2 * n * student_depth_for(c, n);
      require(c.subspace <= p, "subspace size " + std::to_string(c.subspace) +
                                   " exceeds the parameter count " + std::to_string(p) +
                                   " at n=" + std::to_string(n));
    }
  }
  require(!has_duplicates(c.null_kinds), "null_kinds has duplicates");
  for (const auto& k : c.null_kinds) parse_spectrum_kind(k);
  require(c.null_m >= 1, "null-model dimension must be >= 1");
  require(c.null_samples >= 1, "null-model sample count must be >= 1");
}

json to_json(const ExperimentConfig& c) {
  json heads = json::array();
  for (auto h : c.heads) heads.push_back(to_string(h));
  return {{"n_list", c.n_list},
          {"b", c.b},
          {"b_list", c.b_list},
          {"heads", heads},
          {"probe", to_string(c.probe)},
          {"circuits", c.circuits},
          {"reps", c.reps},
          {"subspace", c.subspace},
          {"shots_grid", c.shots_grid},
          {"kappa", c.kappa},
          {"tau", c.tau},
          {"epsilon", c.epsilon},
          {"teacher_shots", c.teacher_shots},
          {"master_seed", c.master_seed},
          {"student_depth", c.student_depth ? json(*c.student_depth) : json(nullptr)},
          {"exact_only", c.exact_only},
          {"null_kinds", c.null_kinds},
          {"null_m", c.null_m},
          {"null_samples", c.null_samples}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c =
      default_config(j.contains("probe") ? parse_probe_kind(j.at("probe").get<std::string>())
                                         : ProbeKind::Single);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_list", c.n_list);
  get("b", c.b);
  get("b_list", c.b_list);
  if (j.contains("heads")) {
    c.heads.clear();
    for (const auto& h : j.at("heads")) c.heads.push_back(parse_head_kind(h.get<std::string>()));
  }
  get("circuits", c.circuits);
  get("reps", c.reps);
  get("subspace", c.subspace);
  get("shots_grid", c.shots_grid);
  get("kappa", c.kappa);
  get("tau", c.tau);
  get("epsilon", c.epsilon);
  get("teacher_shots", c.teacher_shots);
  get("master_seed", c.master_seed);
  if (j.contains("student_depth") && !j.at("student_depth").is_null())
    c.student_depth = j.at("student_depth").get<int>();
  get("exact_only", c.exact_only);
  get("null_kinds", c.null_kinds);
  get("null_m", c.null_m);
  get("null_samples", c.null_samples);
  return c;
}

std::uint64_t config_checksum(const ExperimentConfig& config) {
  return detail::fnv1a(to_json(config).dump());
}

// ---------------------------------------------------------------------------
// Seeds

std::uint64_t teacher_seed(std::uint64_t master, int n) {
  return derive_seed(master, "teacher", {std::uint64_t(n)});
}
std::uint64_t teacher_shot_seed(std::uint64_t master, int n) {
  return derive_seed(master, "teacher-shots", {std::uint64_t(n)});
}
std::uint64_t student_seed(std::uint64_t master, int n, int circuit) {
  return derive_seed(master, "student-theta", {std::uint64_t(n), std::uint64_t(circuit)});
}
std::uint64_t coordinate_seed(std::uint64_t master, int n, int circuit) {
  return derive_seed(master, "single-coord", {std::uint64_t(n), std::uint64_t(circuit)});
}
std::uint64_t subspace_seed(std::uint64_t master, int n, int circuit) {
  return derive_seed(master, "subspace", {std::uint64_t(n), std::uint64_t(circuit)});
}
std::uint64_t shot_seed(std::uint64_t master, ProbeKind probe, int b, int n, HeadKind head,
                        int circuit, int rep, std::uint64_t shots) {
  return derive_seed(master, "shots",
                     {std::uint64_t(probe), std::uint64_t(b), std::uint64_t(n),
                      std::uint64_t(head), std::uint64_t(circuit), std::uint64_t(rep), shots});
}

// ---------------------------------------------------------------------------
// Teacher target

namespace {

Histogram teacher_histogram(const ExperimentConfig& c, int n) {
  const ParamCircuit teacher = build_teacher(n, teacher_seed(c.master_seed, n));
  const QuantumState out = run(teacher, domain_wall_state(n), Eigen::VectorXd());
  Rng rng = make_rng(teacher_shot_seed(c.master_seed, n));
  return sample(out, c.teacher_shots, rng);
}

Eigen::VectorXd target_from_histogram(const Histogram& h, const FeatureMap& map,
                                      std::uint64_t shots) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(map.width());
  for (const auto& [basis, count] : h) q(map.feature_index(basis)) += static_cast<double>(count);
  return q / static_cast<double>(shots);
}

}  // namespace

Eigen::VectorXd teacher_target(const ExperimentConfig& config, const FeatureMap& map) {
  const int n = map.num_qubits();
  return target_from_histogram(teacher_histogram(config, n), map, config.teacher_shots);
}

Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

// ---------------------------------------------------------------------------
// Serialization helpers

namespace {

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double from_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json snr_json(const Snr& s) { return s.infinite ? json("inf") : json(s.value); }

Snr snr_from(const json& j) {
  if (j.is_string()) return Snr::inf();
  return {j.get<double>(), false};
}

json quartiles_json(const Quartiles& q) {
  return {{"q25", num(q.q25)}, {"median", num(q.median)}, {"q75", num(q.q75)}};
}

Quartiles quartiles_from(const json& j) {
  return {from_num(j.at("q25")), from_num(j.at("median")), from_num(j.at("q75"))};
}

json grid_json(const std::vector<GridPoint>& grid) {
  json a = json::array();
  for (const auto& g : grid)
    a.push_back({{"M", g.shots},
                 {"med_snr", snr_json(g.med_snr)},
                 {"med_rel_bias", g.med_rel_bias ? num(*g.med_rel_bias) : json(nullptr)}});
  return a;
}

std::vector<GridPoint> grid_from(const json& a) {
  std::vector<GridPoint> grid;
  for (const auto& g : a) {
    GridPoint p;
    p.shots = g.at("M").get<std::uint64_t>();
    p.med_snr = snr_from(g.at("med_snr"));
    if (!g.at("med_rel_bias").is_null()) p.med_rel_bias = from_num(g.at("med_rel_bias"));
    grid.push_back(p);
  }
  return grid;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
std::string fmt(const std::optional<T>& x) {
  if (!x) return "";
  if constexpr (std::is_floating_point_v<T>) return fmt(*x);
  else return std::to_string(*x);
}

std::string group_key(ProbeKind probe, int b, int n, HeadKind head) {
  return to_string(probe) + "/b=" + std::to_string(b) + "/n=" + std::to_string(n) +
         "/head=" + to_string(head);
}

json group_fields(ProbeKind probe, int b, int n, HeadKind head, Eigen::Index width) {
  return {{"probe", to_string(probe)}, {"b", b}, {"n", n}, {"head", to_string(head)},
          {"width", width}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Append-only record store. Each line carries the config checksum and a
// checksum of its own content; a torn final line is dropped on open.

std::uint64_t line_checksum(json record) {
  record.erase("record_checksum");
  return detail::fnv1a(record.dump());
}

class RecordStore {
 public:
  RecordStore(const fs::path& dir, std::uint64_t config_checksum, bool writable)
      : path_(dir / "records.jsonl"), checksum_(config_checksum), writable_(writable) {
    if (fs::exists(path_)) load();
  }

  const json* find(const std::string& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  const std::vector<json>& records() const { return records_; }

  void append(json record) {
    if (!writable_) throw std::logic_error("record store opened read-only");
    const std::string key = record.at("key").get<std::string>();
    if (index_.count(key)) return;
    record["config_checksum"] = checksum_;
    record["record_checksum"] = line_checksum(record);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + path_.string());
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to " + path_.string() + " failed");
    index_[key] = records_.size();
    records_.push_back(std::move(record));
  }

 private:
  void load() {
    const std::string text = read_file(path_);
    const std::size_t complete = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
    if (complete < text.size()) {
      if (!writable_) throw std::runtime_error(path_.string() + " ends with a partial record");
      fs::resize_file(path_, complete);
    }
    std::size_t at = 0, line_no = 0;
    while (at < complete) {
      const std::size_t end = text.find('\n', at);
      ++line_no;
      json record;
      try {
        record = json::parse(text.substr(at, end - at));
      } catch (const json::exception&) {
        throw std::runtime_error(path_.string() + ": malformed record at line " +
                                 std::to_string(line_no));
      }
      if (!record.contains("record_checksum") ||
          record.at("record_checksum").get<std::uint64_t>() != line_checksum(record))
        throw std::runtime_error(path_.string() + ": record checksum mismatch at line " +
                                 std::to_string(line_no));
      if (record.value("config_checksum", std::uint64_t(0)) != checksum_)
        throw std::runtime_error(path_.string() + ": record at line " + std::to_string(line_no) +
                                 " belongs to a different configuration");
      index_[record.at("key").get<std::string>()] = records_.size();
      records_.push_back(std::move(record));
      at = end + 1;
    }
  }

  fs::path path_;
  std::uint64_t checksum_;
  bool writable_;
  std::vector<json> records_;
  std::map<std::string, std::size_t> index_;
};

/// Creates the run directory and config.json, or checks an existing one.
RecordStore open_run(const ExperimentConfig& config) {
  if (config.out_dir.empty()) throw std::invalid_argument("output directory must be set");
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  const std::uint64_t cs = config_checksum(config);
  const fs::path cfg = dir / "config.json";
  if (fs::exists(cfg)) {
    const json existing = json::parse(read_file(cfg));
    if (existing.value("config_checksum", std::uint64_t(0)) != cs)
      throw std::runtime_error(dir.string() + " holds a run with a different configuration");
  } else {
    json j = to_json(config);
    j["config_checksum"] = cs;
    write_file(cfg, j.dump(2) + "\n");
  }
  return RecordStore(dir, cs, true);
}

class WallClock {
 public:
  explicit WallClock(std::string pipeline)
      : pipeline_(std::move(pipeline)), start_(std::chrono::system_clock::now()) {}

  void write(const fs::path& dir) const {
    const auto end = std::chrono::system_clock::now();
    const auto secs = [](auto t) {
      return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
    };
    const json meta{{"pipeline", pipeline_},
                    {"started_unix", secs(start_)},
                    {"finished_unix", secs(end)},
                    {"wall_seconds", std::chrono::duration<double>(end - start_).count()},
                    {"workers", worker_count()}};
    write_file(dir / "run_meta.json", meta.dump(2) + "\n");
  }

 private:
  std::string pipeline_;
  std::chrono::system_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Summary reconstruction from records

SingleProbeSummary single_from_records(const json& exact, const json& summary, double kappa,
                                       double tau) {
  SingleProbeSummary s;
  s.b = exact.at("b");
  s.n = exact.at("n");
  s.width = exact.at("width");
  s.head = parse_head_kind(exact.at("head"));
  for (const auto& c : exact.at("circuits")) {
    s.coordinates.push_back(c.at("coordinate"));
    s.exact.push_back(from_num(c.at("exact")));
  }
  s.frontier.n = s.n;
  s.frontier.head = s.head;
  s.frontier.probe = ProbeKind::Single;
  s.frontier.kappa = kappa;
  s.frontier.tau = tau;
  s.frontier.grid = grid_from(summary.at("grid"));
  if (!summary.at("M_star").is_null()) s.frontier.m_star = summary.at("M_star").get<std::uint64_t>();
  s.resolved_exact_median = from_num(summary.at("resolved_exact_median"));
  if (!summary.at("resolved_shot_median").is_null())
    s.resolved_shot_median = from_num(summary.at("resolved_shot_median"));
  return s;
}

void fill_factor_quartiles(MultiProbeSummary& s) {
  std::vector<double> sig, tr, g, t;
  for (const auto& f : s.factors) {
    sig.push_back(f.sigma_max);
    tr.push_back(f.transmittance);
    g.push_back(f.g_norm);
    t.push_back(f.transmitted_norm);
  }
  s.sigma_max = quartiles(sig);
  s.transmittance = quartiles(tr);
  s.g_norm = quartiles(g);
  s.transmitted = quartiles(t);
}

MultiProbeSummary multi_from_records(const json& exact, const json& summary, double kappa,
                                     double tau) {
  MultiProbeSummary s;
  s.b = exact.at("b");
  s.n = exact.at("n");
  s.width = exact.at("width");
  s.head = parse_head_kind(exact.at("head"));
  for (const auto& c : exact.at("circuits")) {
    ChainRuleFactors f;
    f.sigma_max = from_num(c.at("sigma_max"));
    f.transmittance = from_num(c.at("transmittance"));
    f.g_norm = from_num(c.at("g_norm"));
    f.transmitted_norm = from_num(c.at("transmitted_norm"));
    f.near_degenerate = c.at("near_degenerate");
    s.factors.push_back(f);
    const auto& grad = c.at("gradient");
    Eigen::VectorXd v(static_cast<Eigen::Index>(grad.size()));
    for (std::size_t i = 0; i < grad.size(); ++i) v(Eigen::Index(i)) = from_num(grad[i]);
    s.gradients.push_back(std::move(v));
  }
  fill_factor_quartiles(s);
  const auto& vb = exact.at("variance_bridge");
  s.bridge = {from_num(vb.at("trace_cov")), from_num(vb.at("bound")), vb.at("holds")};
  if (summary.at("has_frontier").get<bool>()) {
    FrontierResult fr;
    fr.n = s.n;
    fr.head = s.head;
    fr.probe = ProbeKind::Multi;
    fr.kappa = kappa;
    fr.tau = tau;
    fr.grid = grid_from(summary.at("grid"));
    if (!summary.at("M_star").is_null()) fr.m_star = summary.at("M_star").get<std::uint64_t>();
    s.frontier = std::move(fr);
  }
  auto opt_q = [&](const char* key, std::optional<Quartiles>& out) {
    if (!summary.at(key).is_null()) out = quartiles_from(summary.at(key));
  };
  opt_q("shot_g_norm", s.shot_g_norm);
  opt_q("shot_transmitted", s.shot_transmitted);
  opt_q("shot_sigma_max", s.shot_sigma_max);
  opt_q("shot_transmittance", s.shot_transmittance);
  for (const auto& r : summary.at("ridgeline"))
    s.ridgeline.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<std::uint64_t>(),
                           from_num(r.at(3)), from_num(r.at(4))});
  return s;
}

// ---------------------------------------------------------------------------
// CSV exports

void write_frontier_csv(const fs::path& dir, const RunRecord& rec) {
  std::ostringstream os;
  os << "probe,b,n,width,head,M_star,attained,kappa,tau,resolved_exact_median,"
        "resolved_shot_median,sigma_max_q25,sigma_max_median,sigma_max_q75,"
        "transmittance_q25,transmittance_median,transmittance_q75,g_norm_q25,g_norm_median,"
        "g_norm_q75,transmitted_q25,transmitted_median,transmitted_q75,shot_sigma_max_median,"
        "shot_transmittance_median,shot_g_norm_median,shot_transmitted_median\n";
  for (const auto& s : rec.single) {
    os << "single," << s.b << ',' << s.n << ',' << s.width << ',' << to_string(s.head) << ','
       << fmt(s.frontier.m_star) << ',' << (s.frontier.attained() ? 1 : 0) << ','
       << fmt(s.frontier.kappa) << ',' << fmt(s.frontier.tau) << ','
       << fmt(s.resolved_exact_median) << ',' << fmt(s.resolved_shot_median)
       << ",,,,,,,,,,,,,,,,\n";
  }
  auto q3 = [](const Quartiles& q) {
    return fmt(q.q25) + ',' + fmt(q.median) + ',' + fmt(q.q75);
  };
  auto med = [](const std::optional<Quartiles>& q) {
    return q ? fmt(q->median) : std::string();
  };
  for (const auto& s : rec.multi) {
    const bool has = s.frontier.has_value();
    os << "multi," << s.b << ',' << s.n << ',' << s.width << ',' << to_string(s.head) << ','
       << (has ? fmt(s.frontier->m_star) : "") << ',' << (has && s.frontier->attained() ? 1 : 0)
       << ',' << (has ? fmt(s.frontier->kappa) : "") << ',' << (has ? fmt(s.frontier->tau) : "")
       << ',' << fmt(s.transmitted.median) << ',' << med(s.shot_transmitted) << ','
       << q3(s.sigma_max) << ',' << q3(s.transmittance) << ',' << q3(s.g_norm) << ','
       << q3(s.transmitted) << ',' << med(s.shot_sigma_max) << ',' << med(s.shot_transmittance)
       << ',' << med(s.shot_g_norm) << ',' << med(s.shot_transmitted) << '\n';
  }
  write_file(dir / "frontier.csv", os.str());

  std::ostringstream grid;
  grid << "probe,b,n,head,M,med_snr,med_rel_bias\n";
  auto rows = [&](const char* probe, int b, int n, HeadKind head, const FrontierResult& f) {
    for (const auto& g : f.grid)
      grid << probe << ',' << b << ',' << n << ',' << to_string(head) << ',' << g.shots << ','
           << fmt(g.med_snr.as_double()) << ',' << fmt(g.med_rel_bias) << '\n';
  };
  for (const auto& s : rec.single) rows("single", s.b, s.n, s.head, s.frontier);
  for (const auto& s : rec.multi)
    if (s.frontier) rows("multi", s.b, s.n, s.head, *s.frontier);
  write_file(dir / "grid.csv", grid.str());
}

void write_ridgeline_csv(const fs::path& dir, const RunRecord& rec) {
  std::ostringstream os;
  os << "b,n,head,circuit,repetition,M,log10_feature_grad,log10_transmitted\n";
  for (const auto& s : rec.multi)
    for (const auto& r : s.ridgeline)
      os << s.b << ',' << s.n << ',' << to_string(s.head) << ',' << r.circuit_id << ','
         << r.repetition << ',' << r.shots << ',' << fmt(r.log10_feature_grad) << ','
         << fmt(r.log10_transmitted) << '\n';
  write_file(dir / "ridgeline.csv", os.str());
}

void write_chain_csv(const fs::path& dir, const RunRecord& rec) {
  std::ostringstream os;
  os << "b,n,head,circuit,sigma_max,transmittance,g_norm,transmitted_norm,near_degenerate\n";
  for (const auto& s : rec.multi)
    for (std::size_t c = 0; c < s.factors.size(); ++c) {
      const auto& f = s.factors[c];
      os << s.b << ',' << s.n << ',' << to_string(s.head) << ',' << c << ',' << fmt(f.sigma_max)
         << ',' << fmt(f.transmittance) << ',' << fmt(f.g_norm) << ','
         << fmt(f.transmitted_norm) << ',' << (f.near_degenerate ? 1 : 0) << '\n';
    }
  write_file(dir / "chain.csv", os.str());
}

void write_outputs(const fs::path& dir, const RunRecord& rec) {
  write_frontier_csv(dir, rec);
  if (!rec.multi.empty()) {
    write_ridgeline_csv(dir, rec);
    write_chain_csv(dir, rec);
  }
}

// ---------------------------------------------------------------------------
// Shared per-(n, b) context

struct Ensemble {
  int n = 0;
  int b = 0;
  FeatureMap map;
  Eigen::VectorXd target;
  ParamCircuit student;
  std::vector<std::uint64_t> theta_seeds;
  std::vector<std::vector<int>> subspaces;
  std::vector<ShiftedFeatures> shifted;  // filled on demand
};

Ensemble make_ensemble(const ExperimentConfig& c, int n, int b, const Histogram& teacher,
                       ProbeKind probe) {
  Ensemble e{n, b, FeatureMap::block_weights(n, b), {}, build_student(n, student_depth_for(c, n)),
             {}, {}, {}};
  e.target = target_from_histogram(teacher, e.map, c.teacher_shots);
  const int p = e.student.num_params;
  for (int k = 0; k < c.circuits; ++k) {
    e.theta_seeds.push_back(student_seed(c.master_seed, n, k));
    if (probe == ProbeKind::Single) {
      Rng rng = make_rng(coordinate_seed(c.master_seed, n, k));
      e.subspaces.push_back({std::uniform_int_distribution<int>(0, p - 1)(rng)});
    } else {
      e.subspaces.push_back(
          SubspaceSketch::draw(p, c.subspace, subspace_seed(c.master_seed, n, k)).indices);
    }
  }
  return e;
}

void ensure_shifted(Ensemble& e) {
  if (!e.shifted.empty()) return;
  e.shifted.resize(e.theta_seeds.size());
  const QuantumState input(e.n);
  parallel_for(e.theta_seeds.size(), [&](std::size_t k) {
    const Eigen::VectorXd theta = initial_parameters(e.student, e.theta_seeds[k]);
    e.shifted[k] = shifted_features(e.student, input, theta, e.map, e.subspaces[k]);
  });
}

struct TeacherCache {
  const ExperimentConfig& config;
  std::map<int, Histogram> by_n;
  const Histogram& get(int n) {
    auto it = by_n.find(n);
    if (it == by_n.end()) it = by_n.emplace(n, teacher_histogram(config, n)).first;
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Single-parameter probe

SingleProbeSummary single_group(const ExperimentConfig& c, Ensemble& e, HeadKind head_kind,
                                RecordStore& store) {
  const std::string key = group_key(ProbeKind::Single, e.b, e.n, head_kind);
  const json fields = group_fields(ProbeKind::Single, e.b, e.n, head_kind, e.map.width());
  if (const json* done = store.find(key + "/summary"))
    return single_from_records(*store.find(key + "/exact"), *done, c.kappa, c.tau);

  ensure_shifted(e);
  const Head head(head_kind, e.target, c.epsilon);
  const std::size_t num_c = e.shifted.size();
  std::vector<double> exact(num_c);
  for (std::size_t k = 0; k < num_c; ++k) {
    const auto& sf = e.shifted[k];
    exact[k] = (sf.jacobian().transpose() * feature_gradient(head, sf.base))(0);
  }
  json ex = fields;
  ex["key"] = key + "/exact";
  ex["type"] = "exact";
  ex["interface"] = e.map.descriptor();
  ex["head_descriptor"] = head.descriptor();
  ex["circuits"] = json::array();
  for (std::size_t k = 0; k < num_c; ++k)
    ex["circuits"].push_back({{"circuit", k},
                              {"student_seed", e.theta_seeds[k]},
                              {"coordinate", e.subspaces[k][0]},
                              {"exact", num(exact[k])}});
  store.append(ex);

  std::vector<GridPoint> grid;
  std::map<std::uint64_t, std::vector<double>> means_by_m;
  for (std::uint64_t m : c.shots_grid) {
    const std::string cell_key = key + "/M=" + std::to_string(m);
    std::vector<double> means(num_c);
    std::vector<Snr> snrs(num_c);
    if (const json* stored = store.find(cell_key)) {
      const auto& cs = stored->at("circuits");
      for (std::size_t k = 0; k < num_c; ++k) {
        means[k] = from_num(cs.at(k).at("mean"));
        snrs[k] = snr_from(cs.at(k).at("snr"));
      }
    } else {
      parallel_for(num_c, [&](std::size_t k) {
        std::vector<double> reps(static_cast<std::size_t>(c.reps));
        for (int r = 0; r < c.reps; ++r) {
          Rng rng = make_rng(
              shot_seed(c.master_seed, ProbeKind::Single, e.b, e.n, head_kind, int(k), r, m));
          reps[std::size_t(r)] = finite_shot_gradient(e.shifted[k], head, m, rng).value(0);
        }
        double mean = 0.0;
        for (double x : reps) mean += x;
        means[k] = mean / static_cast<double>(reps.size());
        snrs[k] = snr_single(reps);
      });
      json cell = fields;
      cell["key"] = cell_key;
      cell["type"] = "cell";
      cell["M"] = m;
      cell["med_snr"] = snr_json(median(snrs));
      cell["circuits"] = json::array();
      for (std::size_t k = 0; k < num_c; ++k)
        cell["circuits"].push_back({{"circuit", k}, {"mean", num(means[k])}, {"snr", snr_json(snrs[k])}});
      store.append(cell);
    }
    grid.push_back({m, median(snrs), std::nullopt});
    means_by_m[m] = std::move(means);
  }

  SingleProbeSummary s;
  s.b = e.b;
  s.n = e.n;
  s.width = e.map.width();
  s.head = head_kind;
  for (const auto& sub : e.subspaces) s.coordinates.push_back(sub[0]);
  s.exact = exact;
  s.frontier = frontier_search(ProbeKind::Single, e.n, head_kind, grid, c.kappa, c.tau);
  std::vector<double> abs_exact;
  for (double x : exact) abs_exact.push_back(std::abs(x));
  s.resolved_exact_median = median(abs_exact);
  if (s.frontier.m_star) {
    std::vector<double> abs_mean;
    for (double x : means_by_m.at(*s.frontier.m_star)) abs_mean.push_back(std::abs(x));
    s.resolved_shot_median = median(abs_mean);
  }
  json sum = fields;
  sum["key"] = key + "/summary";
  sum["type"] = "summary";
  sum["grid"] = grid_json(s.frontier.grid);
  sum["M_star"] = s.frontier.m_star ? json(*s.frontier.m_star) : json(nullptr);
  sum["resolved_exact_median"] = num(s.resolved_exact_median);
  sum["resolved_shot_median"] =
      s.resolved_shot_median ? num(*s.resolved_shot_median) : json(nullptr);
  store.append(sum);
  return s;
}

// ---------------------------------------------------------------------------
// Subspace probe

struct MultiCellStats {
  Snr snr;
  double rel_bias = 0.0;
};

MultiProbeSummary multi_group(const ExperimentConfig& c, Ensemble& e, HeadKind head_kind,
                              RecordStore& store) {
  const std::string key = group_key(ProbeKind::Multi, e.b, e.n, head_kind);
  const json fields = group_fields(ProbeKind::Multi, e.b, e.n, head_kind, e.map.width());
  if (const json* done = store.find(key + "/summary"))
    return multi_from_records(*store.find(key + "/exact"), *done, c.kappa, c.tau);

  ensure_shifted(e);
  const Head head(head_kind, e.target, c.epsilon);
  const std::size_t num_c = e.shifted.size();

  MultiProbeSummary s;
  s.b = e.b;
  s.n = e.n;
  s.width = e.map.width();
  s.head = head_kind;
  std::vector<std::pair<double, double>> sigma_g;
  for (std::size_t k = 0; k < num_c; ++k) {
    const auto& sf = e.shifted[k];
    ChainRuleReport r = chain_rule_decompose(sf.jacobian(), feature_gradient(head, sf.base));
    s.factors.push_back({r.sigma_max(), r.transmittance(), r.g_norm(), r.transmitted_norm(),
                         r.near_degenerate()});
    s.gradients.push_back(sf.jacobian().transpose() * feature_gradient(head, sf.base));
    sigma_g.emplace_back(r.sigma_max(), r.g_norm());
    s.reports.push_back(std::move(r));
  }
  fill_factor_quartiles(s);
  s.bridge = variance_bridge_check(s.gradients, sigma_g);

  json ex = fields;
  ex["key"] = key + "/exact";
  ex["type"] = "exact";
  ex["interface"] = e.map.descriptor();
  ex["head_descriptor"] = head.descriptor();
  ex["variance_bridge"] = {{"trace_cov", num(s.bridge.trace_cov)},
                           {"bound", num(s.bridge.bound)},
                           {"holds", s.bridge.holds}};
  ex["circuits"] = json::array();
  for (std::size_t k = 0; k < num_c; ++k) {
    const auto& f = s.factors[k];
    json grad = json::array();
    for (Eigen::Index i = 0; i < s.gradients[k].size(); ++i) grad.push_back(num(s.gradients[k](i)));
    ex["circuits"].push_back({{"circuit", k},
                              {"student_seed", e.theta_seeds[k]},
                              {"subspace", e.subspaces[k]},
                              {"sigma_max", num(f.sigma_max)},
                              {"transmittance", num(f.transmittance)},
                              {"g_norm", num(f.g_norm)},
                              {"transmitted_norm", num(f.transmitted_norm)},
                              {"near_degenerate", f.near_degenerate},
                              {"gradient", grad}});
  }
  store.append(ex);

  json sum = fields;
  sum["key"] = key + "/summary";
  sum["type"] = "summary";
  sum["has_frontier"] = !c.exact_only;
  sum["grid"] = json::array();
  sum["M_star"] = nullptr;
  for (const char* k : {"shot_g_norm", "shot_transmitted", "shot_sigma_max", "shot_transmittance"})
    sum[k] = nullptr;
  sum["ridgeline"] = json::array();
  if (c.exact_only) {
    store.append(sum);
    return s;
  }

  auto estimate = [&](std::size_t k, int r, std::uint64_t m, bool decompose) {
    Rng rng =
        make_rng(shot_seed(c.master_seed, ProbeKind::Multi, e.b, e.n, head_kind, int(k), r, m));
    ShotEstimate est = finite_shot_gradient(e.shifted[k], head, m, rng, decompose);
    est.circuit_id = int(k);
    est.repetition = r;
    return est;
  };

  std::vector<GridPoint> grid;
  for (std::uint64_t m : c.shots_grid) {
    const std::string cell_key = key + "/M=" + std::to_string(m);
    std::vector<MultiCellStats> stats(num_c);
    if (const json* stored = store.find(cell_key)) {
      const auto& cs = stored->at("circuits");
      for (std::size_t k = 0; k < num_c; ++k)
        stats[k] = {snr_from(cs.at(k).at("snr")), from_num(cs.at(k).at("rel_bias"))};
    } else {
      parallel_for(num_c, [&](std::size_t k) {
        std::vector<Eigen::VectorXd> reps;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(s.gradients[k].size());
        for (int r = 0; r < c.reps; ++r) {
          reps.push_back(estimate(k, r, m, false).value);
          mean += reps.back();
        }
        mean /= static_cast<double>(c.reps);
        stats[k] = {snr_multi(reps), rel_bias(mean, s.gradients[k], kRelBiasStabilizer)};
      });
      std::vector<Snr> snrs;
      std::vector<double> biases;
      for (const auto& st : stats) {
        snrs.push_back(st.snr);
        biases.push_back(st.rel_bias);
      }
      json cell = fields;
      cell["key"] = cell_key;
      cell["type"] = "cell";
      cell["M"] = m;
      cell["med_snr"] = snr_json(median(snrs));
      cell["med_rel_bias"] = num(median(biases));
      cell["circuits"] = json::array();
      for (std::size_t k = 0; k < num_c; ++k)
        cell["circuits"].push_back(
            {{"circuit", k}, {"snr", snr_json(stats[k].snr)}, {"rel_bias", num(stats[k].rel_bias)}});
      store.append(cell);
    }
    std::vector<Snr> snrs;
    std::vector<double> biases;
    for (const auto& st : stats) {
      snrs.push_back(st.snr);
      biases.push_back(st.rel_bias);
    }
    grid.push_back({m, median(snrs), median(biases)});
  }
  s.frontier = frontier_search(ProbeKind::Multi, e.n, head_kind, grid, c.kappa, c.tau);

  if (s.frontier->m_star) {
    const std::uint64_t m = *s.frontier->m_star;
    std::vector<std::vector<ShotEstimate>> per_circuit(num_c);
    parallel_for(num_c, [&](std::size_t k) {
      for (int r = 0; r < c.reps; ++r) per_circuit[k].push_back(estimate(k, r, m, true));
    });
    std::vector<double> sig, tr, g, t;
    std::vector<ShotEstimate> flat;
    for (auto& reps : per_circuit) {
      std::vector<double> rs, rt, rg, rn;
      for (const auto& est : reps) {
        rs.push_back(*est.sigma_max);
        rt.push_back(*est.transmittance);
        rg.push_back(est.feature_grad_norm);
        rn.push_back(est.value.norm());
      }
      sig.push_back(median(rs));
      tr.push_back(median(rt));
      g.push_back(median(rg));
      t.push_back(median(rn));
      for (auto& est : reps) flat.push_back(std::move(est));
    }
    s.shot_sigma_max = quartiles(sig);
    s.shot_transmittance = quartiles(tr);
    s.shot_g_norm = quartiles(g);
    s.shot_transmitted = quartiles(t);
    s.ridgeline = export_ridgeline(flat);
  }

  sum["grid"] = grid_json(s.frontier->grid);
  sum["M_star"] = s.frontier->m_star ? json(*s.frontier->m_star) : json(nullptr);
  auto put_q = [&](const char* k, const std::optional<Quartiles>& q) {
    if (q) sum[k] = quartiles_json(*q);
  };
  put_q("shot_g_norm", s.shot_g_norm);
  put_q("shot_transmitted", s.shot_transmitted);
  put_q("shot_sigma_max", s.shot_sigma_max);
  put_q("shot_transmittance", s.shot_transmittance);
  for (const auto& r : s.ridgeline)
    sum["ridgeline"].push_back(
        {r.circuit_id, r.repetition, r.shots, num(r.log10_feature_grad), num(r.log10_transmitted)});
  store.append(sum);
  return s;
}

void run_probe_into(const ExperimentConfig& c, ProbeKind probe, int b, RecordStore& store,
                    TeacherCache& teachers, RunRecord& rec) {
  for (int n : c.n_list) {
    Ensemble e = make_ensemble(c, n, b, teachers.get(n), probe);
    for (HeadKind h : c.heads) {
      if (probe == ProbeKind::Single) rec.single.push_back(single_group(c, e, h, store));
      else rec.multi.push_back(multi_group(c, e, h, store));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Pipelines

RunRecord run_single_probe(const ExperimentConfig& config) {
  validate(config);
  require(config.probe == ProbeKind::Single, "run_single_probe needs probe=single");
  require(!config.exact_only, "exact_only applies to the multi probe");
  const WallClock clock("single");
  RecordStore store = open_run(config);
  TeacherCache teachers{config, {}};
  RunRecord rec;
  rec.config_checksum = config_checksum(config);
  run_probe_into(config, ProbeKind::Single, config.b, store, teachers, rec);
  write_outputs(config.out_dir, rec);
  clock.write(config.out_dir);
  return rec;
}

RunRecord run_multi_probe(const ExperimentConfig& config) {
  validate(config);
  require(config.probe == ProbeKind::Multi, "run_multi_probe needs probe=multi");
  const WallClock clock("multi");
  RecordStore store = open_run(config);
  TeacherCache teachers{config, {}};
  RunRecord rec;
  rec.config_checksum = config_checksum(config);
  run_probe_into(config, ProbeKind::Multi, config.b, store, teachers, rec);
  write_outputs(config.out_dir, rec);
  clock.write(config.out_dir);
  return rec;
}

std::vector<DeltaAiccRow> run_scaling(const ExperimentConfig& config, const RunRecord& source) {
  std::vector<std::pair<std::string, std::vector<ScalingPoint>>> series;
  for (HeadKind h : config.heads) {
    std::vector<ScalingPoint> pts;
    for (const auto& s : source.multi)
      if (s.head == h && s.b == config.b) pts.emplace_back(s.n, s.transmitted.median);
    std::sort(pts.begin(), pts.end());
    std::set<double> sizes;
    for (const auto& p : pts) sizes.insert(p.first);
    if (sizes.size() != pts.size())
      throw std::invalid_argument("source run has repeated system sizes for head " + to_string(h));
    if (pts.size() < std::size_t(kAiccParameters + 2))
      throw std::invalid_argument("scaling needs at least " + std::to_string(kAiccParameters + 2) +
                                  " system sizes per head; head " + to_string(h) + " has " +
                                  std::to_string(pts.size()));
    series.emplace_back(to_string(h), std::move(pts));
  }
  return delta_aicc_table(series);
}

std::vector<DeltaAiccRow> run_scaling_dir(const std::string& source_dir,
                                          const std::string& out_dir) {
  ExperimentConfig config = load_config(source_dir);
  const RunRecord source = load_run(source_dir);
  const WallClock clock("scaling");
  auto table = run_scaling(config, source);
  config.out_dir = out_dir;
  RecordStore store = open_run(config);
  json rows = json::array();
  for (const auto& row : table) {
    json deltas = json::array();
    for (double d : row.delta) deltas.push_back(num(d));
    rows.push_back({{"label", row.label},
                    {"delta", deltas},
                    {"aicc_best", num(row.aicc_best)},
                    {"winner", to_string(row.winner)}});
  }
  store.append({{"key", "scaling/b=" + std::to_string(config.b)}, {"type", "scaling"},
                {"b", config.b}, {"rows", rows}});
  write_file(fs::path(out_dir) / "scaling.csv", to_csv(table));
  clock.write(out_dir);
  return table;
}

namespace {

ShapeParams null_params(SpectrumKind kind, int m) {
  ShapeParams p;
  if (kind == SpectrumKind::LowRank) p.rank = std::min(p.rank, m);
  if (kind == SpectrumKind::Block) {
    // Four near-equal blocks with geometric masses.
    const int blocks = std::min(4, m);
    for (int i = 0; i < blocks; ++i)
      p.blocks.push_back({m / blocks + (i < m % blocks ? 1 : 0), std::ldexp(1.0, blocks - 1 - i)});
  }
  return p;
}

}  // namespace

std::vector<MenuRow> run_nullmodel_suite(const ExperimentConfig& config) {
  validate(config);
  const WallClock clock("nullmodel");
  RecordStore store = open_run(config);
  std::vector<MenuRow> rows(config.null_kinds.size());
  std::vector<bool> cached(rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SpectrumKind kind = parse_spectrum_kind(config.null_kinds[i]);
    rows[i] = spectral_menu_row(kind, config.null_m, null_params(kind, config.null_m));
    if (const json* r = store.find("nullmodel/" + config.null_kinds[i])) {
      OverlapEstimate mc;
      mc.mean_square = from_num(r->at("mc_mean_square"));
      mc.standard_error = from_num(r->at("mc_standard_error"));
      mc.closed_form = from_num(r->at("closed_form"));
      mc.samples = r->at("samples");
      rows[i].monte_carlo = mc;
      cached[i] = true;
    }
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    if (cached[i]) return;
    Rng rng = make_rng(derive_seed(config.master_seed, "nullmodel",
                                   {std::uint64_t(rows[i].shape.kind), std::uint64_t(config.null_m)}));
    rows[i].monte_carlo = rms_overlap(rows[i].shape, rows[i].shape, config.null_samples, rng);
  });
  std::ostringstream os;
  os << "shape,params,m,d_eff,predicted_rms_overlap,bounds_ok,block_sum,closed_form_rms,"
        "mc_rms,mc_rms_standard_error,samples\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& mc = *r.monte_carlo;
    if (!cached[i])
      store.append({{"key", "nullmodel/" + config.null_kinds[i]},
                    {"type", "nullmodel"},
                    {"shape", config.null_kinds[i]},
                    {"params", r.shape.params.describe(r.shape.kind)},
                    {"m", config.null_m},
                    {"d_eff", num(r.d_eff)},
                    {"mc_mean_square", num(mc.mean_square)},
                    {"mc_standard_error", num(mc.standard_error)},
                    {"closed_form", num(mc.closed_form)},
                    {"samples", mc.samples}});
    os << config.null_kinds[i] << ',' << r.shape.params.describe(r.shape.kind) << ','
       << config.null_m << ',' << fmt(r.d_eff) << ',' << fmt(r.predicted_overlap) << ','
       << (r.bounds_ok ? 1 : 0) << ',' << fmt(r.block_sum) << ',' << fmt(std::sqrt(mc.closed_form))
       << ',' << fmt(mc.rms()) << ',' << fmt(mc.rms_standard_error()) << ',' << mc.samples << '\n';
  }
  write_file(fs::path(config.out_dir) / "nullmodel.csv", os.str());
  clock.write(config.out_dir);
  return rows;
}

RunRecord run_b_sweep(const ExperimentConfig& config) {
  validate(config);
  std::set<int> distinct(config.b_list.begin(), config.b_list.end());
  require(distinct.size() >= 2 && distinct.size() == config.b_list.size(),
          "b sweep needs at least two distinct block counts");
  const int n_min = *std::min_element(config.n_list.begin(), config.n_list.end());
  for (int b : config.b_list)
    require(b >= 1 && b <= n_min, "every b in b_list must satisfy 1 <= b <= min(n_list)");
  ExperimentConfig multi = config;
  multi.probe = ProbeKind::Multi;
  validate(multi);
  const WallClock clock("bsweep");
  RecordStore store = open_run(config);
  TeacherCache teachers{config, {}};
  RunRecord rec;
  rec.config_checksum = config_checksum(config);
  for (int b : config.b_list) {
    run_probe_into(config, ProbeKind::Single, b, store, teachers, rec);
    run_probe_into(multi, ProbeKind::Multi, b, store, teachers, rec);
  }
  write_outputs(config.out_dir, rec);

  std::ostringstream os;
  os << "probe,b,n,head,width,M_star,resolved_exact_median,resolved_shot_median,"
        "sigma_max_median,transmittance_median\n";
  for (const auto& s : rec.single)
    os << "single," << s.b << ',' << s.n << ',' << to_string(s.head) << ',' << s.width << ','
       << fmt(s.frontier.m_star) << ',' << fmt(s.resolved_exact_median) << ','
       << fmt(s.resolved_shot_median) << ",,\n";
  for (const auto& s : rec.multi)
    os << "multi," << s.b << ',' << s.n << ',' << to_string(s.head) << ',' << s.width << ','
       << (s.frontier ? fmt(s.frontier->m_star) : "") << ',' << fmt(s.transmitted.median) << ','
       << (s.shot_transmitted ? fmt(s.shot_transmitted->median) : "") << ','
       << fmt(s.sigma_max.median) << ',' << fmt(s.transmittance.median) << '\n';
  write_file(fs::path(config.out_dir) / "bsweep.csv", os.str());
  clock.write(config.out_dir);
  return rec;
}

// ---------------------------------------------------------------------------
// Loading and reporting

ExperimentConfig load_config(const std::string& dir) {
  const json j = json::parse(read_file(fs::path(dir) / "config.json"));
  ExperimentConfig c = config_from_json(j);
  c.out_dir = dir;
  if (j.value("config_checksum", std::uint64_t(0)) != config_checksum(c))
    throw std::runtime_error(dir + "/config.json checksum does not match its content");
  return c;
}

RunRecord load_run(const std::string& dir) {
  const ExperimentConfig c = load_config(dir);
  const RecordStore store(dir, config_checksum(c), false);
  RunRecord rec;
  rec.config_checksum = config_checksum(c);
  for (const auto& r : store.records()) {
    if (r.at("type") != "summary") continue;
    const std::string key = r.at("key").get<std::string>();
    const json* exact = store.find(key.substr(0, key.rfind('/')) + "/exact");
    if (!exact) throw std::runtime_error("summary without exact record: " + key);
    if (r.at("probe") == "single")
      rec.single.push_back(single_from_records(*exact, r, c.kappa, c.tau));
    else
      rec.multi.push_back(multi_from_records(*exact, r, c.kappa, c.tau));
  }
  return rec;
}

json summarize_run(const std::string& dir) {
  const ExperimentConfig c = load_config(dir);
  const RunRecord rec = load_run(dir);
  json out{{"run", dir}, {"config_checksum", rec.config_checksum}, {"config", to_json(c)}};
  out["single"] = json::array();
  for (const auto& s : rec.single)
    out["single"].push_back({{"b", s.b},
                             {"n", s.n},
                             {"head", to_string(s.head)},
                             {"width", s.width},
                             {"M_star", s.frontier.m_star ? json(*s.frontier.m_star) : json()},
                             {"resolved_exact_median", num(s.resolved_exact_median)},
                             {"resolved_shot_median", s.resolved_shot_median
                                                          ? num(*s.resolved_shot_median)
                                                          : json()}});
  out["multi"] = json::array();
  for (const auto& s : rec.multi)
    out["multi"].push_back(
        {{"b", s.b},
         {"n", s.n},
         {"head", to_string(s.head)},
         {"width", s.width},
         {"M_star", s.frontier && s.frontier->m_star ? json(*s.frontier->m_star) : json()},
         {"sigma_max_median", num(s.sigma_max.median)},
         {"transmittance_median", num(s.transmittance.median)},
         {"g_norm_median", num(s.g_norm.median)},
         {"transmitted_median", num(s.transmitted.median)},
         {"variance_bridge_holds", s.bridge.holds}});
  return out;
}

}  // namespace qgt
