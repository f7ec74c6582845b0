/* Copyright 2026 The DeFT Scheduler Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "deft/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include "deft/error.hpp"

namespace deft {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return it->get<T>();
}

template <class T>
std::vector<T> list_or(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) throw ValidationError("wrong_type", std::string("'") + key + "' must be a list");
  if (it->empty()) throw ValidationError("empty_sweep", std::string("sweep axis '") + key + "' is empty");
  return it->get<std::vector<T>>();
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Re-raises a library error with the failing run named in the message.
[[noreturn]] void rethrow_with(const std::string& ctx) {
  try {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(e.kind(), ctx + ": " + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(e.bucket_id(), ctx + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), ctx + ": " + e.what());
  }
}

ClusterConfig fast_only(const ClusterConfig& c) {
  ClusterConfig out;
  out.links = {c.links.at(c.fast_index())};
  return out;
}

double worker_factor(int p) { return 2.0 * (p - 1) / p; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

json point_json(const SweepPoint& p) {
  return {{"bandwidth_scale", p.bandwidth_scale}, {"partition_size", p.partition_size}, {"workers", p.workers}};
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1) throw ValidationError("invalid_iterations", "iterations must be >= 1");
  if (cfg.schemes.empty()) throw ValidationError("empty_schemes", "at least one scheme is required");
  for (const auto& s : cfg.schemes) {
    if (std::find(known_schemes().begin(), known_schemes().end(), s) == known_schemes().end()) {
      throw ValidationError("unknown_scheme", "unknown scheme '" + s + "'");
    }
    if (std::count(cfg.schemes.begin(), cfg.schemes.end(), s) > 1) {
      throw ValidationError("duplicate_scheme", "scheme '" + s + "' listed twice");
    }
  }
  validate(cfg.partition);
  for (double b : cfg.bandwidth_scales) {
    if (!(b > 0.0)) throw ValidationError("invalid_sweep", "bandwidth_scale entries must be > 0");
  }
  for (auto ps : cfg.partition_sizes) {
    if (ps < 1) throw ValidationError("invalid_sweep", "partition_size entries must be >= 1");
  }
  for (int w : cfg.workers) {
    if (w < 2) throw ValidationError("invalid_sweep", "workers entries must be >= 2");
  }
  if (cfg.reference_workers < 2) throw ValidationError("invalid_sweep", "reference_workers must be >= 2");
  if (cfg.partition_mu && !(*cfg.partition_mu >= 1.0)) throw ValidationError("invalid_mu", "partition mu must be >= 1");
  if (cfg.comm_startup_us && *cfg.comm_startup_us < 0) {
    throw ValidationError("negative_time", "comm_startup_us must be >= 0");
  }
  if (cfg.feedback.horizon < 2) throw ValidationError("invalid_horizon", "feedback horizon must be >= 2");
}

ExperimentConfig experiment_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("schema", "experiment config must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (const char* key : {"profile", "cluster", "schemes"}) {
      if (!doc.contains(key)) throw ValidationError("missing_field", std::string("experiment config lacks '") + key + "'");
    }
    auto resolve = [&](const std::string& p) {
      fs::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    cfg.profile_path = resolve(doc.at("profile").get<std::string>());
    cfg.cluster_path = resolve(doc.at("cluster").get<std::string>());
    cfg.schemes = doc.at("schemes").get<std::vector<std::string>>();
    cfg.iterations = get_or(doc, "iterations", 100);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);

    if (auto it = doc.find("partition"); it != doc.end()) {
      const auto& p = *it;
      cfg.partition.partition_size = get_or<std::int64_t>(p, "partition_size", cfg.partition.partition_size);
      cfg.partition.enable_fusion = get_or(p, "enable_fusion", false);
      if (p.contains("mu")) cfg.partition_mu = p.at("mu").get<double>();
      if (p.contains("comm_startup_us")) cfg.comm_startup_us = p.at("comm_startup_us").get<Micros>();
    }
    if (auto it = doc.find("walk"); it != doc.end() && !it->is_null()) {
      const auto& w = *it;
      WalkParams wp;
      for (const char* key : {"s0", "eta", "mu_t", "sigma_t"}) {
        if (!w.contains(key)) throw ValidationError("missing_field", std::string("walk lacks '") + key + "'");
      }
      wp.s0 = w.at("s0").get<double>();
      wp.s_star = get_or(w, "s_star", 0.0);
      wp.eta = w.at("eta").get<double>();
      wp.mu_t = w.at("mu_t").get<double>();
      wp.sigma_t = w.at("sigma_t").get<double>();
      wp.batch = get_or<std::int64_t>(w, "batch", 0);
      cfg.walk = wp;
      cfg.feedback.epsilon = get_or(w, "epsilon", cfg.feedback.epsilon);
    }
    if (auto it = doc.find("feedback"); it != doc.end()) {
      cfg.feedback.max_retries = get_or(*it, "max_retries", cfg.feedback.max_retries);
      cfg.feedback.step = get_or(*it, "step", cfg.feedback.step);
      cfg.feedback.horizon = get_or(*it, "horizon", cfg.feedback.horizon);
    }
    if (auto it = doc.find("sweep"); it != doc.end()) {
      cfg.bandwidth_scales = list_or<double>(*it, "bandwidth_scale");
      cfg.partition_sizes = list_or<std::int64_t>(*it, "partition_size");
      cfg.workers = list_or<int>(*it, "workers");
      cfg.reference_workers = get_or(*it, "reference_workers", cfg.reference_workers);
    }
    if (auto it = doc.find("simulator"); it != doc.end()) {
      const auto& s = *it;
      cfg.sim.slow_link_copy_overhead_us = get_or<Micros>(s, "slow_link_copy_overhead_us", 0);
      const auto model = get_or<std::string>(s, "comm_model", "ratio");
      if (model == "ratio") {
        cfg.sim.comm_model = CommModel::kRatio;
      } else if (model == "affine") {
        cfg.sim.comm_model = CommModel::kAffine;
      } else {
        throw ValidationError("schema", "comm_model must be 'ratio' or 'affine'");
      }
      cfg.sim.jitter = get_or(s, "jitter", 0.0);
      cfg.sim.warmup = get_or(s, "warmup", 1);
    }
  } catch (const json::exception& e) {
    throw ValidationError("wrong_type", std::string("experiment config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment(const fs::path& path) {
  return experiment_from_json(read_json_file(path), path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  json doc = {{"profile", cfg.profile_path.filename().string()},
              {"cluster", cfg.cluster_path.filename().string()},
              {"schemes", cfg.schemes},
              {"iterations", cfg.iterations},
              {"seed", cfg.seed},
              {"partition",
               {{"partition_size", cfg.partition.partition_size}, {"enable_fusion", cfg.partition.enable_fusion}}},
              {"feedback",
               {{"epsilon", cfg.feedback.epsilon},
                {"max_retries", cfg.feedback.max_retries},
                {"step", cfg.feedback.step},
                {"horizon", cfg.feedback.horizon}}},
              {"sweep",
               {{"bandwidth_scale", cfg.bandwidth_scales},
                {"partition_size", cfg.partition_sizes},
                {"workers", cfg.workers},
                {"reference_workers", cfg.reference_workers}}},
              {"simulator",
               {{"slow_link_copy_overhead_us", cfg.sim.slow_link_copy_overhead_us},
                {"comm_model", cfg.sim.comm_model == CommModel::kAffine ? "affine" : "ratio"},
                {"jitter", cfg.sim.jitter},
                {"warmup", cfg.sim.warmup}}}};
  if (cfg.partition_mu) doc["partition"]["mu"] = *cfg.partition_mu;
  if (cfg.comm_startup_us) doc["partition"]["comm_startup_us"] = *cfg.comm_startup_us;
  if (cfg.walk) {
    doc["walk"] = {{"s0", cfg.walk->s0},       {"s_star", cfg.walk->s_star},   {"eta", cfg.walk->eta},
                   {"mu_t", cfg.walk->mu_t},   {"sigma_t", cfg.walk->sigma_t}, {"batch", cfg.walk->batch}};
  }
  return doc;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  const std::vector<double> bw = cfg.bandwidth_scales.empty() ? std::vector<double>{1.0} : cfg.bandwidth_scales;
  const std::vector<std::int64_t> ps =
      cfg.partition_sizes.empty() ? std::vector<std::int64_t>{cfg.partition.partition_size} : cfg.partition_sizes;
  const std::vector<int> wk = cfg.workers.empty() ? std::vector<int>{0} : cfg.workers;
  std::vector<SweepPoint> out;
  for (double b : bw) {
    for (auto p : ps) {
      for (int w : wk) out.push_back({b, p, w});
    }
  }
  return out;
}

ModelProfile apply_sweep(const ModelProfile& profile, const SweepPoint& pt, const ExperimentConfig& cfg) {
  if (cfg.sim.comm_model == CommModel::kAffine) return profile;
  double factor = 1.0 / pt.bandwidth_scale;
  if (pt.workers > 0) factor *= worker_factor(pt.workers) / worker_factor(cfg.reference_workers);
  if (factor == 1.0) return profile;
  ModelProfile out = profile;
  for (auto& b : out.buckets) {
    b.comm_fast_us = std::max<Micros>(1, std::llround(static_cast<double>(b.comm_fast_us) * factor));
  }
  return out;
}

ClusterConfig apply_sweep(const ClusterConfig& cluster, const SweepPoint& pt, const ExperimentConfig& cfg) {
  if (cfg.sim.comm_model != CommModel::kAffine) return cluster;
  double factor = pt.bandwidth_scale;
  if (pt.workers > 0) factor /= worker_factor(pt.workers) / worker_factor(cfg.reference_workers);
  ClusterConfig out = cluster;
  for (auto& l : out.links) {
    if (l.bandwidth_bps) *l.bandwidth_bps *= factor;
  }
  return out;
}

RunRecord run_scheme(const ExperimentConfig& cfg, const ModelProfile& profile, const ClusterConfig& cluster,
                     const std::string& scheme, std::size_t point_index, const SweepPoint& pt) {
  const std::string ctx = "scheme '" + scheme + "' at sweep point " + std::to_string(point_index);
  try {
    const ModelProfile p = apply_sweep(profile, pt, cfg);
    const ClusterConfig c = apply_sweep(cluster, pt, cfg);
    PartitionConfig part = cfg.partition;
    part.partition_size = pt.partition_size;
    part.comm_startup_us = cfg.comm_startup_us.value_or(c.links.at(c.fast_index()).startup_us);

    SimOptions so = cfg.sim;
    const auto scheme_idx = static_cast<std::uint64_t>(
        std::find(known_schemes().begin(), known_schemes().end(), scheme) - known_schemes().begin());
    so.seed = splitmix(cfg.seed ^ splitmix(point_index * 16 + scheme_idx));

    RunRecord rec;
    rec.scheme = scheme;
    rec.point_index = point_index;
    rec.point = pt;
    ScheduledRun run;
    ClusterConfig used = c;
    if (scheme == "wfbp") {
      run = baseline_wfbp(p, c, cfg.iterations);
    } else if (scheme == "priority") {
      run = baseline_priority(p, c, part, cfg.iterations);
    } else if (scheme == "nonsequential") {
      run = baseline_nonsequential(p, c, part, cfg.iterations);
    } else {
      const bool single = scheme == "deft_single_link";
      if (single) used = fast_only(c);
      PartitionConfig dp = part;
      dp.mu = single ? 1.0 : cfg.partition_mu.value_or(used.max_ratio());
      dp.comm_overhead_us = part.comm_startup_us;
      run.profile = partition_buckets(p, dp);
      if (dp.enable_fusion) run.profile = fuse_buckets(run.profile, dp.comm_startup_us, dp);
      auto caps = make_capacity_model(run.profile, used, 1.0, so.slow_link_copy_overhead_us);
      if (cfg.walk) {
        WalkParams walk = *cfg.walk;
        if (walk.batch == 0) walk.batch = p.batch_size;
        const auto fb = feedback_loop(run.profile, caps, walk, cfg.feedback);
        caps.capacity_multiplier = fb.verdict.final_capacity_multiplier;
        rec.verdict = fb.verdict;
      }
      run.decisions = schedule_deft(run.profile, caps, cfg.iterations);
    }
    rec.n_buckets = run.profile.size();
    rec.links = used.links;
    rec.report = simulate(run.profile, used.links, run.decisions, cfg.iterations, so);
    return rec;
  } catch (const Error&) {
    rethrow_with(ctx);
  }
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const ModelProfile profile = load_profile(cfg.profile_path);
  const ClusterConfig cluster = load_cluster(cfg.cluster_path);

  ReportBundle bundle;
  bundle.config_hash = fnv1a_hex(to_json(cfg).dump() + to_json(profile).dump() + to_json(cluster).dump());
  bundle.profile_name = profile.name;
  bundle.iterations = cfg.iterations;
  bundle.seed = cfg.seed;
  bundle.schemes = cfg.schemes;
  bundle.points = sweep_points(cfg);

  std::vector<std::future<std::vector<RunRecord>>> jobs;
  for (std::size_t i = 0; i < bundle.points.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      std::vector<RunRecord> recs;
      for (const auto& s : cfg.schemes) recs.push_back(run_scheme(cfg, profile, cluster, s, i, bundle.points[i]));
      return recs;
    }));
  }
  for (auto& j : jobs) {
    auto recs = j.get();
    for (auto& r : recs) bundle.runs.push_back(std::move(r));
  }
  return bundle;
}

std::string baseline_scheme(const ReportBundle& bundle) {
  if (std::find(bundle.schemes.begin(), bundle.schemes.end(), "wfbp") != bundle.schemes.end()) return "wfbp";
  return bundle.schemes.empty() ? std::string() : bundle.schemes.front();
}

namespace {

// Speedup of each run against the baseline scheme at the same point.
std::vector<double> speedups(const ReportBundle& b) {
  const auto base = baseline_scheme(b);
  std::map<std::size_t, double> ref;
  for (const auto& r : b.runs) {
    if (r.scheme == base) ref[r.point_index] = r.report.steady_iteration_us;
  }
  std::vector<double> out;
  for (const auto& r : b.runs) {
    const auto it = ref.find(r.point_index);
    out.push_back(it != ref.end() && r.report.steady_iteration_us > 0 ? it->second / r.report.steady_iteration_us
                                                                       : 0.0);
  }
  return out;
}

}  // namespace

json summary_json(const ReportBundle& b) {
  const auto sp = speedups(b);
  json runs = json::array();
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    const auto& r = b.runs[i];
    json m = summary_json(r.report);
    m["speedup"] = sp[i];
    runs.push_back({{"scheme", r.scheme},
                    {"point_index", r.point_index},
                    {"sweep", point_json(r.point)},
                    {"config_hash", b.config_hash},
                    {"n_buckets", r.n_buckets},
                    {"metrics", std::move(m)},
                    {"verdict", r.verdict ? to_json(*r.verdict) : json(nullptr)}});
  }
  json points = json::array();
  for (const auto& p : b.points) points.push_back(point_json(p));
  return {{"config_hash", b.config_hash},
          {"profile", b.profile_name},
          {"iterations", b.iterations},
          {"seed", b.seed},
          {"baseline", baseline_scheme(b)},
          {"schemes", b.schemes},
          {"sweep_points", std::move(points)},
          {"runs", std::move(runs)}};
}

std::string comparison_csv(const ReportBundle& b) {
  const auto sp = speedups(b);
  std::ostringstream os;
  os << "point_index,bandwidth_scale,partition_size,workers,scheme,steady_iteration_us,speedup,bubble_ratio,"
        "throughput,update_frequency\n";
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    const auto& r = b.runs[i];
    os << r.point_index << ',' << fixed(r.point.bandwidth_scale, 4) << ',' << r.point.partition_size << ','
       << r.point.workers << ',' << r.scheme << ',' << fixed(r.report.steady_iteration_us, 3) << ','
       << fixed(sp[i], 4) << ',' << fixed(r.report.bubble_ratio, 6) << ',' << fixed(r.report.throughput, 3) << ','
       << fixed(r.report.update_frequency, 4) << '\n';
  }
  return os.str();
}

void emit_reports(const ReportBundle& b, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + out_dir.string() + "': " + ec.message());
  write_file(out_dir / "summary.json", summary_json(b).dump(2) + "\n");
  if (b.runs.empty()) return;
  write_file(out_dir / "comparison.csv", comparison_csv(b));

  for (const auto& r : b.runs) {
    const fs::path dir = out_dir / "runs" / (r.scheme + "_" + std::to_string(r.point_index));
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
    write_file(dir / "timeline.jsonl", timeline_jsonl(r.report));
    write_file(dir / "trace.json", chrome_trace(r.report, r.links).dump() + "\n");
  }

  const auto sp = speedups(b);
  const auto& first = b.points.front();
  std::ostringstream bw, ps;
  bw << "bandwidth_scale,scheme,steady_iteration_us,speedup\n";
  ps << "partition_size,scheme,steady_iteration_us,speedup\n";
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    const auto& r = b.runs[i];
    if (r.point.partition_size == first.partition_size && r.point.workers == first.workers) {
      bw << fixed(r.point.bandwidth_scale, 4) << ',' << r.scheme << ',' << fixed(r.report.steady_iteration_us, 3) << ','
         << fixed(sp[i], 4) << '\n';
    }
    if (r.point.bandwidth_scale == first.bandwidth_scale && r.point.workers == first.workers) {
      ps << r.point.partition_size << ',' << r.scheme << ',' << fixed(r.report.steady_iteration_us, 3) << ','
         << fixed(sp[i], 4) << '\n';
    }
  }
  fs::create_directories(out_dir / "plotdata", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create plotdata directory: " + ec.message());
  write_file(out_dir / "plotdata" / "speedup_vs_bandwidth.csv", bw.str());
  write_file(out_dir / "plotdata" / "speedup_vs_partition_size.csv", ps.str());
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace deft
