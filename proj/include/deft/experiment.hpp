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

#ifndef DEFT_EXPERIMENT_HPP_
#define DEFT_EXPERIMENT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deft/partition.hpp"
#include "deft/preserver.hpp"
#include "deft/simulator.hpp"

namespace deft {

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> s = {"wfbp", "priority", "nonsequential", "deft", "deft_single_link"};
  return s;
}

struct SweepPoint {
  /// Link bandwidth relative to the profiled cluster.
  double bandwidth_scale = 1.0;
  std::int64_t partition_size = 6'500'000;
  /// Worker count; 0 keeps the profiled communication times.
  int workers = 0;

  bool operator==(const SweepPoint&) const = default;
};

struct ExperimentConfig {
  std::filesystem::path profile_path;
  std::filesystem::path cluster_path;
  std::vector<std::string> schemes;
  int iterations = 100;
  std::uint64_t seed = 0;
  PartitionConfig partition;
  /// Unset values follow the cluster: mu is the slowest link's ratio,
  /// the startup cost is the fast link's.
  std::optional<double> partition_mu;
  std::optional<Micros> comm_startup_us;
  std::optional<WalkParams> walk;
  FeedbackOptions feedback;
  SimOptions sim;
  std::vector<double> bandwidth_scales;
  std::vector<std::int64_t> partition_sizes;
  std::vector<int> workers;
  /// Worker count the profile was measured with.
  int reference_workers = 16;
};

void validate(const ExperimentConfig& cfg);
/// Relative paths resolve against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Cartesian product of the sweep axes, bandwidth outermost.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// Profile and cluster as seen at one sweep point.
ModelProfile apply_sweep(const ModelProfile& profile, const SweepPoint& pt, const ExperimentConfig& cfg);
ClusterConfig apply_sweep(const ClusterConfig& cluster, const SweepPoint& pt, const ExperimentConfig& cfg);

struct RunRecord {
  std::string scheme;
  std::size_t point_index = 0;
  SweepPoint point;
  std::size_t n_buckets = 0;
  std::vector<LinkSpec> links;
  SimReport report;
  std::optional<ConvergenceVerdict> verdict;
};

struct ReportBundle {
  std::string config_hash;
  std::string profile_name;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> schemes;
  std::vector<SweepPoint> points;
  /// Point-major, schemes in config order.
  std::vector<RunRecord> runs;
};

/// Runs every scheme at every sweep point. Points run in parallel.
ReportBundle run_experiment(const ExperimentConfig& cfg);

/// Runs one scheme at one point; errors carry the (scheme, point) context.
RunRecord run_scheme(const ExperimentConfig& cfg, const ModelProfile& profile, const ClusterConfig& cluster,
                     const std::string& scheme, std::size_t point_index, const SweepPoint& pt);

/// Speedup reference: wfbp when present, otherwise the first scheme.
std::string baseline_scheme(const ReportBundle& bundle);

nlohmann::json summary_json(const ReportBundle& bundle);
std::string comparison_csv(const ReportBundle& bundle);

/// summary.json, comparison.csv, runs/<scheme>_<point>/{timeline.jsonl,
/// trace.json} and plotdata/*.csv.
void emit_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir);

/// 64-bit FNV-1a, lowercase hex.
std::string fnv1a_hex(const std::string& data);

}  // namespace deft

#endif  // DEFT_EXPERIMENT_HPP_
