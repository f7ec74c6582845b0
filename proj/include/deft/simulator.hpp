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

#ifndef DEFT_SIMULATOR_HPP_
#define DEFT_SIMULATOR_HPP_

#include <map>
#include <string>
#include <vector>

#include "deft/scheduler.hpp"

namespace deft {

enum class EventKind { kForwardCompute, kBackwardCompute, kCommunication, kUpdate };

/// Stream of an event: -1 is the compute stream, l >= 0 is link l. Updates
/// sit on the compute stream with zero duration.
struct Event {
  EventKind kind = EventKind::kForwardCompute;
  int bucket_id = 0;
  int link = -1;
  Micros start = 0;
  Micros end = 0;
  int iteration = 0;
  /// Gradient group of a transfer or update.
  int origin_iteration = 0;
  int merge_count = 1;

  bool operator==(const Event&) const = default;
};

enum class CommModel {
  /// fast-link time scaled by the link's speed ratio, plus startup.
  kRatio,
  /// startup + 4 bytes per parameter over the link bandwidth.
  kAffine,
};

struct SimOptions {
  Micros slow_link_copy_overhead_us = 0;
  CommModel comm_model = CommModel::kRatio;
  /// Uniform multiplicative noise in [1 - jitter, 1 + jitter] on every
  /// duration. Zero disables it.
  double jitter = 0.0;
  std::uint64_t seed = 0;
  /// Leading iterations excluded from the steady-state mean.
  int warmup = 1;
};

struct SimReport {
  std::string profile_name;
  std::int64_t batch_size = 1;
  int iterations = 0;
  /// Forward start of iteration k+1 minus that of k; the last entry runs to
  /// the end of the timeline.
  std::vector<Micros> iteration_times;
  double steady_iteration_us = 0.0;
  Micros makespan = 0;
  Micros compute_busy = 0;
  Micros bubble_time = 0;
  double bubble_ratio = 0.0;
  /// Samples per second.
  double throughput = 0.0;
  int updates_performed = 0;
  double update_frequency = 0.0;
  std::vector<Event> timeline;
};

/// Plays `iterations` decisions on one compute stream plus one stream per
/// link. Deterministic for a given seed.
SimReport simulate(const ModelProfile& profile, const std::vector<LinkSpec>& links,
                   const std::vector<ScheduleDecision>& decisions, int iterations, const SimOptions& options = {});

/// Throws Error(kInvariant) if two events on one stream overlap or a fresh
/// transfer starts before its gradient exists.
void check_timeline(const SimReport& report);

struct ComparisonRow {
  std::string scheme;
  double steady_iteration_us = 0.0;
  double speedup = 1.0;
  double bubble_ratio = 0.0;
  double throughput = 0.0;
  double update_frequency = 0.0;
};

/// Speedup of each scheme relative to `baseline`, rows in key order.
std::vector<ComparisonRow> compare(const std::map<std::string, SimReport>& reports, const std::string& baseline);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
nlohmann::json to_json(const ComparisonRow& row);

const char* to_string(EventKind k);
nlohmann::json to_json(const Event& e);
std::string timeline_jsonl(const SimReport& report);
/// Chrome trace-event document ("ph":"X" complete events).
nlohmann::json chrome_trace(const SimReport& report, const std::vector<LinkSpec>& links);
nlohmann::json summary_json(const SimReport& report);

}  // namespace deft

#endif  // DEFT_SIMULATOR_HPP_
