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

#ifndef DEFT_SCHEDULER_HPP_
#define DEFT_SCHEDULER_HPP_

#include <string>
#include <vector>

#include "deft/partition.hpp"
#include "deft/profiles.hpp"

namespace deft {

/// A bucket gradient waiting for synchronization. Merged gradients cover
/// iterations origin_iteration .. origin_iteration + merge_count - 1.
struct PendingBucket {
  int bucket_id = 0;
  int merge_count = 1;
  int origin_iteration = 0;

  bool operator==(const PendingBucket&) const = default;
};

struct QueueState {
  std::vector<PendingBucket> current_queue;
  std::vector<PendingBucket> future_queue;
};

/// One transfer in a stage plan. Fresh tasks carry gradients produced in
/// the same backward stage and may not start before that bucket's backward
/// computation ends; old tasks have no compute dependency.
struct CommTask {
  int bucket_id = 0;
  int origin_iteration = 0;
  int merge_count = 1;
  bool fresh = false;

  bool operator==(const CommTask&) const = default;
};

/// A parameter update applying every bucket of one gradient group.
struct UpdateEvent {
  int origin_iteration = 0;
  int merge_count = 1;

  bool operator==(const UpdateEvent&) const = default;
};

enum class StageCase { kNone = 0, kCase1 = 1, kCase2 = 2, kCase3 = 3, kCase4 = 4 };

/// kBarrier: the next forward pass starts only after this iteration's
/// updates. kPerBucket: bucket j's next forward waits only for bucket j's
/// own synchronization.
enum class UpdateMode { kBarrier, kPerBucket };

struct ScheduleDecision {
  int iteration = 0;
  /// Per-link ordered transfers, indexed like the cluster's links.
  std::vector<std::vector<CommTask>> forward_plan;
  std::vector<std::vector<CommTask>> backward_plan;
  /// Buckets whose fresh gradient was folded into the future queue.
  std::vector<int> merged;
  /// Applied at the end of this iteration's backward stage, oldest first.
  std::vector<UpdateEvent> updates;
  bool update_performed = false;
  StageCase forward_case = StageCase::kNone;
  StageCase backward_case = StageCase::kNone;
  UpdateMode update_mode = UpdateMode::kBarrier;

  bool operator==(const ScheduleDecision&) const = default;
};

/// Stage capacities and link timing used by the planner.
struct CapacityModel {
  Micros forward_capacity = 0;
  Micros backward_capacity = 0;
  double capacity_multiplier = 1.0;
  std::vector<LinkSpec> links;
  /// Added to every transfer on a link other than the fast one.
  Micros slow_link_copy_overhead_us = 0;

  /// Stage capacity of link l in fast-link time: stage * multiplier / ratio.
  Micros link_capacity(Micros stage, std::size_t l) const;
  /// Planning weight of a bucket: fast-link time plus the fast link's startup.
  Micros item_weight(const BucketProfile& b) const;
  /// Wall time of one transfer of `b` on link l.
  Micros duration(const BucketProfile& b, std::size_t l) const;
};

CapacityModel make_capacity_model(const ModelProfile& profile, const ClusterConfig& cluster,
                                  double capacity_multiplier = 1.0, Micros slow_link_copy_overhead_us = 0);

/// Case 1: plans the current queue into the forward stage. Buckets that fit
/// nowhere stay queued.
void deft_schedule_forward(QueueState& state, const ModelProfile& profile, const CapacityModel& caps,
                           ScheduleDecision& decision);

/// Cases 2-4: plans the backward stage of `decision.iteration`, whose
/// freshly generated buckets are all of the profile's buckets.
void deft_schedule_backward(QueueState& state, const ModelProfile& profile, const CapacityModel& caps,
                            ScheduleDecision& decision);

/// Throws Error(kInvariant) when a queue holds a bucket twice, the future
/// queue mixes merge counts, or a planned bucket is still queued.
void check_state(const QueueState& state, const ScheduleDecision* last, std::size_t n_buckets);

/// Runs the two-queue state machine for `iterations` iterations. Throws
/// InfeasibleError when a bucket can never fit any stage.
std::vector<ScheduleDecision> schedule_deft(const ModelProfile& profile, const CapacityModel& caps,
                                            int iterations);

/// Updates per iteration over the first `window` decisions.
double effective_update_frequency(const std::vector<ScheduleDecision>& decisions, int window);

/// Verifies every bucket of every iteration in [0, covered) is transferred
/// exactly once and applied by exactly one update, in origin order.
/// Returns `covered`, the number of leading iterations fully delivered.
int check_gradient_conservation(const std::vector<ScheduleDecision>& decisions, std::size_t n_buckets);

/// Baseline schedules plus the (possibly repartitioned) profile they refer to.
struct ScheduledRun {
  ModelProfile profile;
  std::vector<ScheduleDecision> decisions;
};

/// Each bucket on the fast link as soon as its gradient exists; one
/// barrier update per iteration.
ScheduledRun baseline_wfbp(const ModelProfile& profile, const ClusterConfig& cluster, int iterations);

/// Partitioned blocks; whenever the link is free the ready block nearest the
/// input goes first. Transfers spill into the next forward stage.
ScheduledRun baseline_priority(const ModelProfile& profile, const ClusterConfig& cluster,
                               const PartitionConfig& partition, int iterations);

/// Partitioned and fused blocks; the largest ready block goes first while
/// backward runs, then blocks nearest the input.
ScheduledRun baseline_nonsequential(const ModelProfile& profile, const ClusterConfig& cluster,
                                    const PartitionConfig& partition, int iterations);

const char* to_string(StageCase c);
const char* to_string(UpdateMode m);

nlohmann::json to_json(const ScheduleDecision& d);
ScheduleDecision decision_from_json(const nlohmann::json& doc);
/// One JSON document per line.
std::string to_jsonl(const std::vector<ScheduleDecision>& decisions);
std::vector<ScheduleDecision> decisions_from_jsonl(const std::string& text);

}  // namespace deft

#endif  // DEFT_SCHEDULER_HPP_
