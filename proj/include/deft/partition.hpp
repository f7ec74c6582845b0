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

#ifndef DEFT_PARTITION_HPP_
#define DEFT_PARTITION_HPP_

#include "deft/profiles.hpp"

namespace deft {

struct PartitionConfig {
  std::int64_t partition_size = 6'500'000;
  /// Speed ratio of the slowest link; the smallest knapsack holds
  /// sum(forward) / mu of fast-link time.
  double mu = 1.0;
  bool enable_fusion = false;
  /// Per-operation launch cost used by the fusion cost model.
  Micros comm_startup_us = 0;
  /// Fixed per-transfer time added to a bucket's payload when checking it
  /// against the smallest knapsack.
  Micros comm_overhead_us = 0;
};

void validate(const PartitionConfig& cfg);

/// sum(forward) / mu. Every bucket must satisfy comm + overhead < bound.
double capacity_bound(const ModelProfile& profile, const PartitionConfig& cfg);

/// Splits buckets until each holds at most partition_size parameters and
/// fits strictly inside the smallest knapsack. Splits divide every time
/// proportionally to parameter share, so totals are conserved exactly.
/// Throws InfeasibleError when a bucket cannot be split small enough.
ModelProfile partition_buckets(const ModelProfile& profile, const PartitionConfig& cfg);

/// Greedy adjacent merging under the cost model payload + one startup per
/// operation. A merge is kept only if the result still fits the smallest
/// knapsack. No-op when the startup cost is zero.
ModelProfile fuse_buckets(const ModelProfile& profile, Micros comm_startup, const PartitionConfig& cfg);

/// Sum over buckets of payload + startup.
Micros modeled_comm_cost(const ModelProfile& profile, Micros comm_startup);

}  // namespace deft

#endif  // DEFT_PARTITION_HPP_
