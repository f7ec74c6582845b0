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

#ifndef DEFT_TRACE_HPP_
#define DEFT_TRACE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "deft/profiles.hpp"

namespace deft {

enum class TraceThread { kForward, kBackward, kComputeStream, kCommStream };
enum class OperatorKind { kComputeLaunch, kKernel, kCommunication };

/// One operator record. CPU-side operators (forward/backward threads) share
/// their external_id with the kernel or collective they launch.
struct OperatorEvent {
  std::string name;
  TraceThread thread = TraceThread::kForward;
  std::int64_t external_id = 0;
  Micros start_us = 0;
  Micros end_us = 0;
  OperatorKind kind = OperatorKind::kComputeLaunch;

  bool operator==(const OperatorEvent&) const = default;
};

struct TraceModelInfo {
  std::string name;
  std::int64_t batch_size = 1;
  double learning_rate = 0.01;

  bool operator==(const TraceModelInfo&) const = default;
};

struct OperatorTrace {
  std::vector<OperatorEvent> events;
  /// Start time of each iteration; the last iteration runs to the end of
  /// the trace.
  std::vector<Micros> iteration_boundaries_us;
  std::optional<TraceModelInfo> model;
};

/// Name suffix that ties a gradient operator to its forward operator.
inline constexpr const char* kBackwardSuffix = "Backward";

/// Emits a WFBP-ordered operator trace for `iterations` iterations whose
/// reconstruction yields `profile`.
OperatorTrace emit_trace(const ModelProfile& profile, int iterations);

/// Bucket-level profile for every iteration in the trace.
std::vector<ModelProfile> reconstruct_iterations(const OperatorTrace& trace, std::size_t n_buckets);

/// Per-bucket median over all iterations (lower median for even counts).
ModelProfile reconstruct_buckets(const OperatorTrace& trace, std::size_t n_buckets);

nlohmann::json to_json(const OperatorTrace& trace);
OperatorTrace trace_from_json(const nlohmann::json& doc);
OperatorTrace load_trace(const std::filesystem::path& path);

}  // namespace deft

#endif  // DEFT_TRACE_HPP_
