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

#ifndef DEFT_PROFILES_HPP_
#define DEFT_PROFILES_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace deft {

/// All simulated and planned times are integer microseconds.
using Micros = std::int64_t;

struct LinkSpec {
  std::string name;
  /// Slowdown relative to the fast link; the fast link has exactly 1.0.
  double speed_ratio_to_fast = 1.0;
  std::optional<double> bandwidth_bps;
  Micros startup_us = 0;

  bool operator==(const LinkSpec&) const = default;
};

struct ClusterConfig {
  std::vector<LinkSpec> links;

  /// Index of the link with speed_ratio_to_fast == 1.0.
  std::size_t fast_index() const;
  /// Largest speed ratio among the links (1.0 for a single link).
  double max_ratio() const;
};

/// One gradient bucket. Bucket 1 holds the layers nearest the input, so the
/// backward pass produces buckets in the order n, n-1, ..., 1 and the forward
/// pass consumes them in the order 1, ..., n.
struct BucketProfile {
  int id = 0;
  std::int64_t param_count = 0;
  Micros forward_us = 0;
  Micros backward_us = 0;
  Micros comm_fast_us = 0;

  bool operator==(const BucketProfile&) const = default;
};

struct ModelProfile {
  std::string name;
  std::int64_t batch_size = 1;
  double learning_rate = 0.01;
  std::vector<BucketProfile> buckets;

  std::size_t size() const { return buckets.size(); }
  const BucketProfile& bucket(int id) const { return buckets.at(static_cast<std::size_t>(id - 1)); }

  Micros total_forward() const;
  Micros total_backward() const;
  Micros total_compute() const { return total_forward() + total_backward(); }
  Micros total_comm_fast() const;
  std::int64_t total_params() const;

  bool operator==(const ModelProfile&) const = default;
};

/// Communication time of `bucket` on `link` under the constant-ratio model.
Micros comm_time_on_link(const BucketProfile& bucket, const LinkSpec& link);

/// Sum of per-bucket communication time on `link` divided by total compute.
double coverage_rate(const ModelProfile& profile, const LinkSpec& link);

/// Throws ValidationError on the first violated invariant.
void validate(const ModelProfile& profile);
void validate(const ClusterConfig& cluster);

ModelProfile profile_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ModelProfile& profile);
ModelProfile load_profile(const std::filesystem::path& path);
void save_profile(const ModelProfile& profile, const std::filesystem::path& path);

ClusterConfig cluster_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ClusterConfig& cluster);
ClusterConfig load_cluster(const std::filesystem::path& path);

/// Reads a whole file and parses it as JSON. Empty files and syntax errors
/// raise ValidationError("schema").
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace deft

#endif  // DEFT_PROFILES_HPP_
