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

#include "deft/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "deft/error.hpp"

namespace deft {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ValidationError("missing_field", where + ": missing field '" + key + "'");
  }
  return *it;
}

template <typename T>
T require_as(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError("wrong_type", where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::size_t ClusterConfig::fast_index() const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].speed_ratio_to_fast == 1.0) return i;
  }
  throw ValidationError("no_fast_link", "cluster has no link with speed_ratio_to_fast == 1.0");
}

double ClusterConfig::max_ratio() const {
  double r = 1.0;
  for (const auto& l : links) r = std::max(r, l.speed_ratio_to_fast);
  return r;
}

Micros ModelProfile::total_forward() const {
  return std::accumulate(buckets.begin(), buckets.end(), Micros{0},
                         [](Micros s, const BucketProfile& b) { return s + b.forward_us; });
}

Micros ModelProfile::total_backward() const {
  return std::accumulate(buckets.begin(), buckets.end(), Micros{0},
                         [](Micros s, const BucketProfile& b) { return s + b.backward_us; });
}

Micros ModelProfile::total_comm_fast() const {
  return std::accumulate(buckets.begin(), buckets.end(), Micros{0},
                         [](Micros s, const BucketProfile& b) { return s + b.comm_fast_us; });
}

std::int64_t ModelProfile::total_params() const {
  return std::accumulate(buckets.begin(), buckets.end(), std::int64_t{0},
                         [](std::int64_t s, const BucketProfile& b) { return s + b.param_count; });
}

Micros comm_time_on_link(const BucketProfile& bucket, const LinkSpec& link) {
  return static_cast<Micros>(std::llround(static_cast<double>(bucket.comm_fast_us) * link.speed_ratio_to_fast));
}

double coverage_rate(const ModelProfile& profile, const LinkSpec& link) {
  validate(profile);
  const Micros compute = profile.total_compute();
  if (compute <= 0) {
    throw ValidationError("zero_compute", "profile '" + profile.name + "' has zero total compute time");
  }
  // Summed in double so that the ratio is exactly linear in the link factor.
  double comm = 0.0;
  for (const auto& b : profile.buckets) {
    comm += static_cast<double>(b.comm_fast_us) * link.speed_ratio_to_fast;
  }
  return comm / static_cast<double>(compute);
}

void validate(const ModelProfile& profile) {
  const std::string where = "profile '" + profile.name + "'";
  if (profile.buckets.empty()) throw ValidationError("empty_profile", where + " has no buckets");
  if (profile.batch_size < 1) throw ValidationError("invalid_batch_size", where + ": batch_size must be >= 1");
  if (!(profile.learning_rate > 0.0)) {
    throw ValidationError("invalid_learning_rate", where + ": learning_rate must be > 0");
  }
  for (std::size_t i = 0; i < profile.buckets.size(); ++i) {
    const auto& b = profile.buckets[i];
    const std::string bw = where + " bucket " + std::to_string(b.id);
    if (b.id != static_cast<int>(i + 1)) {
      throw ValidationError("non_contiguous_ids",
                            where + ": bucket ids must be 1..n without gaps (found " + std::to_string(b.id) +
                                " at position " + std::to_string(i + 1) + ")");
    }
    if (b.param_count <= 0) throw ValidationError("non_positive_params", bw + ": param_count must be > 0");
    if (b.forward_us < 0 || b.backward_us < 0) {
      throw ValidationError("negative_time", bw + ": forward/backward times must be >= 0");
    }
    if (b.comm_fast_us <= 0) throw ValidationError("non_positive_time", bw + ": comm_fast_us must be > 0");
  }
}

void validate(const ClusterConfig& cluster) {
  if (cluster.links.empty()) throw ValidationError("empty_cluster", "cluster config has no links");
  int fast = 0;
  for (const auto& l : cluster.links) {
    if (!(l.speed_ratio_to_fast >= 1.0)) {
      throw ValidationError("invalid_link", "link '" + l.name + "': speed_ratio_to_fast must be >= 1");
    }
    if (l.bandwidth_bps && !(*l.bandwidth_bps > 0.0)) {
      throw ValidationError("invalid_link", "link '" + l.name + "': bandwidth must be > 0");
    }
    if (l.startup_us < 0) throw ValidationError("invalid_link", "link '" + l.name + "': startup must be >= 0");
    if (l.speed_ratio_to_fast == 1.0) ++fast;
  }
  if (fast != 1) {
    throw ValidationError("no_fast_link", "cluster config needs exactly one link with speed_ratio_to_fast == 1.0");
  }
}

ModelProfile profile_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("schema", "profile document must be a JSON object");
  ModelProfile p;
  p.name = require_as<std::string>(doc, "name", "profile");
  const std::string where = "profile '" + p.name + "'";
  p.batch_size = require_as<std::int64_t>(doc, "batch_size", where);
  p.learning_rate = require_as<double>(doc, "learning_rate", where);
  const json& buckets = require(doc, "buckets", where);
  if (!buckets.is_array()) throw ValidationError("wrong_type", where + ": 'buckets' must be an array");
  for (const auto& jb : buckets) {
    BucketProfile b;
    b.id = require_as<int>(jb, "id", where + " bucket");
    const std::string bw = where + " bucket " + std::to_string(b.id);
    b.param_count = require_as<std::int64_t>(jb, "param_count", bw);
    b.forward_us = require_as<Micros>(jb, "forward_us", bw);
    b.backward_us = require_as<Micros>(jb, "backward_us", bw);
    b.comm_fast_us = require_as<Micros>(jb, "comm_fast_us", bw);
    p.buckets.push_back(b);
  }
  std::stable_sort(p.buckets.begin(), p.buckets.end(),
                   [](const BucketProfile& a, const BucketProfile& b) { return a.id < b.id; });
  validate(p);
  return p;
}

json to_json(const ModelProfile& profile) {
  json buckets = json::array();
  for (const auto& b : profile.buckets) {
    buckets.push_back({{"id", b.id},
                       {"param_count", b.param_count},
                       {"forward_us", b.forward_us},
                       {"backward_us", b.backward_us},
                       {"comm_fast_us", b.comm_fast_us}});
  }
  return {{"name", profile.name},
          {"batch_size", profile.batch_size},
          {"learning_rate", profile.learning_rate},
          {"buckets", std::move(buckets)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ValidationError("schema", "'" + path.string() + "' is empty");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("schema", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ModelProfile load_profile(const std::filesystem::path& path) {
  return profile_from_json(read_json_file(path));
}

void save_profile(const ModelProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << to_json(profile).dump(2) << '\n';
}

ClusterConfig cluster_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("schema", "cluster document must be a JSON object");
  const json& links = require(doc, "links", "cluster");
  if (!links.is_array()) throw ValidationError("wrong_type", "cluster: 'links' must be an array");
  ClusterConfig c;
  for (const auto& jl : links) {
    LinkSpec l;
    l.name = require_as<std::string>(jl, "name", "cluster link");
    l.speed_ratio_to_fast = require_as<double>(jl, "speed_ratio_to_fast", "link '" + l.name + "'");
    if (auto it = jl.find("bandwidth_bps"); it != jl.end() && !it->is_null()) l.bandwidth_bps = it->get<double>();
    if (auto it = jl.find("startup_us"); it != jl.end() && !it->is_null()) l.startup_us = it->get<Micros>();
    c.links.push_back(std::move(l));
  }
  validate(c);
  return c;
}

json to_json(const ClusterConfig& cluster) {
  json links = json::array();
  for (const auto& l : cluster.links) {
    json jl = {{"name", l.name}, {"speed_ratio_to_fast", l.speed_ratio_to_fast}, {"startup_us", l.startup_us}};
    if (l.bandwidth_bps) jl["bandwidth_bps"] = *l.bandwidth_bps;
    links.push_back(std::move(jl));
  }
  return {{"links", std::move(links)}};
}

ClusterConfig load_cluster(const std::filesystem::path& path) {
  return cluster_from_json(read_json_file(path));
}

}  // namespace deft
