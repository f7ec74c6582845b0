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

#include "deft/partition.hpp"

#include <algorithm>

#include "deft/error.hpp"

namespace deft {

namespace {

// floor(total * num / den) without overflow.
Micros scaled(Micros total, std::int64_t num, std::int64_t den) {
  return static_cast<Micros>(static_cast<__int128>(total) * num / den);
}

std::vector<BucketProfile> split(const BucketProfile& b, std::int64_t pieces) {
  std::vector<BucketProfile> out;
  out.reserve(static_cast<std::size_t>(pieces));
  const std::int64_t base = b.param_count / pieces;
  const std::int64_t extra = b.param_count % pieces;
  std::int64_t cum = 0;
  BucketProfile prev_cum{};
  for (std::int64_t i = 0; i < pieces; ++i) {
    cum += base + (i < extra ? 1 : 0);
    BucketProfile now_cum;
    now_cum.param_count = cum;
    now_cum.forward_us = scaled(b.forward_us, cum, b.param_count);
    now_cum.backward_us = scaled(b.backward_us, cum, b.param_count);
    now_cum.comm_fast_us = scaled(b.comm_fast_us, cum, b.param_count);
    BucketProfile piece;
    piece.param_count = now_cum.param_count - prev_cum.param_count;
    piece.forward_us = now_cum.forward_us - prev_cum.forward_us;
    piece.backward_us = now_cum.backward_us - prev_cum.backward_us;
    piece.comm_fast_us = now_cum.comm_fast_us - prev_cum.comm_fast_us;
    out.push_back(piece);
    prev_cum = now_cum;
  }
  return out;
}

bool fits(Micros comm, double bound, const PartitionConfig& cfg) {
  return static_cast<double>(comm + cfg.comm_overhead_us) < bound;
}

void renumber(std::vector<BucketProfile>& buckets) {
  for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i].id = static_cast<int>(i + 1);
}

}  // namespace

void validate(const PartitionConfig& cfg) {
  if (cfg.partition_size <= 0) throw ValidationError("invalid_partition", "partition_size must be > 0");
  if (!(cfg.mu >= 1.0)) throw ValidationError("invalid_partition", "mu must be >= 1");
  if (cfg.comm_startup_us < 0 || cfg.comm_overhead_us < 0) {
    throw ValidationError("invalid_partition", "startup and overhead must be >= 0");
  }
}

double capacity_bound(const ModelProfile& profile, const PartitionConfig& cfg) {
  return static_cast<double>(profile.total_forward()) / cfg.mu;
}

ModelProfile partition_buckets(const ModelProfile& profile, const PartitionConfig& cfg) {
  validate(profile);
  validate(cfg);
  const double bound = capacity_bound(profile, cfg);
  ModelProfile out = profile;
  out.buckets.clear();
  for (const auto& b : profile.buckets) {
    const std::int64_t by_size = (b.param_count + cfg.partition_size - 1) / cfg.partition_size;
    const double room = bound - static_cast<double>(cfg.comm_overhead_us);
    std::int64_t pieces = by_size;
    if (room > 1.0) {
      pieces = std::max(pieces, static_cast<std::int64_t>(static_cast<double>(b.comm_fast_us) / room));
    }
    pieces = std::max<std::int64_t>(pieces, 1);
    const std::int64_t limit = std::min(b.param_count, b.comm_fast_us);
    std::vector<BucketProfile> parts;
    for (;; ++pieces) {
      if (pieces > limit) {
        throw InfeasibleError(b.id, "bucket " + std::to_string(b.id) + " of '" + profile.name +
                                        "' cannot be split below the smallest knapsack capacity (" +
                                        std::to_string(bound) + " us)");
      }
      parts = split(b, pieces);
      const bool ok = std::all_of(parts.begin(), parts.end(), [&](const BucketProfile& p) {
        return p.comm_fast_us > 0 && p.param_count <= cfg.partition_size && fits(p.comm_fast_us, bound, cfg);
      });
      if (ok) break;
    }
    out.buckets.insert(out.buckets.end(), parts.begin(), parts.end());
  }
  renumber(out.buckets);
  return out;
}

ModelProfile fuse_buckets(const ModelProfile& profile, Micros comm_startup, const PartitionConfig& cfg) {
  validate(profile);
  if (comm_startup < 0) throw ValidationError("invalid_partition", "comm_startup must be >= 0");
  if (comm_startup == 0) return profile;
  const double bound = capacity_bound(profile, cfg);
  ModelProfile out = profile;
  out.buckets.clear();
  BucketProfile cur = profile.buckets.front();
  for (std::size_t i = 1; i < profile.buckets.size(); ++i) {
    const auto& next = profile.buckets[i];
    if (fits(cur.comm_fast_us + next.comm_fast_us, bound, cfg)) {
      cur.param_count += next.param_count;
      cur.forward_us += next.forward_us;
      cur.backward_us += next.backward_us;
      cur.comm_fast_us += next.comm_fast_us;
    } else {
      out.buckets.push_back(cur);
      cur = next;
    }
  }
  out.buckets.push_back(cur);
  renumber(out.buckets);
  return out;
}

Micros modeled_comm_cost(const ModelProfile& profile, Micros comm_startup) {
  return profile.total_comm_fast() + comm_startup * static_cast<Micros>(profile.size());
}

}  // namespace deft
