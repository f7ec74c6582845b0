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

#include "deft/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "deft/error.hpp"
#include "deft/knapsack.hpp"

namespace deft {

using nlohmann::json;

Micros CapacityModel::link_capacity(Micros stage, std::size_t l) const {
  const double ratio = links.at(l).speed_ratio_to_fast;
  return static_cast<Micros>(std::floor(static_cast<double>(stage) * capacity_multiplier / ratio));
}

Micros CapacityModel::item_weight(const BucketProfile& b) const {
  Micros startup = 0;
  for (const auto& l : links) {
    if (l.speed_ratio_to_fast == 1.0) startup = l.startup_us;
  }
  return b.comm_fast_us + startup;
}

Micros CapacityModel::duration(const BucketProfile& b, std::size_t l) const {
  const auto& link = links.at(l);
  Micros d = comm_time_on_link(b, link) + link.startup_us;
  if (link.speed_ratio_to_fast != 1.0) d += slow_link_copy_overhead_us;
  return d;
}

CapacityModel make_capacity_model(const ModelProfile& profile, const ClusterConfig& cluster, double capacity_multiplier,
                                  Micros slow_link_copy_overhead_us) {
  validate(cluster);
  if (!(capacity_multiplier >= 1.0)) {
    throw ValidationError("invalid_multiplier", "capacity multiplier must be >= 1");
  }
  if (slow_link_copy_overhead_us < 0) {
    throw ValidationError("negative_time", "slow_link_copy_overhead_us must be >= 0");
  }
  CapacityModel caps;
  caps.forward_capacity = profile.total_forward();
  caps.backward_capacity = profile.total_backward();
  caps.capacity_multiplier = capacity_multiplier;
  caps.links = cluster.links;
  caps.slow_link_copy_overhead_us = slow_link_copy_overhead_us;
  return caps;
}

namespace {

using Plan = std::vector<std::vector<CommTask>>;

struct ReplayResult {
  Plan kept;
  std::vector<CommTask> deferred;
  std::vector<Micros> weight_used;
};

// Offset of each bucket's backward end from the start of the backward stage.
std::vector<Micros> backward_ready(const ModelProfile& p) {
  std::vector<Micros> ready(p.size() + 1, 0);
  Micros t = 0;
  for (int j = static_cast<int>(p.size()); j >= 1; --j) {
    t += p.bucket(j).backward_us;
    ready[static_cast<std::size_t>(j)] = t;
  }
  return ready;
}

KnapsackAssignment solve(std::span<const Item> items, const std::vector<Micros>& caps) {
  if (caps.size() == 1) return naive_knapsack(items, caps[0]);
  return greedy_multi_knapsack(items, caps);
}

std::vector<Micros> stage_caps(const CapacityModel& caps, Micros stage) {
  std::vector<Micros> out;
  for (std::size_t l = 0; l < caps.links.size(); ++l) out.push_back(caps.link_capacity(stage, l));
  return out;
}

Micros deadline(const CapacityModel& caps, Micros stage) {
  return static_cast<Micros>(std::floor(static_cast<double>(stage) * caps.capacity_multiplier));
}

std::vector<Item> to_items(const std::vector<PendingBucket>& q, const ModelProfile& p, const CapacityModel& caps) {
  std::vector<Item> items;
  items.reserve(q.size());
  for (const auto& b : q) items.push_back({b.bucket_id, caps.item_weight(p.bucket(b.bucket_id))});
  return items;
}

// Per-link tasks for an assignment over queue entries.
Plan place(const KnapsackAssignment& a, const std::vector<PendingBucket>& q, bool fresh, std::size_t n_links) {
  std::map<int, PendingBucket> by_id;
  for (const auto& b : q) by_id[b.bucket_id] = b;
  Plan plan(n_links);
  for (std::size_t l = 0; l < a.knapsacks.size(); ++l) {
    for (int id : a.knapsacks[l]) {
      const auto& b = by_id.at(id);
      plan[l].push_back({id, b.origin_iteration, b.merge_count, fresh});
    }
  }
  return plan;
}

// List-schedules each link: old transfers from the stage start, then fresh
// ones in generation order once their gradient exists. Anything that would
// end past the stage deadline is deferred.
ReplayResult replay(const Plan& proposal, const ModelProfile& p, const CapacityModel& caps, Micros limit,
                    const std::vector<Micros>& ready) {
  ReplayResult r;
  r.kept.resize(caps.links.size());
  r.weight_used.assign(caps.links.size(), 0);
  for (std::size_t l = 0; l < proposal.size(); ++l) {
    std::vector<CommTask> order = proposal[l];
    std::stable_sort(order.begin(), order.end(), [](const CommTask& a, const CommTask& b) {
      if (a.fresh != b.fresh) return !a.fresh;
      if (a.fresh) return a.bucket_id > b.bucket_id;
      return false;
    });
    Micros free = 0;
    for (const auto& t : order) {
      const auto& b = p.bucket(t.bucket_id);
      const Micros start = std::max(free, t.fresh ? ready.at(static_cast<std::size_t>(t.bucket_id)) : Micros{0});
      const Micros end = start + caps.duration(b, l);
      if (end > limit) {
        r.deferred.push_back(t);
        continue;
      }
      free = end;
      r.kept[l].push_back(t);
      r.weight_used[l] += caps.item_weight(b);
    }
  }
  return r;
}

void remove_planned(std::vector<PendingBucket>& q, const Plan& plan) {
  std::set<int> done;
  for (const auto& link : plan) {
    for (const auto& t : link) done.insert(t.bucket_id);
  }
  std::erase_if(q, [&](const PendingBucket& b) { return done.count(b.bucket_id) > 0; });
}

std::size_t planned_count(const Plan& plan) {
  std::size_t n = 0;
  for (const auto& l : plan) n += l.size();
  return n;
}

UpdateEvent group_of(const std::vector<PendingBucket>& q) {
  return {q.front().origin_iteration, q.front().merge_count};
}

// Fresh buckets of this iteration, folded into the future queue.
void merge_new_buckets(std::vector<PendingBucket>& fq, std::size_t n, int iteration, std::vector<int>& merged) {
  if (fq.empty()) {
    for (std::size_t j = 1; j <= n; ++j) fq.push_back({static_cast<int>(j), 1, iteration});
  } else {
    if (fq.size() != n) throw Error(ErrorCode::kInvariant, "future queue does not hold a full iteration");
    for (auto& b : fq) ++b.merge_count;
  }
  for (const auto& b : fq) merged.push_back(b.bucket_id);
}

// Recursive knapsack over a full set of fresh buckets with the given
// per-link room; returns the replayed plan and the leftovers.
struct FreshResult {
  Plan plan;
  std::vector<PendingBucket> leftovers;
};

FreshResult schedule_fresh(const std::vector<PendingBucket>& fresh, const Plan& old_plan, std::vector<Micros> room,
                           const ModelProfile& p, const CapacityModel& caps, const std::vector<Micros>& ready) {
  // Backward produces bucket n first.
  std::vector<PendingBucket> gen_order = fresh;
  std::sort(gen_order.begin(), gen_order.end(),
            [](const PendingBucket& a, const PendingBucket& b) { return a.bucket_id > b.bucket_id; });
  const auto items = to_items(gen_order, p, caps);
  std::vector<Micros> bwd;
  for (const auto& b : gen_order) bwd.push_back(p.bucket(b.bucket_id).backward_us);
  std::vector<double> scales;
  for (const auto& l : caps.links) scales.push_back(l.speed_ratio_to_fast);
  for (auto& r : room) r = std::max<Micros>(r, 0);

  const auto a = recursive_knapsack(items, bwd, room, scales);
  Plan proposal = place(a, gen_order, true, caps.links.size());
  for (std::size_t l = 0; l < old_plan.size(); ++l) {
    proposal[l].insert(proposal[l].begin(), old_plan[l].begin(), old_plan[l].end());
  }
  auto r = replay(proposal, p, caps, deadline(caps, caps.backward_capacity), ready);
  for (const auto& t : r.deferred) {
    if (!t.fresh) throw Error(ErrorCode::kInvariant, "current-queue transfer lost its slot on replay");
  }

  FreshResult out;
  out.plan = std::move(r.kept);
  std::set<int> planned;
  for (const auto& l : out.plan) {
    for (const auto& t : l) {
      if (t.fresh) planned.insert(t.bucket_id);
    }
  }
  for (const auto& b : gen_order) {
    if (!planned.count(b.bucket_id)) out.leftovers.push_back(b);
  }
  return out;
}

Micros head_time(const ModelProfile& p, const CapacityModel& caps, std::size_t l) {
  const double ratio = caps.links[l].speed_ratio_to_fast;
  return static_cast<Micros>(std::llround(static_cast<double>(p.bucket(static_cast<int>(p.size())).backward_us) / ratio));
}

void init_plans(ScheduleDecision& d, std::size_t n_links) {
  if (d.forward_plan.size() < n_links) d.forward_plan.resize(n_links);
  if (d.backward_plan.size() < n_links) d.backward_plan.resize(n_links);
}

}  // namespace

void deft_schedule_forward(QueueState& state, const ModelProfile& profile, const CapacityModel& caps,
                           ScheduleDecision& decision) {
  init_plans(decision, caps.links.size());
  decision.forward_case = StageCase::kCase1;
  auto& cq = state.current_queue;
  if (cq.empty()) return;
  const UpdateEvent group = group_of(cq);
  const auto items = to_items(cq, profile, caps);
  const auto a = solve(items, stage_caps(caps, caps.forward_capacity));
  const std::vector<Micros> no_deps(profile.size() + 1, 0);
  auto r = replay(place(a, cq, false, caps.links.size()), profile, caps, deadline(caps, caps.forward_capacity), no_deps);
  decision.forward_plan = std::move(r.kept);
  remove_planned(cq, decision.forward_plan);
  if (cq.empty()) decision.updates.push_back(group);
}

void deft_schedule_backward(QueueState& state, const ModelProfile& profile, const CapacityModel& caps,
                            ScheduleDecision& decision) {
  init_plans(decision, caps.links.size());
  const std::size_t n = profile.size();
  const std::size_t n_links = caps.links.size();
  const int k = decision.iteration;
  const auto ready = backward_ready(profile);
  const auto caps_b = stage_caps(caps, caps.backward_capacity);
  auto& cq = state.current_queue;
  auto& fq = state.future_queue;

  if (!cq.empty()) {
    const UpdateEvent cq_group = group_of(cq);
    const auto a = solve(to_items(cq, profile, caps), caps_b);
    auto old = replay(place(a, cq, false, n_links), profile, caps, deadline(caps, caps.backward_capacity), ready);
    if (planned_count(old.kept) < cq.size()) {
      decision.backward_case = StageCase::kCase2;
      decision.backward_plan = std::move(old.kept);
      remove_planned(cq, decision.backward_plan);
      merge_new_buckets(fq, n, k, decision.merged);
      return;
    }
    decision.backward_case = StageCase::kCase3;
    merge_new_buckets(fq, n, k, decision.merged);
    const UpdateEvent fq_group = group_of(fq);
    std::vector<Micros> room(n_links);
    for (std::size_t l = 0; l < n_links; ++l) {
      room[l] = caps_b[l] - std::max(old.weight_used[l], head_time(profile, caps, l));
    }
    auto fresh = schedule_fresh(fq, old.kept, room, profile, caps, ready);
    decision.backward_plan = std::move(fresh.plan);
    cq = std::move(fresh.leftovers);
    fq.clear();
    decision.updates.push_back(cq_group);
    if (cq.empty()) decision.updates.push_back(fq_group);
    return;
  }

  decision.backward_case = StageCase::kCase4;
  merge_new_buckets(fq, n, k, decision.merged);
  if (decision.merged.size() == n && fq.front().merge_count == 1) decision.merged.clear();
  const UpdateEvent group = group_of(fq);
  std::vector<Micros> room(n_links);
  for (std::size_t l = 0; l < n_links; ++l) room[l] = caps_b[l] - head_time(profile, caps, l);
  auto fresh = schedule_fresh(fq, Plan(n_links), room, profile, caps, ready);
  decision.backward_plan = std::move(fresh.plan);
  cq = std::move(fresh.leftovers);
  fq.clear();
  if (cq.empty()) decision.updates.push_back(group);
}

void check_state(const QueueState& state, const ScheduleDecision* last, std::size_t n_buckets) {
  auto unique = [&](const std::vector<PendingBucket>& q, const char* which) {
    std::set<int> seen;
    for (const auto& b : q) {
      if (b.bucket_id < 1 || static_cast<std::size_t>(b.bucket_id) > n_buckets || !seen.insert(b.bucket_id).second) {
        throw Error(ErrorCode::kInvariant, std::string(which) + " holds bucket " + std::to_string(b.bucket_id) +
                                               " twice or out of range");
      }
    }
  };
  unique(state.current_queue, "current queue");
  unique(state.future_queue, "future queue");
  for (const auto& b : state.future_queue) {
    if (b.merge_count != state.future_queue.front().merge_count) {
      throw Error(ErrorCode::kInvariant, "future queue mixes merge counts");
    }
  }
  if (!last) return;
  for (const auto* plan : {&last->forward_plan, &last->backward_plan}) {
    for (const auto& link : *plan) {
      for (const auto& t : link) {
        for (const auto& b : state.current_queue) {
          if (b.bucket_id == t.bucket_id && b.origin_iteration == t.origin_iteration &&
              b.merge_count == t.merge_count) {
            throw Error(ErrorCode::kInvariant,
                        "bucket " + std::to_string(t.bucket_id) + " is both in flight and queued");
          }
        }
      }
    }
  }
}

std::vector<ScheduleDecision> schedule_deft(const ModelProfile& profile, const CapacityModel& caps, int iterations) {
  validate(profile);
  if (iterations < 1) throw ValidationError("invalid_iterations", "iterations must be >= 1");
  if (caps.links.empty()) throw ValidationError("empty_cluster", "capacity model has no links");
  const Micros widest = deadline(caps, std::max(caps.forward_capacity, caps.backward_capacity));
  for (const auto& b : profile.buckets) {
    bool fits = false;
    for (std::size_t l = 0; l < caps.links.size(); ++l) {
      const Micros cap = caps.link_capacity(std::max(caps.forward_capacity, caps.backward_capacity), l);
      fits = fits || (caps.item_weight(b) <= cap && caps.duration(b, l) <= widest);
    }
    if (!fits) {
      throw InfeasibleError(b.id, "bucket " + std::to_string(b.id) + " (" + std::to_string(caps.item_weight(b)) +
                                      " us) does not fit any stage on any link");
    }
  }

  QueueState state;
  std::vector<ScheduleDecision> out;
  out.reserve(static_cast<std::size_t>(iterations));
  for (int k = 0; k < iterations; ++k) {
    ScheduleDecision d;
    d.iteration = k;
    d.update_mode = UpdateMode::kBarrier;
    deft_schedule_forward(state, profile, caps, d);
    deft_schedule_backward(state, profile, caps, d);
    d.update_performed = !d.updates.empty();
    check_state(state, &d, profile.size());
    out.push_back(std::move(d));
  }
  return out;
}

double effective_update_frequency(const std::vector<ScheduleDecision>& decisions, int window) {
  if (window < 1) throw ValidationError("invalid_window", "window must be >= 1");
  std::size_t updates = 0;
  const auto limit = std::min(decisions.size(), static_cast<std::size_t>(window));
  for (std::size_t i = 0; i < limit; ++i) updates += decisions[i].updates.size();
  return static_cast<double>(updates) / window;
}

int check_gradient_conservation(const std::vector<ScheduleDecision>& decisions, std::size_t n_buckets) {
  // (origin, merge_count) -> bucket -> transfer count
  std::map<std::pair<int, int>, std::map<int, int>> sent;
  std::set<std::pair<int, int>> applied;
  int next_origin = 0;
  for (const auto& d : decisions) {
    for (const auto* plan : {&d.forward_plan, &d.backward_plan}) {
      for (const auto& link : *plan) {
        for (const auto& t : link) {
          const auto g = std::make_pair(t.origin_iteration, t.merge_count);
          if (applied.count(g)) {
            throw Error(ErrorCode::kInvariant, "bucket " + std::to_string(t.bucket_id) + " of group " +
                                                   std::to_string(g.first) + " sent after its update");
          }
          if (++sent[g][t.bucket_id] > 1) {
            throw Error(ErrorCode::kInvariant, "bucket " + std::to_string(t.bucket_id) + " of group " +
                                                   std::to_string(g.first) + " sent twice");
          }
        }
      }
    }
    for (const auto& u : d.updates) {
      if (u.origin_iteration != next_origin) {
        throw Error(ErrorCode::kInvariant, "update for iteration " + std::to_string(u.origin_iteration) +
                                               " applied out of order (expected " + std::to_string(next_origin) + ")");
      }
      const auto g = std::make_pair(u.origin_iteration, u.merge_count);
      const auto& buckets = sent[g];
      if (buckets.size() != n_buckets) {
        throw Error(ErrorCode::kInvariant, "update for iteration " + std::to_string(u.origin_iteration) + " covers " +
                                               std::to_string(buckets.size()) + " of " + std::to_string(n_buckets) +
                                               " buckets");
      }
      applied.insert(g);
      next_origin += u.merge_count;
    }
  }
  for (const auto& [g, buckets] : sent) {
    if (!applied.count(g) && g.first < next_origin) {
      throw Error(ErrorCode::kInvariant, "group " + std::to_string(g.first) + " overlaps an applied update");
    }
  }
  return next_origin;
}

namespace {

enum class Pick { kLowestId, kLargestThenLowest };

ScheduleDecision baseline_decision(int k, std::size_t n_links) {
  ScheduleDecision d;
  d.iteration = k;
  d.forward_plan.resize(n_links);
  d.backward_plan.resize(n_links);
  d.updates = {{k, 1}};
  d.update_performed = true;
  return d;
}

// Transfer order of one backward stage on a single link, decided whenever
// the link becomes free.
std::vector<int> dynamic_order(const ModelProfile& p, const LinkSpec& link, Pick during_backward) {
  const auto ready = backward_ready(p);
  const Micros stage = p.total_backward();
  std::vector<int> left;
  for (int j = static_cast<int>(p.size()); j >= 1; --j) left.push_back(j);
  std::vector<int> order;
  Micros t = 0;
  while (!left.empty()) {
    int best = -1;
    for (int j : left) {
      if (ready[static_cast<std::size_t>(j)] > t) continue;
      if (best < 0) {
        best = j;
        continue;
      }
      if (during_backward == Pick::kLargestThenLowest && t < stage) {
        const Micros cj = p.bucket(j).comm_fast_us, cb = p.bucket(best).comm_fast_us;
        if (cj > cb || (cj == cb && j < best)) best = j;
      } else if (j < best) {
        best = j;
      }
    }
    if (best < 0) {
      Micros next = -1;
      for (int j : left) {
        const Micros r = ready[static_cast<std::size_t>(j)];
        if (next < 0 || r < next) next = r;
      }
      t = next;
      continue;
    }
    order.push_back(best);
    t += comm_time_on_link(p.bucket(best), link) + link.startup_us;
    std::erase(left, best);
  }
  return order;
}

ScheduledRun ordered_baseline(ModelProfile p, const ClusterConfig& cluster, int iterations, Pick pick) {
  const std::size_t fast = cluster.fast_index();
  const auto order = dynamic_order(p, cluster.links[fast], pick);
  ScheduledRun run;
  for (int k = 0; k < iterations; ++k) {
    auto d = baseline_decision(k, cluster.links.size());
    d.update_mode = UpdateMode::kPerBucket;
    for (int id : order) d.backward_plan[fast].push_back({id, k, 1, true});
    run.decisions.push_back(std::move(d));
  }
  run.profile = std::move(p);
  return run;
}

PartitionConfig single_link(PartitionConfig cfg) {
  cfg.mu = 1.0;
  return cfg;
}

void check_baseline_args(const ModelProfile& profile, const ClusterConfig& cluster, int iterations) {
  validate(profile);
  validate(cluster);
  if (iterations < 1) throw ValidationError("invalid_iterations", "iterations must be >= 1");
}

}  // namespace

ScheduledRun baseline_wfbp(const ModelProfile& profile, const ClusterConfig& cluster, int iterations) {
  check_baseline_args(profile, cluster, iterations);
  const std::size_t fast = cluster.fast_index();
  ScheduledRun run;
  run.profile = profile;
  for (int k = 0; k < iterations; ++k) {
    auto d = baseline_decision(k, cluster.links.size());
    for (int j = static_cast<int>(profile.size()); j >= 1; --j) d.backward_plan[fast].push_back({j, k, 1, true});
    run.decisions.push_back(std::move(d));
  }
  return run;
}

ScheduledRun baseline_priority(const ModelProfile& profile, const ClusterConfig& cluster,
                               const PartitionConfig& partition, int iterations) {
  check_baseline_args(profile, cluster, iterations);
  return ordered_baseline(partition_buckets(profile, single_link(partition)), cluster, iterations, Pick::kLowestId);
}

ScheduledRun baseline_nonsequential(const ModelProfile& profile, const ClusterConfig& cluster,
                                    const PartitionConfig& partition, int iterations) {
  check_baseline_args(profile, cluster, iterations);
  const auto cfg = single_link(partition);
  auto p = fuse_buckets(partition_buckets(profile, cfg), cfg.comm_startup_us, cfg);
  return ordered_baseline(std::move(p), cluster, iterations, Pick::kLargestThenLowest);
}

const char* to_string(StageCase c) {
  switch (c) {
    case StageCase::kNone: return "none";
    case StageCase::kCase1: return "case1";
    case StageCase::kCase2: return "case2";
    case StageCase::kCase3: return "case3";
    case StageCase::kCase4: return "case4";
  }
  return "none";
}

const char* to_string(UpdateMode m) { return m == UpdateMode::kBarrier ? "barrier" : "per_bucket"; }

namespace {

json plan_json(const Plan& plan) {
  json out = json::array();
  for (const auto& link : plan) {
    json l = json::array();
    for (const auto& t : link) {
      l.push_back({{"bucket", t.bucket_id}, {"origin", t.origin_iteration}, {"merge_count", t.merge_count},
                   {"fresh", t.fresh}});
    }
    out.push_back(std::move(l));
  }
  return out;
}

Plan plan_from(const json& j) {
  Plan plan;
  for (const auto& l : j) {
    std::vector<CommTask> link;
    for (const auto& t : l) {
      link.push_back({t.at("bucket").get<int>(), t.at("origin").get<int>(), t.at("merge_count").get<int>(),
                      t.at("fresh").get<bool>()});
    }
    plan.push_back(std::move(link));
  }
  return plan;
}

StageCase case_from(const std::string& s) {
  for (auto c : {StageCase::kNone, StageCase::kCase1, StageCase::kCase2, StageCase::kCase3, StageCase::kCase4}) {
    if (s == to_string(c)) return c;
  }
  throw ValidationError("schema", "unknown case '" + s + "'");
}

}  // namespace

json to_json(const ScheduleDecision& d) {
  json updates = json::array();
  for (const auto& u : d.updates) updates.push_back({{"origin", u.origin_iteration}, {"merge_count", u.merge_count}});
  return {{"iteration", d.iteration},
          {"forward_case", to_string(d.forward_case)},
          {"backward_case", to_string(d.backward_case)},
          {"forward_plan", plan_json(d.forward_plan)},
          {"backward_plan", plan_json(d.backward_plan)},
          {"merged", d.merged},
          {"updates", std::move(updates)},
          {"update_performed", d.update_performed},
          {"update_mode", to_string(d.update_mode)}};
}

ScheduleDecision decision_from_json(const json& doc) {
  ScheduleDecision d;
  try {
    d.iteration = doc.at("iteration").get<int>();
    d.forward_case = case_from(doc.at("forward_case").get<std::string>());
    d.backward_case = case_from(doc.at("backward_case").get<std::string>());
    d.forward_plan = plan_from(doc.at("forward_plan"));
    d.backward_plan = plan_from(doc.at("backward_plan"));
    d.merged = doc.at("merged").get<std::vector<int>>();
    for (const auto& u : doc.at("updates")) {
      d.updates.push_back({u.at("origin").get<int>(), u.at("merge_count").get<int>()});
    }
    d.update_performed = doc.at("update_performed").get<bool>();
    const auto mode = doc.at("update_mode").get<std::string>();
    if (mode == "barrier") {
      d.update_mode = UpdateMode::kBarrier;
    } else if (mode == "per_bucket") {
      d.update_mode = UpdateMode::kPerBucket;
    } else {
      throw ValidationError("schema", "unknown update mode '" + mode + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError("schema", std::string("malformed decision: ") + e.what());
  }
  return d;
}

std::string to_jsonl(const std::vector<ScheduleDecision>& decisions) {
  std::string out;
  for (const auto& d : decisions) {
    out += to_json(d).dump();
    out += '\n';
  }
  return out;
}

std::vector<ScheduleDecision> decisions_from_jsonl(const std::string& text) {
  std::vector<ScheduleDecision> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("schema", std::string("bad decision line: ") + e.what());
    }
    out.push_back(decision_from_json(doc));
  }
  return out;
}

}  // namespace deft
