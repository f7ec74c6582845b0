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

#include "deft/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "deft/error.hpp"

namespace deft {

using nlohmann::json;

namespace {

Error mismatch(const std::string& what) { return Error(ErrorCode::kMismatch, what); }

class Durations {
 public:
  Durations(const std::vector<LinkSpec>& links, const SimOptions& opt) : links_(links), opt_(opt), rng_(opt.seed) {}

  Micros compute(Micros d) { return noisy(d); }

  Micros comm(const BucketProfile& b, std::size_t l) {
    const auto& link = links_[l];
    Micros payload = 0;
    if (opt_.comm_model == CommModel::kAffine) {
      if (!link.bandwidth_bps || *link.bandwidth_bps <= 0) {
        throw ValidationError("invalid_link", "affine comm model needs bandwidth_bps on link '" + link.name + "'");
      }
      payload = static_cast<Micros>(std::llround(static_cast<double>(b.param_count) * 32.0 / *link.bandwidth_bps * 1e6));
    } else {
      payload = comm_time_on_link(b, link);
    }
    Micros d = payload + link.startup_us;
    if (link.speed_ratio_to_fast != 1.0) d += opt_.slow_link_copy_overhead_us;
    return noisy(d);
  }

 private:
  Micros noisy(Micros d) {
    if (opt_.jitter <= 0.0) return d;
    std::uniform_real_distribution<double> u(1.0 - opt_.jitter, 1.0 + opt_.jitter);
    return std::max<Micros>(0, static_cast<Micros>(std::llround(static_cast<double>(d) * u(rng_))));
  }

  const std::vector<LinkSpec>& links_;
  const SimOptions& opt_;
  std::mt19937_64 rng_;
};

void check_decision(const ScheduleDecision& d, int k, std::size_t n, std::size_t n_links) {
  if (d.iteration != k) {
    throw mismatch("decision " + std::to_string(k) + " is labelled iteration " + std::to_string(d.iteration));
  }
  for (const auto* plan : {&d.forward_plan, &d.backward_plan}) {
    for (std::size_t l = 0; l < plan->size(); ++l) {
      if (!(*plan)[l].empty() && l >= n_links) {
        throw mismatch("iteration " + std::to_string(k) + " uses link " + std::to_string(l) + " of " +
                       std::to_string(n_links));
      }
      for (const auto& t : (*plan)[l]) {
        if (t.bucket_id < 1 || static_cast<std::size_t>(t.bucket_id) > n) {
          throw mismatch("iteration " + std::to_string(k) + " references unknown bucket " +
                         std::to_string(t.bucket_id));
        }
      }
    }
  }
}

}  // namespace

SimReport simulate(const ModelProfile& profile, const std::vector<LinkSpec>& links,
                   const std::vector<ScheduleDecision>& decisions, int iterations, const SimOptions& options) {
  validate(profile);
  if (links.empty()) throw ValidationError("empty_cluster", "simulate needs at least one link");
  if (iterations < 1) throw ValidationError("invalid_iterations", "iterations must be >= 1");
  if (options.jitter < 0.0 || options.jitter >= 1.0) {
    throw ValidationError("invalid_jitter", "jitter must lie in [0, 1)");
  }
  if (decisions.size() < static_cast<std::size_t>(iterations)) {
    throw mismatch("schedule covers " + std::to_string(decisions.size()) + " of " + std::to_string(iterations) +
                   " iterations");
  }
  const std::size_t n = profile.size();
  Durations dur(links, options);

  SimReport rep;
  rep.profile_name = profile.name;
  rep.batch_size = profile.batch_size;
  rep.iterations = iterations;
  auto& tl = rep.timeline;

  std::vector<Micros> link_free(links.size(), 0);
  std::vector<Micros> bucket_wait(n + 1, 0);
  Micros barrier = 0;
  Micros cursor = 0;
  std::map<std::pair<int, int>, std::pair<Micros, std::size_t>> groups;  // end, transfers
  std::vector<Micros> iter_start;

  auto run_link = [&](const std::vector<CommTask>& tasks, std::size_t l, int k, auto ready_of) {
    for (const auto& t : tasks) {
      const auto& b = profile.bucket(t.bucket_id);
      const Micros start = std::max(link_free[l], ready_of(t));
      const Micros end = start + dur.comm(b, l);
      link_free[l] = end;
      tl.push_back({EventKind::kCommunication, t.bucket_id, static_cast<int>(l), start, end, k, t.origin_iteration,
                    t.merge_count});
      auto& g = groups[{t.origin_iteration, t.merge_count}];
      g.first = std::max(g.first, end);
      ++g.second;
    }
  };

  UpdateMode prev_mode = UpdateMode::kBarrier;
  for (int k = 0; k < iterations; ++k) {
    const auto& d = decisions[static_cast<std::size_t>(k)];
    check_decision(d, k, n, links.size());

    Micros fwd_start = -1;
    for (std::size_t j = 1; j <= n; ++j) {
      const Micros wait = prev_mode == UpdateMode::kBarrier ? barrier : bucket_wait[j];
      const Micros start = std::max(cursor, wait);
      cursor = start + dur.compute(profile.bucket(static_cast<int>(j)).forward_us);
      if (fwd_start < 0) fwd_start = start;
      tl.push_back({EventKind::kForwardCompute, static_cast<int>(j), -1, start, cursor, k, k, 1});
    }
    iter_start.push_back(fwd_start);
    for (std::size_t l = 0; l < d.forward_plan.size(); ++l) {
      run_link(d.forward_plan[l], l, k, [&](const CommTask&) { return fwd_start; });
    }

    const Micros bwd_start = cursor;
    std::vector<Micros> bwd_end(n + 1, 0);
    for (std::size_t j = n; j >= 1; --j) {
      const Micros start = cursor;
      cursor = start + dur.compute(profile.bucket(static_cast<int>(j)).backward_us);
      bwd_end[j] = cursor;
      tl.push_back({EventKind::kBackwardCompute, static_cast<int>(j), -1, start, cursor, k, k, 1});
    }
    for (std::size_t l = 0; l < d.backward_plan.size(); ++l) {
      run_link(d.backward_plan[l], l, k, [&](const CommTask& t) {
        return t.fresh ? bwd_end[static_cast<std::size_t>(t.bucket_id)] : bwd_start;
      });
    }

    barrier = 0;
    for (const auto& u : d.updates) {
      const auto it = groups.find({u.origin_iteration, u.merge_count});
      if (it == groups.end() || it->second.second != n) {
        throw Error(ErrorCode::kInvariant, "iteration " + std::to_string(k) + " updates group " +
                                               std::to_string(u.origin_iteration) + " before all buckets were sent");
      }
      const Micros at = std::max(cursor, it->second.first);
      tl.push_back({EventKind::kUpdate, 0, -1, at, at, k, u.origin_iteration, u.merge_count});
      barrier = std::max(barrier, at);
      ++rep.updates_performed;
    }
    if (d.update_mode == UpdateMode::kPerBucket) {
      std::fill(bucket_wait.begin(), bucket_wait.end(), 0);
      for (auto it = tl.rbegin(); it != tl.rend() && it->iteration == k; ++it) {
        if (it->kind == EventKind::kCommunication && it->origin_iteration == k) {
          auto& w = bucket_wait[static_cast<std::size_t>(it->bucket_id)];
          w = std::max(w, it->end);
        }
      }
    }
    prev_mode = d.update_mode;
  }

  Micros first = -1, last = 0;
  for (const auto& e : tl) {
    rep.makespan = std::max(rep.makespan, e.end);
    if (e.kind == EventKind::kForwardCompute || e.kind == EventKind::kBackwardCompute) {
      if (first < 0 || e.start < first) first = e.start;
      last = std::max(last, e.end);
      rep.compute_busy += e.end - e.start;
    }
  }
  const Micros span = last - std::max<Micros>(first, 0);
  rep.bubble_time = span - rep.compute_busy;
  rep.bubble_ratio = span > 0 ? static_cast<double>(rep.bubble_time) / static_cast<double>(span) : 0.0;

  for (std::size_t k = 0; k < iter_start.size(); ++k) {
    const Micros next = k + 1 < iter_start.size() ? iter_start[k + 1] : rep.makespan;
    rep.iteration_times.push_back(next - iter_start[k]);
  }
  // Mean over iterations after warmup, excluding the last (it has no
  // successor and absorbs the tail of the timeline).
  const std::size_t count = rep.iteration_times.size();
  const std::size_t hi = count > 1 ? count - 1 : count;
  std::size_t from = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.warmup, 0)), hi);
  if (from >= hi) from = 0;
  double sum = 0.0;
  for (std::size_t k = from; k < hi; ++k) sum += static_cast<double>(rep.iteration_times[k]);
  rep.steady_iteration_us = sum / static_cast<double>(hi - from);

  rep.throughput = rep.makespan > 0 ? static_cast<double>(iterations) * static_cast<double>(profile.batch_size) /
                                          (static_cast<double>(rep.makespan) * 1e-6)
                                    : 0.0;
  rep.update_frequency = static_cast<double>(rep.updates_performed) / iterations;
  return rep;
}

void check_timeline(const SimReport& report) {
  std::map<int, std::vector<const Event*>> streams;
  std::map<std::pair<int, int>, Micros> bwd_end;  // (iteration, bucket)
  for (const auto& e : report.timeline) {
    if (e.end < e.start) throw Error(ErrorCode::kInvariant, "event ends before it starts");
    if (e.kind == EventKind::kUpdate) continue;
    streams[e.link].push_back(&e);
    if (e.kind == EventKind::kBackwardCompute) bwd_end[{e.iteration, e.bucket_id}] = e.end;
  }
  for (auto& [stream, events] : streams) {
    std::sort(events.begin(), events.end(), [](const Event* a, const Event* b) {
      return a->start != b->start ? a->start < b->start : a->end < b->end;
    });
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i]->start < events[i - 1]->end) {
        throw Error(ErrorCode::kInvariant, "overlapping events on stream " + std::to_string(stream) + " at " +
                                               std::to_string(events[i]->start) + " us");
      }
    }
  }
  for (const auto& e : report.timeline) {
    if (e.kind != EventKind::kCommunication) continue;
    if (e.origin_iteration + e.merge_count - 1 != e.iteration) continue;
    const auto it = bwd_end.find({e.iteration, e.bucket_id});
    if (it != bwd_end.end() && e.start < it->second && e.start >= 0) {
      // Fresh transfers only exist in the backward plan, which runs after
      // the bucket's gradient is produced.
      throw Error(ErrorCode::kInvariant, "bucket " + std::to_string(e.bucket_id) + " sent at " +
                                             std::to_string(e.start) + " before its gradient at " +
                                             std::to_string(it->second));
    }
  }
}

std::vector<ComparisonRow> compare(const std::map<std::string, SimReport>& reports, const std::string& baseline) {
  if (reports.empty()) throw Error(ErrorCode::kArgument, "compare: no reports");
  const auto base = reports.find(baseline);
  if (base == reports.end()) throw Error(ErrorCode::kArgument, "compare: baseline '" + baseline + "' missing");
  std::vector<ComparisonRow> rows;
  for (const auto& [scheme, r] : reports) {
    if (r.profile_name != base->second.profile_name || r.iterations != base->second.iterations ||
        r.batch_size != base->second.batch_size) {
      throw mismatch("compare: report '" + scheme + "' was produced from a different profile or iteration count");
    }
    ComparisonRow row;
    row.scheme = scheme;
    row.steady_iteration_us = r.steady_iteration_us;
    row.speedup = r.steady_iteration_us > 0 ? base->second.steady_iteration_us / r.steady_iteration_us : 0.0;
    row.bubble_ratio = r.bubble_ratio;
    row.throughput = r.throughput;
    row.update_frequency = r.update_frequency;
    rows.push_back(row);
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "scheme,steady_iteration_us,speedup,bubble_ratio,throughput,update_frequency\n";
  os << std::fixed;
  for (const auto& r : rows) {
    os << r.scheme << ',' << std::setprecision(3) << r.steady_iteration_us << ',' << std::setprecision(4) << r.speedup
       << ',' << std::setprecision(6) << r.bubble_ratio << ',' << std::setprecision(3) << r.throughput << ','
       << std::setprecision(4) << r.update_frequency << '\n';
  }
  return os.str();
}

json to_json(const ComparisonRow& r) {
  return {{"scheme", r.scheme},
          {"steady_iteration_us", r.steady_iteration_us},
          {"speedup", r.speedup},
          {"bubble_ratio", r.bubble_ratio},
          {"throughput", r.throughput},
          {"update_frequency", r.update_frequency}};
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kForwardCompute: return "forward_compute";
    case EventKind::kBackwardCompute: return "backward_compute";
    case EventKind::kCommunication: return "communication";
    case EventKind::kUpdate: return "update";
  }
  return "?";
}

json to_json(const Event& e) {
  json j = {{"kind", to_string(e.kind)}, {"iteration", e.iteration}, {"start", e.start}, {"end", e.end}};
  if (e.kind != EventKind::kUpdate) j["bucket"] = e.bucket_id;
  if (e.kind == EventKind::kCommunication) j["link"] = e.link;
  if (e.kind == EventKind::kCommunication || e.kind == EventKind::kUpdate) {
    j["origin"] = e.origin_iteration;
    j["merge_count"] = e.merge_count;
  }
  return j;
}

std::string timeline_jsonl(const SimReport& report) {
  std::string out;
  for (const auto& e : report.timeline) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

json chrome_trace(const SimReport& report, const std::vector<LinkSpec>& links) {
  json events = json::array();
  events.push_back({{"name", "thread_name"}, {"ph", "M"}, {"pid", 0}, {"tid", 0}, {"args", {{"name", "compute"}}}});
  for (std::size_t l = 0; l < links.size(); ++l) {
    events.push_back({{"name", "thread_name"},
                      {"ph", "M"},
                      {"pid", 0},
                      {"tid", l + 1},
                      {"args", {{"name", "link:" + links[l].name}}}});
  }
  for (const auto& e : report.timeline) {
    std::string name;
    switch (e.kind) {
      case EventKind::kForwardCompute: name = "F" + std::to_string(e.bucket_id); break;
      case EventKind::kBackwardCompute: name = "B" + std::to_string(e.bucket_id); break;
      case EventKind::kCommunication: name = "C" + std::to_string(e.bucket_id); break;
      case EventKind::kUpdate: name = "update"; break;
    }
    json args = {{"iteration", e.iteration}};
    if (e.kind == EventKind::kCommunication || e.kind == EventKind::kUpdate) {
      args["origin"] = e.origin_iteration;
      args["merge_count"] = e.merge_count;
    }
    events.push_back({{"name", name},
                      {"cat", to_string(e.kind)},
                      {"ph", "X"},
                      {"pid", 0},
                      {"tid", e.link + 1},
                      {"ts", e.start},
                      {"dur", e.end - e.start},
                      {"args", std::move(args)}});
  }
  return {{"traceEvents", std::move(events)}, {"displayTimeUnit", "ms"}};
}

json summary_json(const SimReport& r) {
  return {{"profile", r.profile_name},
          {"iterations", r.iterations},
          {"steady_iteration_us", r.steady_iteration_us},
          {"makespan_us", r.makespan},
          {"compute_busy_us", r.compute_busy},
          {"bubble_us", r.bubble_time},
          {"bubble_ratio", r.bubble_ratio},
          {"throughput", r.throughput},
          {"updates_performed", r.updates_performed},
          {"update_frequency", r.update_frequency}};
}

}  // namespace deft
