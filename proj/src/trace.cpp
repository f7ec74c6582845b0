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

#include "deft/trace.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <unordered_map>

#include "deft/error.hpp"

namespace deft {

using nlohmann::json;

namespace {

std::string layer_name(int bucket, int op) {
  return "layer" + std::to_string(bucket) + "_" + std::to_string(op);
}

const char* to_string(TraceThread t) {
  switch (t) {
    case TraceThread::kForward: return "forward";
    case TraceThread::kBackward: return "backward";
    case TraceThread::kComputeStream: return "compute_stream";
    case TraceThread::kCommStream: return "comm_stream";
  }
  return "?";
}

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::kComputeLaunch: return "compute_launch";
    case OperatorKind::kKernel: return "kernel";
    case OperatorKind::kCommunication: return "communication";
  }
  return "?";
}

TraceThread thread_from(const std::string& s) {
  if (s == "forward") return TraceThread::kForward;
  if (s == "backward") return TraceThread::kBackward;
  if (s == "compute_stream") return TraceThread::kComputeStream;
  if (s == "comm_stream") return TraceThread::kCommStream;
  throw ValidationError("schema", "unknown trace thread '" + s + "'");
}

OperatorKind kind_from(const std::string& s) {
  if (s == "compute_launch") return OperatorKind::kComputeLaunch;
  if (s == "kernel") return OperatorKind::kKernel;
  if (s == "communication") return OperatorKind::kCommunication;
  throw ValidationError("schema", "unknown operator kind '" + s + "'");
}

Error reconstruction_error(const std::string& what) { return Error(ErrorCode::kReconstruction, what); }
Error malformed(const std::string& what) { return Error(ErrorCode::kMalformedTrace, what); }

class Emitter {
 public:
  void cpu(TraceThread thread, std::string name, Micros at, OperatorKind kind, std::int64_t ext) {
    events.push_back({std::move(name), thread, ext, at, at, kind});
  }
  void device(TraceThread stream, std::string name, Micros start, Micros end, OperatorKind kind, std::int64_t ext) {
    events.push_back({std::move(name), stream, ext, start, end, kind});
  }
  std::int64_t next_id() { return next_ext_++; }

  std::vector<OperatorEvent> events;

 private:
  std::int64_t next_ext_ = 1;
};

// Per-thread operator sequences of one iteration, ordered by (start, id).
struct IterationView {
  std::vector<const OperatorEvent*> forward;
  std::vector<const OperatorEvent*> backward;
  std::vector<const OperatorEvent*> compute;
  std::vector<const OperatorEvent*> comm;
};

bool by_time(const OperatorEvent* a, const OperatorEvent* b) {
  if (a->start_us != b->start_us) return a->start_us < b->start_us;
  return a->external_id < b->external_id;
}

std::int64_t parse_numel(const std::string& name) {
  static const std::regex re(R"(numel=(\d+))");
  std::smatch m;
  if (std::regex_search(name, m, re)) return std::stoll(m[1].str());
  return 1;
}

ModelProfile reconstruct_one(const IterationView& v, Micros iteration_start, std::size_t n,
                             const std::unordered_map<std::int64_t, const OperatorEvent*>& kernels,
                             std::size_t iteration) {
  const std::string where = "iteration " + std::to_string(iteration);
  for (std::size_t i = 1; i < v.compute.size(); ++i) {
    if (v.compute[i]->start_us < v.compute[i - 1]->end_us) {
      throw malformed(where + ": compute-stream events '" + v.compute[i - 1]->name + "' and '" +
                      v.compute[i]->name + "' overlap");
    }
  }
  if (v.comm.size() != n) {
    throw reconstruction_error(where + ": expected " + std::to_string(n) + " communication events, found " +
                               std::to_string(v.comm.size()));
  }

  std::unordered_map<std::int64_t, std::size_t> backward_pos, forward_pos;
  std::unordered_map<std::string, std::size_t> forward_by_name;
  for (std::size_t i = 0; i < v.backward.size(); ++i) backward_pos[v.backward[i]->external_id] = i;
  for (std::size_t i = 0; i < v.forward.size(); ++i) {
    forward_pos[v.forward[i]->external_id] = i;
    forward_by_name.emplace(v.forward[i]->name, i);
  }
  auto kernel_end = [&](const OperatorEvent* op, int bucket) {
    auto it = kernels.find(op->external_id);
    if (it == kernels.end()) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(bucket) + ": no kernel with external id " +
                                 std::to_string(op->external_id) + " for operator '" + op->name + "'");
    }
    return it->second->end_us;
  };

  // Step 1: each collective's external id locates the last backward-thread
  // operator of its bucket. Launch order on the backward thread gives the
  // bucket number (the first launched belongs to bucket n).
  struct Located {
    const OperatorEvent* comm;
    std::size_t launcher;
  };
  std::vector<Located> located;
  for (std::size_t k = 0; k < v.comm.size(); ++k) {
    const int provisional = static_cast<int>(n - k);
    auto it = backward_pos.find(v.comm[k]->external_id);
    if (it == backward_pos.end()) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(provisional) +
                                 ": no backward-thread operator carries external id " +
                                 std::to_string(v.comm[k]->external_id));
    }
    located.push_back({v.comm[k], it->second});
  }
  std::sort(located.begin(), located.end(), [](const Located& a, const Located& b) { return a.launcher < b.launcher; });

  std::vector<Micros> fwd_end(n + 1, 0), bwd_end(n + 2, 0), comm(n + 1, 0);
  std::vector<std::int64_t> params(n + 1, 1);
  std::vector<bool> have_fwd_end(n + 1, false);
  for (std::size_t k = 0; k < located.size(); ++k) {
    const int bucket = static_cast<int>(n - k);
    const auto& loc = located[k];
    comm[bucket] = loc.comm->end_us - loc.comm->start_us;
    params[bucket] = parse_numel(loc.comm->name);

    // Step 2: the operator just before the launcher issued the bucket's
    // final gradient kernel.
    if (loc.launcher == 0) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(bucket) +
                                 ": no gradient operator precedes the communication launch");
    }
    const OperatorEvent* last_grad = v.backward[loc.launcher - 1];
    bwd_end[bucket] = kernel_end(last_grad, bucket);

    // Step 3: the last gradient operator mirrors the bucket's first forward
    // operator.
    std::string fwd_name = last_grad->name;
    const std::string suffix = kBackwardSuffix;
    if (fwd_name.size() <= suffix.size() || fwd_name.compare(fwd_name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(bucket) + ": gradient operator '" +
                                 last_grad->name + "' has no forward counterpart");
    }
    fwd_name.resize(fwd_name.size() - suffix.size());
    auto fit = forward_by_name.find(fwd_name);
    if (fit == forward_by_name.end()) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(bucket) + ": forward operator '" + fwd_name +
                                 "' not found");
    }

    // Step 4: the forward operator before it is the last one of bucket N-1;
    // its kernel marks that bucket's forward endpoint.
    if (bucket > 1) {
      if (fit->second == 0) {
        throw reconstruction_error(where + ", bucket #" + std::to_string(bucket - 1) +
                                   ": no forward operator precedes bucket #" + std::to_string(bucket));
      }
      fwd_end[bucket - 1] = kernel_end(v.forward[fit->second - 1], bucket - 1);
      have_fwd_end[bucket - 1] = true;
    }
  }
  if (v.forward.empty()) throw reconstruction_error(where + ": no forward operators");
  fwd_end[n] = kernel_end(v.forward.back(), static_cast<int>(n));
  have_fwd_end[n] = true;
  for (std::size_t b = 1; b <= n; ++b) {
    if (!have_fwd_end[b]) {
      throw reconstruction_error(where + ", bucket #" + std::to_string(b) + ": forward endpoint not found");
    }
  }

  ModelProfile p;
  p.buckets.resize(n);
  for (std::size_t b = 1; b <= n; ++b) {
    auto& out = p.buckets[b - 1];
    out.id = static_cast<int>(b);
    out.param_count = params[b];
    out.forward_us = fwd_end[b] - (b == 1 ? iteration_start : fwd_end[b - 1]);
    out.backward_us = bwd_end[b] - (b == n ? fwd_end[n] : bwd_end[b + 1]);
    out.comm_fast_us = comm[b];
    if (out.forward_us < 0 || out.backward_us < 0) {
      throw malformed(where + ", bucket #" + std::to_string(b) + ": compute endpoints are out of order");
    }
  }
  return p;
}

}  // namespace

OperatorTrace emit_trace(const ModelProfile& profile, int iterations) {
  validate(profile);
  if (iterations < 1) throw ValidationError("invalid_iterations", "emit_trace: iterations must be >= 1");
  const int n = static_cast<int>(profile.size());
  Emitter em;
  OperatorTrace trace;
  trace.model = TraceModelInfo{profile.name, profile.batch_size, profile.learning_rate};
  Micros t = 0;
  for (int it = 0; it < iterations; ++it) {
    trace.iteration_boundaries_us.push_back(t);
    for (int j = 1; j <= n; ++j) {
      const auto& b = profile.bucket(j);
      const Micros halves[2] = {b.forward_us / 2, b.forward_us - b.forward_us / 2};
      for (int op = 0; op < 2; ++op) {
        const auto ext = em.next_id();
        em.cpu(TraceThread::kForward, layer_name(j, op), t, OperatorKind::kComputeLaunch, ext);
        em.device(TraceThread::kComputeStream, layer_name(j, op) + "_kernel", t, t + halves[op],
                  OperatorKind::kKernel, ext);
        t += halves[op];
      }
    }
    Micros comm_free = t;
    for (int j = n; j >= 1; --j) {
      const auto& b = profile.bucket(j);
      const Micros halves[2] = {b.backward_us / 2, b.backward_us - b.backward_us / 2};
      // Gradients run in reverse layer order: op1 first, op0 last.
      for (int op = 1; op >= 0; --op) {
        const auto ext = em.next_id();
        const std::string name = layer_name(j, op) + kBackwardSuffix;
        em.cpu(TraceThread::kBackward, name, t, OperatorKind::kComputeLaunch, ext);
        em.device(TraceThread::kComputeStream, name + "_kernel", t, t + halves[1 - op], OperatorKind::kKernel, ext);
        t += halves[1 - op];
      }
      const auto ext = em.next_id();
      em.cpu(TraceThread::kBackward, "allreduce_bucket" + std::to_string(j), t, OperatorKind::kCommunication, ext);
      const Micros start = std::max(comm_free, t);
      comm_free = start + b.comm_fast_us;
      em.device(TraceThread::kCommStream, "ncclAllReduce(numel=" + std::to_string(b.param_count) + ")", start,
                comm_free, OperatorKind::kCommunication, ext);
    }
    t = std::max(t, comm_free);
  }
  trace.events = std::move(em.events);
  return trace;
}

std::vector<ModelProfile> reconstruct_iterations(const OperatorTrace& trace, std::size_t n_buckets) {
  if (n_buckets < 1) throw ValidationError("invalid_buckets", "reconstruct_buckets: n_buckets must be >= 1");
  if (trace.iteration_boundaries_us.empty()) {
    throw reconstruction_error("trace has no iteration boundaries");
  }
  const auto& bounds = trace.iteration_boundaries_us;
  if (!std::is_sorted(bounds.begin(), bounds.end())) throw malformed("iteration boundaries are not sorted");

  std::unordered_map<std::int64_t, const OperatorEvent*> kernels;
  for (const auto& e : trace.events) {
    if (e.end_us < e.start_us) throw malformed("operator '" + e.name + "' ends before it starts");
    if (e.thread == TraceThread::kComputeStream) kernels[e.external_id] = &e;
  }

  std::vector<IterationView> views(bounds.size());
  for (const auto& e : trace.events) {
    if (e.start_us < bounds.front()) continue;
    const auto idx = static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), e.start_us) - bounds.begin() - 1);
    auto& v = views[idx];
    switch (e.thread) {
      case TraceThread::kForward: v.forward.push_back(&e); break;
      case TraceThread::kBackward: v.backward.push_back(&e); break;
      case TraceThread::kComputeStream: v.compute.push_back(&e); break;
      case TraceThread::kCommStream:
        if (e.kind == OperatorKind::kCommunication) v.comm.push_back(&e);
        break;
    }
  }

  std::vector<ModelProfile> out;
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto& v = views[i];
    std::sort(v.forward.begin(), v.forward.end(), by_time);
    std::sort(v.backward.begin(), v.backward.end(), by_time);
    std::sort(v.compute.begin(), v.compute.end(), by_time);
    std::sort(v.comm.begin(), v.comm.end(), by_time);
    ModelProfile p = reconstruct_one(v, bounds[i], n_buckets, kernels, i);
    if (trace.model) {
      p.name = trace.model->name;
      p.batch_size = trace.model->batch_size;
      p.learning_rate = trace.model->learning_rate;
    } else {
      p.name = "reconstructed";
    }
    out.push_back(std::move(p));
  }
  return out;
}

ModelProfile reconstruct_buckets(const OperatorTrace& trace, std::size_t n_buckets) {
  const auto per_iter = reconstruct_iterations(trace, n_buckets);
  ModelProfile result = per_iter.front();
  const std::size_t mid = (per_iter.size() - 1) / 2;
  auto median = [&](auto field) {
    std::vector<std::int64_t> vals;
    vals.reserve(per_iter.size());
    for (const auto& p : per_iter) vals.push_back(field(p));
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
    return vals[mid];
  };
  for (std::size_t b = 0; b < n_buckets; ++b) {
    auto& out = result.buckets[b];
    out.param_count = median([b](const ModelProfile& p) { return p.buckets[b].param_count; });
    out.forward_us = median([b](const ModelProfile& p) { return p.buckets[b].forward_us; });
    out.backward_us = median([b](const ModelProfile& p) { return p.buckets[b].backward_us; });
    out.comm_fast_us = median([b](const ModelProfile& p) { return p.buckets[b].comm_fast_us; });
  }
  return result;
}

json to_json(const OperatorTrace& trace) {
  json events = json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"name", e.name},
                      {"thread", to_string(e.thread)},
                      {"external_id", e.external_id},
                      {"start_us", e.start_us},
                      {"end_us", e.end_us},
                      {"kind", to_string(e.kind)}});
  }
  json doc = {{"events", std::move(events)}, {"iteration_boundaries_us", trace.iteration_boundaries_us}};
  if (trace.model) {
    doc["model"] = {{"name", trace.model->name},
                    {"batch_size", trace.model->batch_size},
                    {"learning_rate", trace.model->learning_rate}};
  }
  return doc;
}

OperatorTrace trace_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("events") || !doc.contains("iteration_boundaries_us")) {
    throw ValidationError("schema", "trace must be an object with 'events' and 'iteration_boundaries_us'");
  }
  OperatorTrace t;
  try {
    for (const auto& je : doc.at("events")) {
      OperatorEvent e;
      e.name = je.at("name").get<std::string>();
      e.thread = thread_from(je.at("thread").get<std::string>());
      e.external_id = je.at("external_id").get<std::int64_t>();
      e.start_us = je.at("start_us").get<Micros>();
      e.end_us = je.at("end_us").get<Micros>();
      e.kind = kind_from(je.at("kind").get<std::string>());
      t.events.push_back(std::move(e));
    }
    t.iteration_boundaries_us = doc.at("iteration_boundaries_us").get<std::vector<Micros>>();
    if (auto it = doc.find("model"); it != doc.end() && it->is_object()) {
      t.model = TraceModelInfo{it->at("name").get<std::string>(), it->at("batch_size").get<std::int64_t>(),
                               it->at("learning_rate").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError("schema", std::string("malformed trace document: ") + e.what());
  }
  return t;
}

OperatorTrace load_trace(const std::filesystem::path& path) { return trace_from_json(read_json_file(path)); }

}  // namespace deft
