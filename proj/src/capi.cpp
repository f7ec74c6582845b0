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

#include "deft/deft.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "deft/error.hpp"
#include "deft/experiment.hpp"
#include "deft/knapsack.hpp"
#include "deft/trace.hpp"

struct deft_profile {
  deft::ModelProfile value;
};

struct deft_bundle {
  deft::ReportBundle value;
};

namespace {

thread_local std::string g_last_error;

template <class F>
deft_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return DEFT_OK;
  } catch (const deft::Error& e) {
    g_last_error = e.what();
    return static_cast<deft_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DEFT_ERR_INTERNAL;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* what) {
  if (!p) throw deft::Error(deft::ErrorCode::kArgument, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* deft_version(void) { return "1.0.0"; }

const char* deft_last_error(void) { return g_last_error.c_str(); }

void deft_string_free(char* s) { std::free(s); }

deft_status deft_profile_load(const char* path, deft_profile** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new deft_profile{deft::load_profile(path)};
  });
}

deft_status deft_profile_from_json(const char* json_text, deft_profile** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw deft::ValidationError("schema", std::string("invalid JSON: ") + e.what());
    }
    *out = new deft_profile{deft::profile_from_json(doc)};
  });
}

void deft_profile_free(deft_profile* profile) { delete profile; }

deft_status deft_profile_bucket_count(const deft_profile* profile, size_t* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = profile->value.size();
  });
}

deft_status deft_profile_to_json(const deft_profile* profile, char** out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = dup(deft::to_json(profile->value).dump(2));
  });
}

deft_status deft_coverage_rate(const deft_profile* profile, double speed_ratio, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    if (!(speed_ratio >= 1.0)) throw deft::ValidationError("invalid_link", "speed ratio must be >= 1");
    deft::LinkSpec link;
    link.name = "link";
    link.speed_ratio_to_fast = speed_ratio;
    *out = deft::coverage_rate(profile->value, link);
  });
}

deft_status deft_experiment_run(const char* config_path, const uint64_t* seed_override, deft_bundle** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    auto cfg = deft::load_experiment(config_path);
    if (seed_override) cfg.seed = *seed_override;
    *out = new deft_bundle{deft::run_experiment(cfg)};
  });
}

void deft_bundle_free(deft_bundle* bundle) { delete bundle; }

deft_status deft_bundle_emit(const deft_bundle* bundle, const char* out_dir) {
  return guarded([&] {
    require(bundle, "bundle");
    require(out_dir, "out_dir");
    deft::emit_reports(bundle->value, out_dir);
  });
}

deft_status deft_bundle_summary_json(const deft_bundle* bundle, char** out) {
  return guarded([&] {
    require(bundle, "bundle");
    require(out, "out");
    *out = dup(deft::summary_json(bundle->value).dump(2));
  });
}

deft_status deft_bundle_comparison_csv(const deft_bundle* bundle, char** out) {
  return guarded([&] {
    require(bundle, "bundle");
    require(out, "out");
    *out = dup(deft::comparison_csv(bundle->value));
  });
}

deft_status deft_trace_reconstruct_file(const char* trace_path, size_t n_buckets, char** profile_json) {
  return guarded([&] {
    require(trace_path, "trace_path");
    require(profile_json, "profile_json");
    const auto trace = deft::load_trace(trace_path);
    *profile_json = dup(deft::to_json(deft::reconstruct_buckets(trace, n_buckets)).dump(2));
  });
}

deft_status deft_trace_emit(const deft_profile* profile, int iterations, char** trace_json) {
  return guarded([&] {
    require(profile, "profile");
    require(trace_json, "trace_json");
    *trace_json = dup(deft::to_json(deft::emit_trace(profile->value, iterations)).dump());
  });
}

deft_status deft_solve_knapsack(const int64_t* weights, size_t n_items, const int64_t* capacities, size_t n_capacities,
                                char** result_json) {
  return guarded([&] {
    require(result_json, "result_json");
    if (n_items > 0) require(weights, "weights");
    if (n_capacities == 0) throw deft::Error(deft::ErrorCode::kArgument, "at least one capacity is required");
    require(capacities, "capacities");
    std::vector<deft::Item> items;
    for (size_t i = 0; i < n_items; ++i) items.push_back({static_cast<int>(i + 1), weights[i]});
    const std::vector<deft::Micros> caps(capacities, capacities + n_capacities);
    for (auto c : caps) {
      if (c < 0) throw deft::ValidationError("negative_capacity", "capacities must be >= 0");
    }
    const auto a = caps.size() == 1 ? deft::naive_knapsack(items, caps[0]) : deft::greedy_multi_knapsack(items, caps);
    nlohmann::json doc = {{"method", caps.size() == 1 ? "exact" : "greedy"},
                          {"knapsacks", a.knapsacks},
                          {"total_value", a.total_value},
                          {"leftovers", a.leftovers}};
    *result_json = dup(doc.dump());
  });
}

}  // extern "C"
