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

// Command-line front end over the C API.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deft/deft.h"
#include "json.hpp"

namespace {

int exit_code(deft_status s) {
  switch (s) {
    case DEFT_OK: return 0;
    case DEFT_ERR_VALIDATION: return 2;
    case DEFT_ERR_INFEASIBLE: return 3;
    default: return 1;
  }
}

int fail(deft_status s) {
  std::cerr << "error: " << deft_last_error() << "\n";
  return exit_code(s);
}

// Owns a string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { deft_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string profile_csv(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  std::string out = "id,param_count,forward_us,backward_us,comm_fast_us\n";
  for (const auto& b : doc.at("buckets")) {
    out += std::to_string(b.at("id").get<long long>()) + "," + std::to_string(b.at("param_count").get<long long>()) +
           "," + std::to_string(b.at("forward_us").get<long long>()) + "," +
           std::to_string(b.at("backward_us").get<long long>()) + "," +
           std::to_string(b.at("comm_fast_us").get<long long>()) + "\n";
  }
  return out;
}

std::string knapsack_csv(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  std::string out = "item,knapsack\n";
  const auto& ks = doc.at("knapsacks");
  for (std::size_t k = 0; k < ks.size(); ++k) {
    for (const auto& id : ks[k]) out += std::to_string(id.get<int>()) + "," + std::to_string(k) + "\n";
  }
  for (const auto& id : doc.at("leftovers")) out += std::to_string(id.get<int>()) + ",-\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication scheduling simulator for data-parallel training"};
  app.require_subcommand(1);
  std::string format = "json";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* run = app.add_subcommand("run", "Run an experiment config and write reports");
  std::string config, out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config, "Experiment config JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* trace = app.add_subcommand("trace", "Operator traces");
  trace->require_subcommand(1);
  auto* recon = trace->add_subcommand("reconstruct", "Rebuild a bucket-level profile from a trace");
  std::string trace_path;
  std::size_t buckets = 0;
  recon->add_option("--trace", trace_path, "Trace JSON")->required();
  recon->add_option("--buckets", buckets, "Bucket count")->required();
  recon->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  auto* emit = trace->add_subcommand("emit", "Write the WFBP trace of a profile");
  std::string profile_path;
  int iterations = 1;
  emit->add_option("--profile", profile_path, "Profile JSON")->required();
  emit->add_option("--iterations", iterations, "Iterations")->default_val(1);

  auto* solve = app.add_subcommand("solve", "Debug solvers");
  solve->require_subcommand(1);
  auto* knap = solve->add_subcommand("knapsack", "Solve a (multi-)knapsack instance");
  std::vector<std::int64_t> items, caps;
  knap->add_option("--items", items, "Item weights, comma separated")->required()->delimiter(',');
  knap->add_option("--capacities", caps, "Capacities, comma separated")->required()->delimiter(',');
  knap->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* prof = app.add_subcommand("profile", "Profile statistics");
  double ratio = 1.0;
  prof->add_option("--profile", profile_path, "Profile JSON")->required();
  prof->add_option("--ratio", ratio, "Link speed ratio")->default_val(1.0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run) {
    deft_bundle* bundle = nullptr;
    const std::uint64_t s = seed.value_or(0);
    if (auto st = deft_experiment_run(config.c_str(), seed ? &s : nullptr, &bundle); st != DEFT_OK) return fail(st);
    auto st = deft_bundle_emit(bundle, out_dir.c_str());
    LibString text;
    if (st == DEFT_OK) {
      st = format == "csv" ? deft_bundle_comparison_csv(bundle, &text.p) : deft_bundle_summary_json(bundle, &text.p);
    }
    deft_bundle_free(bundle);
    if (st != DEFT_OK) return fail(st);
    std::cout << text.str() << (format == "csv" ? "" : "\n");
    return 0;
  }
  if (*recon) {
    LibString text;
    if (auto st = deft_trace_reconstruct_file(trace_path.c_str(), buckets, &text.p); st != DEFT_OK) return fail(st);
    std::cout << (format == "csv" ? profile_csv(text.str()) : text.str() + "\n");
    return 0;
  }
  if (*emit) {
    deft_profile* p = nullptr;
    if (auto st = deft_profile_load(profile_path.c_str(), &p); st != DEFT_OK) return fail(st);
    LibString text;
    const auto st = deft_trace_emit(p, iterations, &text.p);
    deft_profile_free(p);
    if (st != DEFT_OK) return fail(st);
    std::cout << text.str() << "\n";
    return 0;
  }
  if (*knap) {
    LibString text;
    if (auto st = deft_solve_knapsack(items.data(), items.size(), caps.data(), caps.size(), &text.p); st != DEFT_OK) {
      return fail(st);
    }
    std::cout << (format == "csv" ? knapsack_csv(text.str()) : text.str() + "\n");
    return 0;
  }
  if (*prof) {
    deft_profile* p = nullptr;
    if (auto st = deft_profile_load(profile_path.c_str(), &p); st != DEFT_OK) return fail(st);
    double cr = 0.0;
    std::size_t n = 0;
    auto st = deft_coverage_rate(p, ratio, &cr);
    if (st == DEFT_OK) st = deft_profile_bucket_count(p, &n);
    deft_profile_free(p);
    if (st != DEFT_OK) return fail(st);
    if (format == "csv") {
      std::printf("buckets,coverage_rate\n%zu,%.4f\n", n, cr);
    } else {
      std::printf("{\"buckets\": %zu, \"coverage_rate\": %.4f}\n", n, cr);
    }
    return 0;
  }
  return 1;
}
