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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "deft/deft.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string data(const std::string& rel) { return (fs::path(DEFT_DATA_DIR) / rel).string(); }

json take(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(s);
  deft_string_free(s);
  return j;
}

}  // namespace

TEST_CASE("profile handle") {
  deft_profile* p = nullptr;
  REQUIRE(deft_profile_load(data("profiles/vgg19.json").c_str(), &p) == DEFT_OK);
  size_t n = 0;
  CHECK(deft_profile_bucket_count(p, &n) == DEFT_OK);
  CHECK(n == 6);
  double cr = 0;
  CHECK(deft_coverage_rate(p, 1.0, &cr) == DEFT_OK);
  CHECK(cr == doctest::Approx(1.9014).epsilon(0.001));
  CHECK(deft_coverage_rate(p, 0.5, &cr) == DEFT_ERR_VALIDATION);
  char* text = nullptr;
  CHECK(deft_profile_to_json(p, &text) == DEFT_OK);
  deft_profile* q = nullptr;
  CHECK(deft_profile_from_json(text, &q) == DEFT_OK);
  deft_string_free(text);
  size_t m = 0;
  CHECK(deft_profile_bucket_count(q, &m) == DEFT_OK);
  CHECK(m == 6);
  deft_profile_free(q);
  deft_profile_free(p);
}

TEST_CASE("status codes and messages") {
  deft_profile* p = nullptr;
  CHECK(deft_profile_load("/nonexistent/profile.json", &p) == DEFT_ERR_IO);
  CHECK(std::string(deft_last_error()).size() > 0);
  CHECK(deft_profile_from_json("{not json", &p) == DEFT_ERR_VALIDATION);
  CHECK(deft_profile_from_json(nullptr, &p) == DEFT_ERR_ARGUMENT);
  CHECK(deft_profile_bucket_count(nullptr, nullptr) == DEFT_ERR_ARGUMENT);
  deft_profile_free(nullptr);
  deft_bundle_free(nullptr);
  deft_string_free(nullptr);
  CHECK(std::string(deft_version()).size() > 0);
}

TEST_CASE("knapsack solver") {
  const int64_t w[] = {4, 5, 6};
  const int64_t one[] = {10};
  char* out = nullptr;
  REQUIRE(deft_solve_knapsack(w, 3, one, 1, &out) == DEFT_OK);
  auto j = take(out);
  CHECK(j["total_value"] == 10);
  CHECK(j["method"] == "exact");

  const int64_t two[] = {4, 8};
  const int64_t w2[] = {5, 4, 3};
  REQUIRE(deft_solve_knapsack(w2, 3, two, 2, &out) == DEFT_OK);
  j = take(out);
  CHECK(j["total_value"] == 12);
  CHECK(j["method"] == "greedy");

  const int64_t bad[] = {-1};
  CHECK(deft_solve_knapsack(w, 3, bad, 1, &out) == DEFT_ERR_VALIDATION);
}

TEST_CASE("trace through files") {
  deft_profile* p = nullptr;
  REQUIRE(deft_profile_load(data("profiles/gpt2.json").c_str(), &p) == DEFT_OK);
  char* trace = nullptr;
  REQUIRE(deft_trace_emit(p, 2, &trace) == DEFT_OK);
  const auto path = fs::temp_directory_path() / "deft_capi_trace.json";
  std::ofstream(path) << trace;
  deft_string_free(trace);
  char* back = nullptr;
  REQUIRE(deft_trace_reconstruct_file(path.string().c_str(), 13, &back) == DEFT_OK);
  char* orig = nullptr;
  REQUIRE(deft_profile_to_json(p, &orig) == DEFT_OK);
  CHECK(take(back)["buckets"] == take(orig)["buckets"]);
  CHECK(deft_trace_reconstruct_file(path.string().c_str(), 12, &back) == DEFT_ERR_RECONSTRUCTION);
  deft_profile_free(p);
}

TEST_CASE("experiment bundle") {
  const auto cfg = fs::temp_directory_path() / "deft_capi_experiment.json";
  std::ofstream(cfg) << json{{"profile", data("profiles/vgg19.json")},
                             {"cluster", data("configs/cluster_dual.json")},
                             {"schemes", {"wfbp", "deft"}},
                             {"iterations", 20}}
                            .dump();
  deft_bundle* b = nullptr;
  const uint64_t seed = 5;
  REQUIRE(deft_experiment_run(cfg.string().c_str(), &seed, &b) == DEFT_OK);
  char* summary = nullptr;
  REQUIRE(deft_bundle_summary_json(b, &summary) == DEFT_OK);
  const auto s = take(summary);
  CHECK(s["seed"] == 5);
  CHECK(s["runs"].size() == 2);
  char* csv = nullptr;
  REQUIRE(deft_bundle_comparison_csv(b, &csv) == DEFT_OK);
  CHECK(std::string(csv).find("deft") != std::string::npos);
  deft_string_free(csv);
  const auto out = fs::temp_directory_path() / "deft_capi_out";
  fs::remove_all(out);
  CHECK(deft_bundle_emit(b, out.string().c_str()) == DEFT_OK);
  CHECK(fs::exists(out / "summary.json"));
  deft_bundle_free(b);

  CHECK(deft_experiment_run("/nonexistent/cfg.json", nullptr, &b) == DEFT_ERR_IO);
}
