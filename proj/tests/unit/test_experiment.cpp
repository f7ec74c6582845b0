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

#include <fstream>
#include <sstream>

#include "deft/error.hpp"
#include "deft/experiment.hpp"
#include "fixtures.hpp"

using namespace deft;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_doc(const std::string& profile, const std::string& cluster) {
  return {{"profile", (fixture::data_dir() / "profiles" / profile).string()},
          {"cluster", (fixture::data_dir() / "configs" / cluster).string()},
          {"schemes", {"wfbp"}},
          {"iterations", 100},
          {"seed", 1}};
}

const RunRecord& find(const ReportBundle& b, const std::string& scheme, std::size_t point) {
  for (const auto& r : b.runs) {
    if (r.scheme == scheme && r.point_index == point) return r;
  }
  throw std::runtime_error("run not found");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("deft_experiment_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("single WFBP run") {
  const auto b = run_experiment(experiment_from_json(base_doc("gpt2.json", "cluster_single.json"), "/"));
  REQUIRE(b.runs.size() == 1);
  CHECK(b.runs[0].report.updates_performed == 100);
  CHECK(b.runs[0].report.iterations == 100);
  CHECK(b.config_hash.size() == 16);
}

TEST_CASE("halving bandwidth slows WFBP") {
  auto doc = base_doc("gpt2.json", "cluster_single.json");
  doc["iterations"] = 20;
  doc["sweep"] = {{"bandwidth_scale", {1.0, 0.5}}};
  const auto b = run_experiment(experiment_from_json(doc, "/"));
  REQUIRE(b.points.size() == 2);
  CHECK(find(b, "wfbp", 1).report.steady_iteration_us > find(b, "wfbp", 0).report.steady_iteration_us);
}

TEST_CASE("single-link ablation updates less often") {
  auto doc = base_doc("vgg19.json", "cluster_dual.json");
  doc["schemes"] = {"wfbp", "deft", "deft_single_link"};
  doc["partition"] = {{"partition_size", 6'500'000}, {"enable_fusion", true}};
  const auto b = run_experiment(experiment_from_json(doc, "/"));
  const auto& multi = find(b, "deft", 0).report;
  const auto& single = find(b, "deft_single_link", 0).report;
  CHECK(single.update_frequency < multi.update_frequency);
  CHECK(multi.steady_iteration_us < find(b, "wfbp", 0).report.steady_iteration_us);
}

TEST_CASE("reports") {
  SUBCASE("empty bundle") {
    const auto dir = fresh_dir("empty");
    emit_reports(ReportBundle{}, dir);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(!fs::exists(dir / "comparison.csv"));
    CHECK(nlohmann::json::parse(slurp(dir / "summary.json"))["runs"].empty());
  }
  SUBCASE("two schemes") {
    auto doc = base_doc("vgg19.json", "cluster_dual.json");
    doc["schemes"] = {"wfbp", "priority"};
    doc["iterations"] = 20;
    const auto b = run_experiment(experiment_from_json(doc, "/"));
    const auto dir = fresh_dir("two");
    emit_reports(b, dir);
    const auto csv = slurp(dir / "comparison.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find(",wfbp,") != std::string::npos);
    CHECK(fs::exists(dir / "runs/wfbp_0/timeline.jsonl"));
    CHECK(fs::exists(dir / "runs/priority_0/trace.json"));
    CHECK(fs::exists(dir / "plotdata/speedup_vs_bandwidth.csv"));
    CHECK(fs::exists(dir / "plotdata/speedup_vs_partition_size.csv"));
    const auto summary = summary_json(b);
    for (const auto& r : summary["runs"]) {
      CHECK(r["config_hash"] == b.config_hash);
      if (r["scheme"] == "wfbp") CHECK(r["metrics"]["speedup"].get<double>() == 1.0);
    }
  }
}

TEST_CASE("same seed, same summary") {
  auto doc = base_doc("vgg19.json", "cluster_dual.json");
  doc["schemes"] = {"wfbp", "deft"};
  doc["iterations"] = 30;
  doc["simulator"] = {{"jitter", 0.05}};
  const auto cfg = experiment_from_json(doc, "/");
  CHECK(summary_json(run_experiment(cfg)).dump() == summary_json(run_experiment(cfg)).dump());
}

TEST_CASE("config errors") {
  auto kind = [](const nlohmann::json& doc) {
    try {
      experiment_from_json(doc, "/");
    } catch (const ValidationError& e) {
      return e.kind();
    }
    return std::string();
  };
  auto doc = base_doc("gpt2.json", "cluster_single.json");
  doc["schemes"] = {"wfbp", "bytescheduler"};
  CHECK(kind(doc) == "unknown_scheme");
  doc = base_doc("gpt2.json", "cluster_single.json");
  doc.erase("schemes");
  CHECK(kind(doc) == "missing_field");
  doc = base_doc("gpt2.json", "cluster_single.json");
  doc["sweep"] = {{"bandwidth_scale", nlohmann::json::array()}};
  CHECK(kind(doc) == "empty_sweep");
  doc = base_doc("gpt2.json", "cluster_single.json");
  doc["iterations"] = 0;
  CHECK(kind(doc) == "invalid_iterations");
}

TEST_CASE("relative paths and sweeps") {
  const auto cfg = load_experiment(fixture::data_dir() / "experiments/vgg19_dual.json");
  CHECK(fs::exists(cfg.profile_path));
  CHECK(cfg.walk.has_value());
  const auto pts = sweep_points(cfg);
  REQUIRE(pts.size() == 6);
  CHECK(pts[0].bandwidth_scale == 1.0);
  CHECK(pts[3].bandwidth_scale == 0.5);
  CHECK(pts[1].partition_size == 3'000'000);

  const auto p = fixture::vgg19();
  const auto half = apply_sweep(p, {0.5, 6'500'000, 0}, cfg);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(half.buckets[i].comm_fast_us == 2 * p.buckets[i].comm_fast_us);
}

TEST_CASE("errors name the run") {
  const auto path = fs::temp_directory_path() / "deft_experiment_tiny.json";
  std::ofstream(path) << R"({"name":"tiny","batch_size":8,"learning_rate":0.01,"buckets":[
      {"id":1,"param_count":2,"forward_us":1,"backward_us":50,"comm_fast_us":900}]})";
  auto doc = base_doc("vgg19.json", "cluster_dual.json");
  doc["profile"] = path.string();
  doc["schemes"] = {"deft"};
  try {
    run_experiment(experiment_from_json(doc, "/"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
    CHECK(std::string(e.what()).find("scheme 'deft'") != std::string::npos);
  }
}

TEST_CASE("hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
