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

#include <algorithm>
#include <map>

#include "deft/error.hpp"
#include "deft/partition.hpp"
#include "deft/scheduler.hpp"
#include "deft/simulator.hpp"
#include "fixtures.hpp"

using namespace deft;

namespace {

SimReport run_wfbp(const ModelProfile& p, const ClusterConfig& c, int iters, const SimOptions& o = {}) {
  const auto run = baseline_wfbp(p, c, iters);
  return simulate(run.profile, c.links, run.decisions, iters, o);
}

SimReport run_deft(const ModelProfile& p, const ClusterConfig& c, int iters, const SimOptions& o = {}) {
  const auto ds = schedule_deft(p, make_capacity_model(p, c), iters);
  return simulate(p, c.links, ds, iters, o);
}

ModelProfile vgg_partitioned() {
  PartitionConfig cfg;
  cfg.mu = 1.65;
  cfg.comm_overhead_us = 300;
  return partition_buckets(fixture::vgg19(), cfg);
}

}  // namespace

TEST_CASE("serial chain of one bucket") {
  const auto p = fixture::constant_profile(1, 10, 20, 25);
  const auto r = run_wfbp(p, fixture::cluster({1.0}), 10);
  CHECK(r.steady_iteration_us == 55.0);
  for (std::size_t i = 0; i + 1 < r.iteration_times.size(); ++i) CHECK(r.iteration_times[i] == 55);
  CHECK(r.updates_performed == 10);
  CHECK(r.bubble_time > 0);
  check_timeline(r);
}

TEST_CASE("GPT-2 under WFBP") {
  const auto p = fixture::gpt2();
  const auto r = run_wfbp(p, fixture::single_cluster(), 5);
  CHECK(r.steady_iteration_us >= static_cast<double>(p.total_compute()));
  CHECK(r.bubble_ratio > 0.0);
  CHECK(r.bubble_ratio < 0.5);
  check_timeline(r);
}

TEST_CASE("DeFT hides communication when it fits") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    auto p = fixture::random_profile(rng, 8);
    // Shrink transfers until the whole iteration is covered by every stage.
    const Micros limit = std::max<Micros>(1, std::min(p.total_forward(), p.total_backward()) / (2 * static_cast<Micros>(p.size())));
    for (auto& b : p.buckets) b.comm_fast_us = std::min(b.comm_fast_us, limit);
    const auto r = run_deft(p, fixture::cluster({1.0, 1.65}), 20);
    CHECK(r.bubble_time == 0);
    CHECK(r.bubble_ratio == 0.0);
    check_timeline(r);
  }
}

TEST_CASE("DeFT beats WFBP on VGG") {
  const auto p = vgg_partitioned();
  const auto c = fixture::dual_cluster();
  const auto deft = run_deft(p, c, 50);
  const auto wfbp = run_wfbp(fixture::vgg19(), c, 50);
  CHECK(deft.steady_iteration_us < wfbp.steady_iteration_us);
  std::map<std::string, SimReport> m{{"deft", deft}, {"wfbp", wfbp}};
  m["deft"].profile_name = m["wfbp"].profile_name;
  const auto rows = compare(m, "wfbp");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scheme == "deft");
  CHECK(rows[0].speedup > 1.0);
  CHECK(rows[1].speedup == 1.0);
  check_timeline(deft);
}

TEST_CASE("comparison table") {
  const auto r = run_wfbp(fixture::gpt2(), fixture::single_cluster(), 5);
  const auto rows = compare({{"a", r}, {"b", r}}, "a");
  for (const auto& row : rows) CHECK(row.speedup == 1.0);
  const auto csv = comparison_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kValidation;
  };
  CHECK(code([] { compare({}, "a"); }) == ErrorCode::kArgument);
  CHECK(code([&] { compare({{"a", r}}, "z"); }) == ErrorCode::kArgument);
  auto other = run_wfbp(fixture::vgg19(), fixture::single_cluster(), 5);
  CHECK(code([&] { compare({{"a", r}, {"b", other}}, "a"); }) == ErrorCode::kMismatch);
}

TEST_CASE("jitter is seeded") {
  SimOptions o;
  o.jitter = 0.1;
  o.seed = 99;
  const auto p = vgg_partitioned();
  const auto a = run_deft(p, fixture::dual_cluster(), 20, o);
  const auto b = run_deft(p, fixture::dual_cluster(), 20, o);
  CHECK(a.timeline == b.timeline);
  CHECK(timeline_jsonl(a) == timeline_jsonl(b));
  o.seed = 100;
  const auto c = run_deft(p, fixture::dual_cluster(), 20, o);
  CHECK(c.timeline != a.timeline);
  check_timeline(a);
  check_timeline(c);
}

TEST_CASE("affine link model") {
  SimOptions o;
  o.comm_model = CommModel::kAffine;
  const auto r = run_wfbp(fixture::vgg19(), fixture::dual_cluster(), 3, o);
  check_timeline(r);
  CHECK_THROWS_AS(run_wfbp(fixture::vgg19(), fixture::cluster({1.0}), 3, o), ValidationError);
}

TEST_CASE("bad decisions") {
  const auto p = fixture::constant_profile(2, 10, 10, 5);
  auto ds = baseline_wfbp(p, fixture::cluster({1.0}), 2).decisions;
  ds[0].backward_plan[0][0].bucket_id = 7;
  try {
    simulate(p, fixture::cluster({1.0}).links, ds, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMismatch);
  }
  auto early = baseline_wfbp(p, fixture::cluster({1.0}), 2).decisions;
  early[0].backward_plan[0].pop_back();
  try {
    simulate(p, fixture::cluster({1.0}).links, early, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvariant);
  }
}

TEST_CASE("exports") {
  const auto r = run_wfbp(fixture::constant_profile(2, 10, 10, 5), fixture::cluster({1.0}), 2);
  const auto trace = chrome_trace(r, fixture::cluster({1.0}).links);
  REQUIRE(trace.contains("traceEvents"));
  bool complete = false;
  for (const auto& e : trace["traceEvents"]) complete = complete || e.value("ph", "") == "X";
  CHECK(complete);
  const auto lines = timeline_jsonl(r);
  CHECK(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')) == r.timeline.size());
  const auto s = summary_json(r);
  CHECK(s.contains("steady_iteration_us"));
}

TEST_CASE("overlap detection") {
  auto r = run_wfbp(fixture::constant_profile(2, 10, 10, 5), fixture::cluster({1.0}), 2);
  for (auto& e : r.timeline) {
    if (e.kind == EventKind::kBackwardCompute) {
      e.end += 1'000;
      break;
    }
  }
  CHECK_THROWS_AS(check_timeline(r), Error);
}
