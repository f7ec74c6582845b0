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

// One line per acceptance criterion; exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "deft/error.hpp"
#include "deft/experiment.hpp"
#include "deft/knapsack.hpp"
#include "deft/preserver.hpp"
#include "deft/scheduler.hpp"
#include "deft/simulator.hpp"
#include "deft/trace.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace deft;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<Item> items_of(const std::vector<Micros>& w) {
  std::vector<Item> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back({static_cast<int>(i + 1), w[i]});
  return out;
}

Outcome coverage_fixtures() {
  const auto t0 = Clock::now();
  const LinkSpec fast{"fast", 1.0, std::nullopt, 0};
  const std::map<std::string, double> want = {{"vgg19", 1.98}, {"gpt2", 0.99}, {"resnet101", 1.37}};
  bool ok = true;
  std::string detail;
  for (const auto& t : fixture::iteration_totals()) {
    const double cr = coverage_rate(t.profile, fast);
    ok = ok && want.count(t.name) && std::abs(cr - want.at(t.name)) <= 0.01;
    detail += fmt("%s %.4f (published %.2f); ", t.name.c_str(), cr, t.published_cr);
    if (t.name == "resnet101") ok = ok && !t.note.empty() && t.published_cr == 1.67;
  }
  const double dt = seconds_since(t0);
  return {ok && dt < 1.0, detail + fmt("%.3fs", dt)};
}

Outcome knapsack_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  int mismatches = 0, infeasible = 0;
  const int runs = 1000;
  for (int t = 0; t < runs; ++t) {
    std::vector<Micros> w(static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 15)(rng)));
    for (auto& x : w) x = std::uniform_int_distribution<Micros>(1, 200'000)(rng);
    Micros total = 0;
    for (auto x : w) total += x;
    const Micros cap = std::uniform_int_distribution<Micros>(0, std::max<Micros>(total, 1))(rng);
    const auto items = items_of(w);
    const auto a = naive_knapsack(items, cap);
    const Micros caps[] = {cap};
    if (a.total_value != oracle::subset_sum_max(w, cap)) ++mismatches;
    if (!is_feasible(a, items, caps)) ++infeasible;
  }
  const double dt = seconds_since(t0);
  return {mismatches == 0 && infeasible == 0 && dt < 30.0,
          fmt("%d instances, %d mismatches, %d infeasible, %.2fs", runs, mismatches, infeasible, dt)};
}

Outcome greedy_quality() {
  std::mt19937_64 rng(1002);
  int infeasible = 0;
  double ratio_sum = 0.0, worst = 1.0;
  int measured = 0;
  const int runs = 1000;
  for (int t = 0; t < runs; ++t) {
    std::vector<Micros> w(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 12)(rng)));
    for (auto& x : w) x = std::uniform_int_distribution<Micros>(1, 100'000)(rng);
    Micros total = 0;
    for (auto x : w) total += x;
    std::vector<Micros> caps = {std::uniform_int_distribution<Micros>(0, total)(rng)};
    caps.push_back(static_cast<Micros>(static_cast<double>(caps[0]) / 1.65));
    const auto items = items_of(w);
    const auto g = greedy_multi_knapsack(items, caps);
    if (!is_feasible(g, items, caps)) ++infeasible;
    const Micros best = oracle::multi_knapsack_max(w, caps);
    const double r = best == 0 ? 1.0 : static_cast<double>(g.total_value) / static_cast<double>(best);
    ratio_sum += r;
    worst = std::min(worst, r);
    ++measured;
  }
  const double mean = ratio_sum / measured;
  return {infeasible == 0,
          fmt("%d instances, %d infeasible; greedy/optimum mean %.4f (target >= 0.90), worst %.4f", runs, infeasible,
              mean, worst)};
}

Outcome recursion_oracle() {
  std::mt19937_64 rng(1003);
  int mismatches = 0;
  const int runs = 1000;
  for (int t = 0; t < runs; ++t) {
    const std::size_t n = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 8)(rng));
    std::vector<Item> items;
    std::vector<Micros> w, bwd;
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back({static_cast<int>(n - i), std::uniform_int_distribution<Micros>(1, 50'000)(rng)});
      w.push_back(items.back().weight);
      bwd.push_back(std::uniform_int_distribution<Micros>(0, 30'000)(rng));
    }
    std::vector<Micros> caps = {std::uniform_int_distribution<Micros>(0, 150'000)(rng)};
    std::vector<double> scales = {1.0};
    if (t % 2) {
      caps.push_back(static_cast<Micros>(static_cast<double>(caps[0]) / 1.65));
      scales.push_back(1.65);
    }
    const auto a = recursive_knapsack(items, bwd, caps, scales);
    if (a.total_value != oracle::recursion_tree_value(w, bwd, caps, scales) || !is_feasible(a, items, caps)) {
      ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%d instances (half single, half dual capacity), %d mismatches", runs, mismatches)};
}

Outcome trace_round_trip() {
  std::mt19937_64 rng(1004);
  int failures = 0;
  const int runs = 500;
  for (int t = 0; t < runs; ++t) {
    const auto p = fixture::random_profile(rng, 20);
    if (!(reconstruct_buckets(emit_trace(p, 1 + t % 4), p.size()) == p)) ++failures;
  }
  return {failures == 0, fmt("%d random profiles up to 20 buckets, %d mismatches", runs, failures)};
}

ModelProfile law_profile(double x) {
  constexpr Micros f = 200, b = 1'600;
  const auto comm = static_cast<Micros>(std::llround(x * (1.0 + 1.0 / 1.65) * static_cast<double>(f + b)));
  return fixture::constant_profile(128, f, b, comm);
}

Outcome frequency_law() {
  bool ok = true;
  std::string detail;
  const auto cluster = fixture::cluster({1.0, 1.65});
  for (double x : {0.5, 1.0, 1.5, 2.0}) {
    const auto p = law_profile(x);
    const auto ds = schedule_deft(p, make_capacity_model(p, cluster), 200);
    const double f = effective_update_frequency(ds, 200);
    const double want = std::min(1.0, 1.0 / x);
    const double err = std::abs(f - want) / want;
    int covered = -1;
    try {
      covered = check_gradient_conservation(ds, p.size());
    } catch (const Error& e) {
      detail += fmt(" [conservation broken: %s]", e.what());
    }
    ok = ok && err <= 0.10 && covered >= 0;
    detail += fmt("CR %.1f: %.3f vs %.3f (%+.1f%%, %d iterations delivered); ", x, f, want,
                  100.0 * (f - want) / want, covered);
  }
  return {ok, detail};
}

Outcome bubble_elimination() {
  std::mt19937_64 rng(1007);
  const auto cluster = fixture::cluster({1.0, 1.65}, 0);
  int fitting = 0, nonzero = 0;
  for (int t = 0; t < 300 && fitting < 100; ++t) {
    auto p = fixture::random_profile(rng, 12);
    const Micros limit = std::max<Micros>(1, p.total_backward() / static_cast<Micros>(2 * p.size()));
    for (auto& b : p.buckets) b.comm_fast_us = std::min(b.comm_fast_us, limit);
    const auto ds = schedule_deft(p, make_capacity_model(p, cluster), 30);
    // Keep plans that never merge and update once per iteration after the
    // first; bucket 1 always finishes in the next forward stage.
    bool fits = true;
    for (const auto& d : ds) {
      fits = fits && d.merged.empty() && (d.iteration == 0 || d.updates.size() == 1);
    }
    if (!fits) continue;
    ++fitting;
    const auto r = simulate(p, cluster.links, ds, 30);
    check_timeline(r);
    if (r.bubble_time != 0 || r.bubble_ratio != 0.0) ++nonzero;
  }
  const auto one = fixture::constant_profile(1, 10, 20, 25);
  const auto single = fixture::cluster({1.0});
  const auto run = baseline_wfbp(one, single, 20);
  const auto r = simulate(run.profile, single.links, run.decisions, 20);
  return {fitting >= 50 && nonzero == 0 && r.steady_iteration_us == 55.0,
          fmt("%d fitting DeFT plans, %d with bubbles; WFBP one-bucket steady iteration %.1f us", fitting, nonzero,
              r.steady_iteration_us)};
}

ExperimentConfig vgg_config() { return load_experiment(fixture::data_dir() / "experiments/vgg19_dual.json"); }

Outcome ordering(const ReportBundle& b) {
  auto at = [&](const std::string& s, std::size_t pt) {
    for (const auto& r : b.runs) {
      if (r.scheme == s && r.point_index == pt) return r.report.steady_iteration_us;
    }
    return -1.0;
  };
  const double d = at("deft", 0), n = at("nonsequential", 0), p = at("priority", 0), w = at("wfbp", 0);
  int other_points_ok = 0;
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    if (at("deft", i) <= at("nonsequential", i) && at("nonsequential", i) <= at("priority", i) &&
        at("priority", i) <= at("wfbp", i))
      ++other_points_ok;
  }
  return {d <= n && n <= p && p <= w && d < w,
          fmt("deft %.0f <= nonsequential %.0f <= priority %.0f <= wfbp %.0f us (ordering also holds at %d of %zu "
              "other sweep points)",
              d, n, p, w, other_points_ok, b.points.size() - 1)};
}

Outcome expected_state_formula() {
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int outside = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    WalkParams p;
    p.s_star = 0.5 * u(rng);
    p.eta = 0.001 + 0.2 * u(rng);
    p.mu_t = -1.0 + 4.0 * u(rng);
    p.sigma_t = 0.1 + 50.0 * u(rng);
    const double batch = std::floor(1.0 + 511.0 * u(rng));
    const double s = p.s_star + 2.0 * u(rng);
    const double e = expected_next_state(s, p, batch);
    const auto mc = oracle::reflection_walk(s, p.s_star, p.eta, p.mu_t, p.sigma_t, batch, 1'000'000, 5000 + i);
    const double z = std::abs(e - mc.mean) / mc.standard_error;
    worst = std::max(worst, z);
    if (z > 3.0) ++outside;
  }
  WalkParams lim;
  lim.eta = 0.01;
  lim.mu_t = 1.5;
  lim.sigma_t = 1e-12;
  double limit_err = 0.0;
  for (double s : {0.05, 0.2103, 1.0, 7.5}) {
    const double want = s - lim.eta * lim.mu_t;
    limit_err = std::max(limit_err, std::abs(expected_next_state(s, lim, 64) - want) / want);
  }
  return {outside == 0 && limit_err <= 1e-9,
          fmt("50-point grid at 1e6 samples: %d outside 3 SE (worst %.2f SE); sigma->0 relative error %.1e", outside,
              worst, limit_err)};
}

Outcome preserver_ratio() {
  WalkParams start;
  start.s0 = fixture::kInitialState;
  start.eta = 0.01;
  start.batch = 256;
  const auto fit = calibrate_walk(start, {{{{1, 1, 1, 1}, 4}, fixture::kFixedBatchTrajectory},
                                          {{{2, 1, 1}, 4}, fixture::kDelayedTrajectory}});
  const double ratio = convergence_ratio(fit, {{2, 1, 1}, 4});
  const double end = baseline_expected_state(fit.s0, fit, 4);
  return {std::abs(ratio - 0.993) <= 0.003,
          fmt("fitted mu_t %.4f, sigma_t %.2f; fixed-batch state after 4 steps %.4f; ratio %.5f", fit.mu_t,
              fit.sigma_t, end, ratio)};
}

Outcome feedback() {
  const auto p = fixture::constant_profile(32, 200, 1'600, 5'000);
  WalkParams w;
  w.s0 = 10.0;
  w.eta = 0.1;
  w.mu_t = 1.0;
  w.sigma_t = 1.0;
  w.batch = 32;
  const auto caps = make_capacity_model(p, fixture::cluster({1.0, 1.65}));
  FeedbackOptions opts;
  const auto r = feedback_loop(p, caps, w, opts);
  bool monotone = true;
  for (std::size_t i = 1; i < r.verdict.multipliers.size(); ++i) {
    monotone = monotone && r.verdict.multipliers[i] >= r.verdict.multipliers[i - 1];
  }
  bool cap_enforced = false;
  FeedbackOptions too_many;
  too_many.max_retries = 11;
  try {
    feedback_loop(p, caps, w, too_many);
  } catch (const ValidationError&) {
    cap_enforced = true;
  }
  return {opts.epsilon == 0.01 && r.verdict.retries_used >= 1 && r.verdict.retries_used <= 10 && monotone && cap_enforced,
          fmt("epsilon %.2f; %d retries, final multiplier %.4f, ratio %.4f, passed %s; multipliers %s; cap of 10 "
              "enforced: %s",
              opts.epsilon, r.verdict.retries_used, r.verdict.final_capacity_multiplier, r.verdict.ratio,
              r.verdict.passed ? "yes" : "no", monotone ? "non-decreasing" : "DECREASING",
              cap_enforced ? "yes" : "no")};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s -- %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "coverage-rate fixtures", coverage_fixtures);
  report(2, "knapsack exactness", knapsack_exactness);
  report(3, "multi-knapsack feasibility and quality", greedy_quality);
  report(4, "recursive knapsack oracle", recursion_oracle);
  report(5, "trace round trip", trace_round_trip);
  report(6, "update frequency law and conservation", frequency_law);
  report(7, "bubble elimination", bubble_elimination);

  // The full VGG experiment runs twice: once for ordering, twice for determinism.
  const auto tmp = fs::temp_directory_path() / "deft_acceptance";
  ReportBundle first;
  std::string run_error;
  try {
    first = run_experiment(vgg_config());
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  report(8, "ordering on VGG", [&] {
    if (!run_error.empty()) return Outcome{false, "experiment failed: " + run_error};
    return ordering(first);
  });
  report(9, "expected-state formula", expected_state_formula);
  report(10, "convergence ratio regression", preserver_ratio);
  report(11, "feedback loop", feedback);
  report(12, "determinism", [&] {
    if (!run_error.empty()) return Outcome{false, "experiment failed: " + run_error};
    fs::remove_all(tmp);
    emit_reports(first, tmp / "a");
    emit_reports(run_experiment(vgg_config()), tmp / "b");
    const auto a = read_all(tmp / "a/summary.json"), b = read_all(tmp / "b/summary.json");
    const double dt = seconds_since(t0);
    return Outcome{!a.empty() && a == b && dt < 300.0,
                   fmt("summary.json %zu bytes, identical: %s; acceptance wall time %.1fs", a.size(),
                       a == b ? "yes" : "no", dt)};
  });

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
