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

#include "deft/preserver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "deft/error.hpp"

namespace deft {

using nlohmann::json;

namespace {

constexpr int kSteadyStartLimit = 500;

}  // namespace

void validate(const WalkParams& p) {
  if (!(p.eta > 0.0)) throw ValidationError("invalid_walk", "eta must be > 0");
  if (!(p.sigma_t > 0.0)) throw ValidationError("invalid_walk", "sigma_t must be > 0");
  if (p.batch < 1) throw ValidationError("invalid_walk", "batch must be >= 1");
  if (p.s0 < p.s_star) throw ValidationError("invalid_walk", "s0 must be >= s_star");
}

double expected_next_state(double s, const WalkParams& p, double batch) {
  if (p.sigma_t == 0.0) throw Error(ErrorCode::kArgument, "degenerate walk: sigma_t is zero");
  if (!(batch >= 1.0)) throw Error(ErrorCode::kArgument, "batch must be >= 1");
  const double m = s - p.s_star - p.eta * p.mu_t;
  const double a = m / (p.eta * p.sigma_t) * std::sqrt(batch);
  // Phi(a) - Phi(-a) == erf(a / sqrt 2)
  return m * std::erf(a / std::numbers::sqrt2) + noise_term(s, p, batch) + p.s_star;
}

double noise_term(double s, const WalkParams& p, double batch) {
  if (p.sigma_t == 0.0) throw Error(ErrorCode::kArgument, "degenerate walk: sigma_t is zero");
  const double m = s - p.s_star - p.eta * p.mu_t;
  const double a = m / (p.eta * p.sigma_t) * std::sqrt(batch);
  return p.eta * p.sigma_t / std::sqrt(batch) * std::sqrt(2.0 / std::numbers::pi) * std::exp(-a * a / 2.0);
}

std::vector<double> sequence_trajectory(double s_a, const WalkParams& p, const BatchSequence& seq) {
  std::vector<double> out;
  double s = s_a;
  for (int k : seq.k) {
    if (k < 1) throw Error(ErrorCode::kArgument, "batch sequence entries must be >= 1");
    s = expected_next_state(s, p, static_cast<double>(k) * static_cast<double>(p.batch));
    out.push_back(s);
  }
  return out;
}

double sequence_expected_state(double s_a, const WalkParams& p, const BatchSequence& seq) {
  const auto t = sequence_trajectory(s_a, p, seq);
  return t.empty() ? s_a : t.back();
}

double baseline_expected_state(double s_a, const WalkParams& p, int steps) {
  double s = s_a;
  for (int i = 0; i < steps; ++i) s = expected_next_state(s, p, static_cast<double>(p.batch));
  return s;
}

double convergence_ratio(const WalkParams& p, const BatchSequence& seq) {
  validate(p);
  return baseline_expected_state(p.s0, p, seq.period) / sequence_expected_state(p.s0, p, seq);
}

BatchSequence extract_batch_sequence(const std::vector<ScheduleDecision>& decisions) {
  std::vector<std::vector<int>> sig;
  sig.reserve(decisions.size());
  for (const auto& d : decisions) {
    std::vector<int> s;
    for (const auto& u : d.updates) s.push_back(u.merge_count);
    sig.push_back(std::move(s));
  }
  const std::size_t n = sig.size();
  // A tail that merely repeats twice is not a steady state; the pattern
  // must hold over the second half of the run at least.
  const std::size_t start_limit = std::min(static_cast<std::size_t>(kSteadyStartLimit), n / 2);
  for (std::size_t period = 1; 2 * period <= n; ++period) {
    // Earliest start after which the signature is period-periodic.
    std::size_t start = 0;
    for (std::size_t i = n - period; i-- > 0;) {
      if (sig[i] != sig[i + period]) {
        start = i + 1;
        break;
      }
    }
    if (start > start_limit || start + 2 * period > n) continue;
    BatchSequence seq;
    seq.period = static_cast<int>(period);
    for (std::size_t i = start; i < start + period; ++i) seq.k.insert(seq.k.end(), sig[i].begin(), sig[i].end());
    int sum = 0;
    for (int k : seq.k) sum += k;
    if (sum != seq.period) {
      throw Error(ErrorCode::kNonSteadyState, "update pattern with period " + std::to_string(period) + " applies " +
                                                  std::to_string(sum) + " iterations of gradients");
    }
    return seq;
  }
  throw Error(ErrorCode::kNonSteadyState,
              "no repeating update pattern within " + std::to_string(n) + " scheduled iterations");
}

FeedbackResult feedback_loop(const ModelProfile& profile, const CapacityModel& initial, const WalkParams& walk,
                             const FeedbackOptions& options) {
  validate(walk);
  if (!(options.epsilon >= 0.0)) throw ValidationError("invalid_epsilon", "epsilon must be >= 0");
  if (options.max_retries < 0 || options.max_retries > 10) {
    throw ValidationError("invalid_retries", "max_retries must lie in [0, 10]");
  }
  if (!(options.step > 1.0)) throw ValidationError("invalid_step", "capacity step must be > 1");
  FeedbackResult out;
  CapacityModel caps = initial;
  for (int attempt = 0;; ++attempt) {
    out.decisions = schedule_deft(profile, caps, options.horizon);
    auto& v = out.verdict;
    v.sequence = extract_batch_sequence(out.decisions);
    v.ratio = convergence_ratio(walk, v.sequence);
    v.passed = std::fabs(v.ratio - 1.0) <= options.epsilon;
    v.retries_used = attempt;
    v.final_capacity_multiplier = caps.capacity_multiplier;
    v.multipliers.push_back(caps.capacity_multiplier);
    v.ratios.push_back(v.ratio);
    if (v.passed || attempt == options.max_retries) return out;
    caps.capacity_multiplier *= options.step;
  }
}

namespace {

// Nelder-Mead on two variables.
template <class F>
std::array<double, 2> nelder_mead(F f, std::array<double, 2> x0, std::array<double, 2> step) {
  using P = std::array<double, 2>;
  std::array<P, 3> v = {x0, P{x0[0] + step[0], x0[1]}, P{x0[0], x0[1] + step[1]}};
  std::array<double, 3> fv = {f(v[0]), f(v[1]), f(v[2])};
  for (int it = 0; it < 4000; ++it) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const P best = v[idx[0]], mid = v[idx[1]], worst = v[idx[2]];
    const double fb = fv[idx[0]], fm = fv[idx[1]], fw = fv[idx[2]];
    if (std::fabs(fw - fb) <= 1e-20 && std::fabs(worst[0] - best[0]) + std::fabs(worst[1] - best[1]) < 1e-12) break;
    const P c = {(best[0] + mid[0]) / 2, (best[1] + mid[1]) / 2};
    auto along = [&](double t) { return P{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])}; };
    const P r = along(-1.0);
    const double fr = f(r);
    auto put = [&](const P& p, double val) {
      v[idx[2]] = p;
      fv[idx[2]] = val;
    };
    if (fr < fb) {
      const P e = along(-2.0);
      const double fe = f(e);
      if (fe < fr) put(e, fe); else put(r, fr);
    } else if (fr < fm) {
      put(r, fr);
    } else {
      const P k = fr < fw ? along(-0.5) : along(0.5);
      const double fk = f(k);
      if (fk < std::min(fr, fw)) {
        put(k, fk);
      } else {
        for (int i : {idx[1], idx[2]}) {
          v[i] = P{(v[i][0] + best[0]) / 2, (v[i][1] + best[1]) / 2};
          fv[i] = f(v[i]);
        }
      }
    }
  }
  int b = 0;
  for (int i = 1; i < 3; ++i) {
    if (fv[i] < fv[b]) b = i;
  }
  return v[b];
}

}  // namespace

WalkParams calibrate_walk(const WalkParams& start, const std::vector<WalkObservation>& observations) {
  if (observations.empty()) throw Error(ErrorCode::kArgument, "calibrate_walk: no observations");
  auto loss = [&](double mu, double sigma) {
    WalkParams p = start;
    p.mu_t = mu;
    p.sigma_t = sigma;
    double sse = 0.0;
    for (const auto& o : observations) {
      const auto t = sequence_trajectory(p.s0, p, o.sequence);
      if (t.size() != o.trajectory.size()) {
        throw Error(ErrorCode::kArgument, "calibrate_walk: trajectory length differs from its sequence");
      }
      for (std::size_t i = 0; i < t.size(); ++i) sse += (t[i] - o.trajectory[i]) * (t[i] - o.trajectory[i]);
    }
    return sse;
  };

  // Coarse grid, then simplex refinement over (mu, log sigma).
  double best_mu = start.mu_t, best_sigma = start.sigma_t, best = loss(best_mu, best_sigma);
  for (int i = 0; i <= 120; ++i) {
    for (int j = 1; j <= 100; ++j) {
      const double mu = 0.05 * i, sigma = 4.0 * j;
      const double l = loss(mu, sigma);
      if (l < best) {
        best = l;
        best_mu = mu;
        best_sigma = sigma;
      }
    }
  }
  const auto x = nelder_mead([&](const std::array<double, 2>& q) { return loss(q[0], std::exp(q[1])); },
                             {best_mu, std::log(best_sigma)}, {0.05, 0.05});
  WalkParams out = start;
  out.mu_t = x[0];
  out.sigma_t = std::exp(x[1]);
  return out;
}

json to_json(const ConvergenceVerdict& v) {
  return {{"ratio", v.ratio},
          {"passed", v.passed},
          {"retries_used", v.retries_used},
          {"final_capacity_multiplier", v.final_capacity_multiplier},
          {"multipliers", v.multipliers},
          {"ratios", v.ratios},
          {"batch_sequence", {{"k", v.sequence.k}, {"period", v.sequence.period}}}};
}

}  // namespace deft
