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

#ifndef DEFT_PRESERVER_HPP_
#define DEFT_PRESERVER_HPP_

#include <cstdint>
#include <vector>

#include "deft/scheduler.hpp"

namespace deft {

/// Update pattern over one steady-state period: the i-th update applies
/// k[i] iterations' worth of gradients, and sum(k) == period.
struct BatchSequence {
  std::vector<int> k;
  int period = 1;

  bool operator==(const BatchSequence&) const = default;
};

/// Gaussian random walk of the loss state: ds ~ N(mu_t, sigma_t^2 / B).
struct WalkParams {
  double s0 = 0.0;
  double s_star = 0.0;
  double eta = 0.01;
  double mu_t = 0.0;
  double sigma_t = 1.0;
  std::int64_t batch = 1;
};

void validate(const WalkParams& p);

/// Folded-normal mean of the next state after one step with `batch` samples.
/// Throws Error(kArgument) when sigma_t == 0.
double expected_next_state(double s, const WalkParams& p, double batch);

/// The additive noise term (eta*sigma/sqrt(batch)) * sqrt(2/pi) * exp(-a^2/2).
double noise_term(double s, const WalkParams& p, double batch);

/// Expected state after each update of `seq` (batch k_i * B), from s_a.
std::vector<double> sequence_trajectory(double s_a, const WalkParams& p, const BatchSequence& seq);
double sequence_expected_state(double s_a, const WalkParams& p, const BatchSequence& seq);
/// Fixed-batch reference: `steps` updates with batch B.
double baseline_expected_state(double s_a, const WalkParams& p, int steps);

/// Baseline over DeFT expected state for one period starting at s0.
double convergence_ratio(const WalkParams& p, const BatchSequence& seq);

/// Smallest repeating update pattern that starts within the first 500
/// iterations and the first half of the run, and repeats at least twice.
/// Throws Error(kNonSteadyState).
BatchSequence extract_batch_sequence(const std::vector<ScheduleDecision>& decisions);

struct ConvergenceVerdict {
  double ratio = 1.0;
  bool passed = false;
  int retries_used = 0;
  double final_capacity_multiplier = 1.0;
  /// One entry per attempt.
  std::vector<double> multipliers;
  std::vector<double> ratios;
  BatchSequence sequence;
};

struct FeedbackOptions {
  double epsilon = 0.01;
  int max_retries = 10;
  double step = 1.1;
  /// Iterations scheduled per attempt; must leave room for two periods
  /// after the steady state is reached.
  int horizon = 800;
};

struct FeedbackResult {
  std::vector<ScheduleDecision> decisions;
  ConvergenceVerdict verdict;
};

/// Solve, extract the batch sequence, compare with the fixed-batch
/// reference; on failure enlarge the capacity multiplier and try again.
FeedbackResult feedback_loop(const ModelProfile& profile, const CapacityModel& initial, const WalkParams& walk,
                             const FeedbackOptions& options = {});

/// An observed expected-state trajectory under a known batch sequence.
struct WalkObservation {
  BatchSequence sequence;
  std::vector<double> trajectory;
};

/// Least-squares fit of mu_t and sigma_t to the observations; every other
/// field of `start` is kept.
WalkParams calibrate_walk(const WalkParams& start, const std::vector<WalkObservation>& observations);

nlohmann::json to_json(const ConvergenceVerdict& v);

}  // namespace deft

#endif  // DEFT_PRESERVER_HPP_
