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

#ifndef DEFT_TESTS_FIXTURES_HPP_
#define DEFT_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "deft/profiles.hpp"

namespace fixture {

std::filesystem::path data_dir();

deft::ModelProfile vgg19();
deft::ModelProfile gpt2();
deft::ModelProfile resnet101();
deft::ClusterConfig dual_cluster();
deft::ClusterConfig single_cluster();

/// Whole-iteration times of a model as a one-bucket profile.
struct IterationTotals {
  std::string name;
  deft::ModelProfile profile;
  double published_cr = 0.0;
  std::string note;
};
std::vector<IterationTotals> iteration_totals();

/// One link with the given ratio (1.0) and startup, or a fast plus slow pair.
deft::ClusterConfig cluster(std::vector<double> ratios, deft::Micros startup = 0);

/// Random valid profile with 1..max_buckets buckets.
deft::ModelProfile random_profile(std::mt19937_64& rng, int max_buckets);

/// n identical buckets.
deft::ModelProfile constant_profile(int n, deft::Micros fwd, deft::Micros bwd, deft::Micros comm);

/// Expected-state observations used to fit the walk: the per-iteration
/// trajectory and the one under updates {2, 1, 1}.
extern const std::vector<double> kFixedBatchTrajectory;
extern const std::vector<double> kDelayedTrajectory;
inline constexpr double kInitialState = 0.2103;

}  // namespace fixture

#endif  // DEFT_TESTS_FIXTURES_HPP_
