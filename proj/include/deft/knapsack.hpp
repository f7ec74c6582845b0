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

#ifndef DEFT_KNAPSACK_HPP_
#define DEFT_KNAPSACK_HPP_

#include <span>
#include <vector>

#include "deft/profiles.hpp"

namespace deft {

/// A bucket communication offered to a knapsack. Weight and profit are both
/// the communication time.
struct Item {
  int bucket_id = 0;
  Micros weight = 0;
};

struct KnapsackAssignment {
  /// Selected bucket ids per knapsack, indexed like the input capacities.
  std::vector<std::vector<int>> knapsacks;
  Micros total_value = 0;
  std::vector<int> leftovers;

  std::vector<int> selected() const;
};

/// Capacities above this switch the exact DP to value scaling at 0.1%
/// resolution.
inline constexpr Micros kExactCapacityLimit = 10'000'000;

/// Exact 0/1 knapsack with weight == value. Among optimal subsets the one
/// that favours items listed earlier is returned.
KnapsackAssignment naive_knapsack(std::span<const Item> items, Micros capacity);

/// Recursive variant over buckets listed in backward generation order
/// (first produced first). Each level either solves the whole remaining
/// list or drops its head, losing the next head's backward time from every
/// capacity (scaled by that knapsack's link ratio). Ties go to the deeper
/// level. Single-capacity calls
/// use naive_knapsack at every level; multi-capacity calls use the greedy
/// multi-knapsack.
KnapsackAssignment recursive_knapsack(std::span<const Item> generation_order, std::span<const Micros> backward_times,
                                      std::span<const Micros> capacities, std::span<const double> link_scales);

inline KnapsackAssignment recursive_knapsack(std::span<const Item> generation_order,
                                             std::span<const Micros> backward_times, Micros remain_time) {
  const Micros caps[] = {remain_time};
  const double scales[] = {1.0};
  return recursive_knapsack(generation_order, backward_times, caps, scales);
}

/// Smallest knapsack first, longest item first (input order among equal
/// weights). O(N*M) after sorting.
KnapsackAssignment greedy_multi_knapsack(std::span<const Item> items, std::span<const Micros> capacities);

inline constexpr std::size_t kBruteForceItemLimit = 20;

/// Exact multi-knapsack optimum by enumeration; rejects more than
/// kBruteForceItemLimit items.
KnapsackAssignment brute_force_multi_knapsack(std::span<const Item> items, std::span<const Micros> capacities);

/// Capacity, exclusivity and value-consistency check.
bool is_feasible(const KnapsackAssignment& a, std::span<const Item> items, std::span<const Micros> capacities);

}  // namespace deft

#endif  // DEFT_KNAPSACK_HPP_
