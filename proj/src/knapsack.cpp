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

#include "deft/knapsack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>

#include "deft/error.hpp"

namespace deft {

namespace {

class BitRow {
 public:
  explicit BitRow(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  // *this = src | (src << shift), truncated to nbits.
  void assign_or_shifted(const BitRow& src, std::size_t shift) {
    const std::size_t word_shift = shift >> 6;
    const unsigned bit_shift = static_cast<unsigned>(shift & 63);
    for (std::size_t i = words_.size(); i-- > 0;) {
      std::uint64_t shifted = 0;
      if (i >= word_shift) {
        shifted = src.words_[i - word_shift] << bit_shift;
        if (bit_shift != 0 && i > word_shift) shifted |= src.words_[i - word_shift - 1] >> (64 - bit_shift);
      }
      words_[i] = src.words_[i] | shifted;
    }
    const std::size_t tail = nbits_ & 63;
    if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
  }

  std::size_t highest() const {
    for (std::size_t i = words_.size(); i-- > 0;) {
      if (words_[i] != 0) return i * 64 + 63 - static_cast<std::size_t>(std::countl_zero(words_[i]));
    }
    return 0;
  }

 private:
  std::size_t nbits_;
  std::vector<std::uint64_t> words_;
};

void check_items(std::span<const Item> items) {
  for (const auto& it : items) {
    if (it.weight <= 0) {
      throw ValidationError("non_positive_weight",
                            "knapsack item for bucket " + std::to_string(it.bucket_id) + " has weight <= 0");
    }
  }
}

KnapsackAssignment empty_assignment(std::span<const Item> items, std::size_t n_knapsacks) {
  KnapsackAssignment a;
  a.knapsacks.resize(n_knapsacks);
  for (const auto& it : items) a.leftovers.push_back(it.bucket_id);
  return a;
}

// Rebuilds leftovers (in input order) and the total from the knapsack lists.
void finalize(KnapsackAssignment& a, std::span<const Item> items) {
  std::unordered_set<int> chosen;
  for (const auto& k : a.knapsacks) chosen.insert(k.begin(), k.end());
  a.leftovers.clear();
  a.total_value = 0;
  for (const auto& it : items) {
    if (chosen.count(it.bucket_id)) {
      a.total_value += it.weight;
    } else {
      a.leftovers.push_back(it.bucket_id);
    }
  }
}

}  // namespace

std::vector<int> KnapsackAssignment::selected() const {
  std::vector<int> out;
  for (const auto& k : knapsacks) out.insert(out.end(), k.begin(), k.end());
  return out;
}

KnapsackAssignment naive_knapsack(std::span<const Item> items, Micros capacity) {
  check_items(items);
  KnapsackAssignment result = empty_assignment(items, 1);
  if (items.empty() || capacity <= 0) return result;

  const std::vector<Item> sorted(items.begin(), items.end());

  const Micros total = std::accumulate(sorted.begin(), sorted.end(), Micros{0},
                                       [](Micros s, const Item& it) { return s + it.weight; });
  if (total <= capacity) {
    for (const auto& it : sorted) result.knapsacks[0].push_back(it.bucket_id);
    finalize(result, items);
    return result;
  }

  // Scaling rounds weights up and the capacity down so the pick stays feasible.
  Micros scale = 1;
  if (capacity > kExactCapacityLimit) scale = (capacity + 999) / 1000;
  const auto cap = static_cast<std::size_t>(capacity / scale);
  std::vector<std::size_t> w(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    w[i] = static_cast<std::size_t>((sorted[i].weight + scale - 1) / scale);
  }

  // reach[i] holds the sums attainable with items i..n-1.
  const std::size_t n = sorted.size();
  std::vector<BitRow> reach(n + 1, BitRow(cap + 1));
  reach[n].set(0);
  for (std::size_t i = n; i-- > 0;) {
    if (w[i] <= cap) {
      reach[i].assign_or_shifted(reach[i + 1], w[i]);
    } else {
      reach[i] = reach[i + 1];
    }
  }

  std::size_t target = reach[0].highest();
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] <= target && reach[i + 1].test(target - w[i])) {
      result.knapsacks[0].push_back(sorted[i].bucket_id);
      target -= w[i];
    }
  }
  finalize(result, items);
  return result;
}

KnapsackAssignment greedy_multi_knapsack(std::span<const Item> items, std::span<const Micros> capacities) {
  check_items(items);
  KnapsackAssignment result = empty_assignment(items, capacities.size());
  if (capacities.empty()) return result;

  std::vector<std::size_t> sack_order(capacities.size());
  std::iota(sack_order.begin(), sack_order.end(), std::size_t{0});
  std::stable_sort(sack_order.begin(), sack_order.end(),
                   [&](std::size_t a, std::size_t b) { return capacities[a] < capacities[b]; });

  std::vector<std::size_t> item_order(items.size());
  std::iota(item_order.begin(), item_order.end(), std::size_t{0});
  std::stable_sort(item_order.begin(), item_order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].weight > items[b].weight;
  });

  std::vector<bool> placed(items.size(), false);
  for (std::size_t s : sack_order) {
    Micros remaining = std::max<Micros>(capacities[s], 0);
    for (std::size_t i : item_order) {
      if (placed[i] || items[i].weight > remaining) continue;
      placed[i] = true;
      remaining -= items[i].weight;
      result.knapsacks[s].push_back(items[i].bucket_id);
    }
  }
  finalize(result, items);
  return result;
}

KnapsackAssignment recursive_knapsack(std::span<const Item> generation_order, std::span<const Micros> backward_times,
                                      std::span<const Micros> capacities, std::span<const double> link_scales) {
  check_items(generation_order);
  if (backward_times.size() != generation_order.size()) {
    throw Error(ErrorCode::kArgument, "recursive_knapsack: backward_times must align with the item list");
  }
  if (link_scales.size() != capacities.size() || capacities.empty()) {
    throw Error(ErrorCode::kArgument, "recursive_knapsack: one link scale per capacity is required");
  }
  const std::size_t n = generation_order.size();
  KnapsackAssignment best = empty_assignment(generation_order, capacities.size());
  if (n == 0) return best;

  auto solve = [&](std::span<const Item> sub, const std::vector<Micros>& caps) {
    if (caps.size() == 1) return naive_knapsack(sub, caps[0]);
    return greedy_multi_knapsack(sub, caps);
  };

  // Level d solves the list with its first d entries dropped.
  std::vector<KnapsackAssignment> levels;
  levels.reserve(n);
  std::vector<Micros> caps(capacities.begin(), capacities.end());
  for (auto& c : caps) c = std::max<Micros>(c, 0);
  for (std::size_t d = 0; d < n; ++d) {
    if (d > 0) {
      for (std::size_t l = 0; l < caps.size(); ++l) {
        const auto lost = static_cast<Micros>(std::llround(static_cast<double>(backward_times[d]) / link_scales[l]));
        caps[l] = std::max<Micros>(caps[l] - lost, 0);
      }
    }
    levels.push_back(solve(generation_order.subspan(d), caps));
  }
  // Unwind: a level wins only when strictly better than everything deeper.
  for (std::size_t d = n; d-- > 0;) {
    if (levels[d].total_value > best.total_value) best = std::move(levels[d]);
  }
  finalize(best, generation_order);
  return best;
}

KnapsackAssignment brute_force_multi_knapsack(std::span<const Item> items, std::span<const Micros> capacities) {
  check_items(items);
  if (items.size() > kBruteForceItemLimit) {
    throw Error(ErrorCode::kArgument, "brute_force_multi_knapsack: at most " +
                                          std::to_string(kBruteForceItemLimit) + " items are supported");
  }
  const std::size_t m = capacities.size();
  std::vector<Micros> remaining(capacities.begin(), capacities.end());
  std::vector<int> choice(items.size(), -1), best_choice(items.size(), -1);
  Micros best_value = -1;
  std::vector<Micros> suffix(items.size() + 1, 0);
  for (std::size_t i = items.size(); i-- > 0;) suffix[i] = suffix[i + 1] + items[i].weight;

  auto dfs = [&](auto&& self, std::size_t i, Micros value) -> void {
    if (value + suffix[i] <= best_value) return;
    if (i == items.size()) {
      best_value = value;
      best_choice = choice;
      return;
    }
    for (std::size_t s = 0; s < m; ++s) {
      if (items[i].weight > remaining[s]) continue;
      remaining[s] -= items[i].weight;
      choice[i] = static_cast<int>(s);
      self(self, i + 1, value + items[i].weight);
      remaining[s] += items[i].weight;
    }
    choice[i] = -1;
    self(self, i + 1, value);
  };
  dfs(dfs, 0, 0);

  KnapsackAssignment result;
  result.knapsacks.resize(m);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (best_choice[i] >= 0) result.knapsacks[static_cast<std::size_t>(best_choice[i])].push_back(items[i].bucket_id);
  }
  finalize(result, items);
  return result;
}

bool is_feasible(const KnapsackAssignment& a, std::span<const Item> items, std::span<const Micros> capacities) {
  if (a.knapsacks.size() != capacities.size()) return false;
  std::unordered_set<int> seen;
  Micros value = 0;
  for (std::size_t s = 0; s < a.knapsacks.size(); ++s) {
    Micros load = 0;
    for (int id : a.knapsacks[s]) {
      if (!seen.insert(id).second) return false;
      auto it = std::find_if(items.begin(), items.end(), [id](const Item& x) { return x.bucket_id == id; });
      if (it == items.end()) return false;
      load += it->weight;
    }
    if (load > std::max<Micros>(capacities[s], 0)) return false;
    value += load;
  }
  for (int id : a.leftovers) {
    if (!seen.insert(id).second) return false;
  }
  return seen.size() == items.size() && value == a.total_value;
}

}  // namespace deft
