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

#include "fixtures.hpp"

#include <cmath>

namespace fixture {

std::filesystem::path data_dir() { return DEFT_DATA_DIR; }

deft::ModelProfile vgg19() { return deft::load_profile(data_dir() / "profiles/vgg19.json"); }
deft::ModelProfile gpt2() { return deft::load_profile(data_dir() / "profiles/gpt2.json"); }
deft::ModelProfile resnet101() { return deft::load_profile(data_dir() / "profiles/resnet101.json"); }
deft::ClusterConfig dual_cluster() { return deft::load_cluster(data_dir() / "configs/cluster_dual.json"); }
deft::ClusterConfig single_cluster() { return deft::load_cluster(data_dir() / "configs/cluster_single.json"); }

std::vector<IterationTotals> iteration_totals() {
  const auto doc = deft::read_json_file(data_dir() / "fixtures/iteration_totals.json");
  std::vector<IterationTotals> out;
  for (const auto& m : doc.at("models")) {
    auto us = [&](const char* key) { return static_cast<deft::Micros>(std::llround(m.at(key).get<double>() * 1000.0)); };
    IterationTotals t;
    t.name = m.at("name").get<std::string>();
    t.profile.name = t.name;
    t.profile.buckets.push_back({1, 1, us("forward_ms"), us("backward_ms"), us("comm_ms")});
    t.published_cr = m.at("published_cr").get<double>();
    t.note = m.value("note", "");
    out.push_back(std::move(t));
  }
  return out;
}

deft::ClusterConfig cluster(std::vector<double> ratios, deft::Micros startup) {
  deft::ClusterConfig c;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    deft::LinkSpec l;
    l.name = "link" + std::to_string(i);
    l.speed_ratio_to_fast = ratios[i];
    l.startup_us = startup;
    c.links.push_back(l);
  }
  return c;
}

deft::ModelProfile random_profile(std::mt19937_64& rng, int max_buckets) {
  std::uniform_int_distribution<int> count(1, max_buckets);
  std::uniform_int_distribution<deft::Micros> time(1, 50'000);
  std::uniform_int_distribution<std::int64_t> params(1, 20'000'000);
  deft::ModelProfile p;
  p.name = "random";
  p.batch_size = 32;
  const int n = count(rng);
  for (int i = 1; i <= n; ++i) p.buckets.push_back({i, params(rng), time(rng), time(rng), time(rng)});
  return p;
}

deft::ModelProfile constant_profile(int n, deft::Micros fwd, deft::Micros bwd, deft::Micros comm) {
  deft::ModelProfile p;
  p.name = "constant";
  p.batch_size = 64;
  for (int i = 1; i <= n; ++i) p.buckets.push_back({i, 1'000'000, fwd, bwd, comm});
  return p;
}

const std::vector<double> kFixedBatchTrajectory = {0.2054, 0.1989, 0.1967, 0.1922};
const std::vector<double> kDelayedTrajectory = {0.2012, 0.1979, 0.1935};

}  // namespace fixture
