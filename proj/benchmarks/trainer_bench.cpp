/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <benchmark/benchmark.h>

#include "geomatch/losses.hpp"
#include "geomatch/postprocessor.hpp"
#include "geomatch/synthetic.hpp"
#include "geomatch/train.hpp"

namespace geomatch {
namespace {

DenseMap random_dense(int side, int channels, CounterRng& rng) {
  DenseMap d(side, side, channels);
  for (double& v : d.values) v = rng.normal();
  return d;
}

void BM_ForwardBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int kernel = static_cast<int>(state.range(1));
  CounterRng rng(1);
  PostProcessor net = PostProcessor::bottleneck_stack(64, 32, 2, kernel);
  net.initialize(rng, false);
  Objective obj;
  obj.maps = {random_dense(side, 64, rng), random_dense(side, 64, rng)};
  ObjectiveTerm term;
  for (int i = 0; i < 8; ++i) {
    term.source_points.push_back({rng.uniform() * (side - 1), rng.uniform() * (side - 1)});
    term.target_points.push_back({rng.uniform() * (side - 1), rng.uniform() * (side - 1)});
  }
  obj.terms.push_back(term);
  for (auto _ : state) {
    net.zero_grad();
    benchmark::DoNotOptimize(evaluate_objective(net, obj, true));
  }
}
BENCHMARK(BM_ForwardBackward)->Args({16, 1})->Args({16, 3})->Args({32, 3});

void BM_TrainPlantedTask(benchmark::State& state) {
  const PermutationTask task = make_permutation_task({});
  TrainConfig cfg;
  cfg.total_steps = static_cast<std::size_t>(state.range(0));
  cfg.augment = false;
  cfg.dropout = 0.0;
  cfg.perturb_std = 0.0;
  cfg.bottleneck = 32;
  cfg.kernel = 1;
  cfg.learning_rate = 5e-3;
  for (auto _ : state) benchmark::DoNotOptimize(train(task.train, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainPlantedTask)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace geomatch
