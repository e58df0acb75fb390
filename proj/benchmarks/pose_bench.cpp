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

#include "geomatch/pose.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {
namespace {

FeatureMap random_map(int side, int channels, std::uint64_t seed) {
  CounterRng rng(seed);
  FeatureMap f(side, side, channels);
  for (float& v : f.mutable_data()) v = static_cast<float>(rng.normal());
  return l2_normalize(f);
}

void BM_Imd(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const FeatureMap src = random_map(side, 128, 1);
  const FeatureMap tgt = random_map(side, 128, 2);
  const InstanceMask mask(side, side, true);
  for (auto _ : state) benchmark::DoNotOptimize(imd(src, tgt, mask));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Imd)->Arg(16)->Arg(32);

void BM_AdaptiveAlign(benchmark::State& state) {
  const FeatureMap src = random_map(24, 128, 3);
  const FeatureMap tgt = random_map(24, 128, 4);
  const InstanceMask mask(24, 24, true);
  std::vector<PoseVariant> variants;
  for (VariantLabel l : {VariantLabel::identity, VariantLabel::hflip, VariantLabel::rot90,
                         VariantLabel::rot180, VariantLabel::rot270}) {
    variants.push_back({l, transform_features(src, l), transform_mask(mask, l)});
  }
  AlignConfig cfg;
  cfg.metric = static_cast<AlignMetric>(state.range(0));
  state.SetLabel(to_string(cfg.metric));
  for (auto _ : state) benchmark::DoNotOptimize(adaptive_align(variants, tgt, cfg));
}
BENCHMARK(BM_AdaptiveAlign)->Arg(0)->Arg(1);

}  // namespace
}  // namespace geomatch
