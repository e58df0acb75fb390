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
#pragma once

// Pose-variant pair augmentation, input Dropout, the weighted training
// objective, and the training loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomatch/losses.hpp"
#include "geomatch/postprocessor.hpp"

namespace geomatch {

struct AugmentWeights {
  double original = 1.0;
  double double_flip = 1.0;
  double single_flip = 1.0;
  double self_flip = 0.25;
};

struct TrainConfig {
  double learning_rate = 1.25e-3;
  double weight_decay = 1e-3;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  std::size_t total_steps = 1000;
  double dropout = 0.2;
  double perturb_std = 1.0;  // grid cells
  double temperature = 0.04;
  double contrastive_temperature = 0.07;
  bool augment = true;
  AugmentWeights weights;
  int bottleneck = 64;
  int blocks = 2;
  int kernel = 3;  // spatial extent of the middle bottleneck layer
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0 = only at the end

  void validate() const;
};

/// One annotated training pair of raw (pre-post-processor) features. Keypoint
/// lists are indexed by annotation index; nullopt marks an invisible keypoint.
/// The flipped maps are features extracted from the mirrored images.
struct TrainPair {
  std::string id;
  DenseMap source;
  DenseMap target;
  std::optional<DenseMap> source_flipped;
  std::optional<DenseMap> target_flipped;
  std::vector<std::optional<GridPoint>> source_keypoints;
  std::vector<std::optional<GridPoint>> target_keypoints;
  std::vector<int> flip_map;  // empty = identity
};

enum class MapRole { source, target, source_flipped, target_flipped };
enum class PairVariant { original, double_flip, single_flip, self_flip };

std::string to_string(PairVariant v);

struct AugmentedBatch {
  PairVariant variant = PairVariant::original;
  MapRole source = MapRole::source;
  MapRole target = MapRole::target;
  std::vector<int> labels;  // keypoint label of each correspondence
  std::vector<GridPoint> source_points;
  std::vector<GridPoint> target_points;
  double weight = 1.0;
};

/// The original pair followed by double-, single- and self-flip variants.
/// Mirrored positions use x -> W - 1 - x; the flipped image's keypoint with
/// label i sits at the mirror of the original keypoint flip_map[i].
/// With include_flips, throws InputError naming the pair when a flipped
/// feature map is missing.
std::vector<AugmentedBatch> augment_pair(const TrainPair& pair, const AugmentWeights& weights,
                                         bool include_flips = true);

/// Channel-wise Dropout: each channel is zeroed everywhere with probability
/// `rate`, survivors scale by 1 / (1 - rate). If every channel would drop, the
/// map is returned unchanged.
DenseMap apply_dropout(const DenseMap& f, double rate, CounterRng& rng);
std::vector<bool> dropout_mask(int channels, double rate, CounterRng& rng);

/// A fully specified loss evaluation: raw maps, and loss terms referring to
/// them by index.
struct ObjectiveTerm {
  int source = 0;
  int target = 1;
  std::vector<GridPoint> source_points;
  std::vector<GridPoint> target_points;
  std::vector<GridPoint> noise;
  double weight = 1.0;
};

struct Objective {
  std::vector<DenseMap> maps;
  std::vector<ObjectiveTerm> terms;
  double temperature = 0.04;
  double contrastive_temperature = 0.07;
};

/// Weighted sum over terms of (dense + sparse). When `net` gradients are
/// requested they are accumulated into net.grads() (callers zero them).
LossParts evaluate_objective(PostProcessor& net, const Objective& objective,
                             bool accumulate_grads);

/// Builds the objective for one step: Dropout on each raw map, augmentation,
/// and ground-truth noise, all drawn from `rng`.
Objective make_objective(const TrainPair& pair, const TrainConfig& cfg, CounterRng& rng);

struct TraceRow {
  std::size_t step = 0;
  double lr = 0.0;
  double sparse = 0.0;
  double dense = 0.0;
  double total = 0.0;
};

struct TrainResult {
  PostProcessor net;
  std::vector<TraceRow> trace;
};

using CheckpointHook = std::function<void(std::size_t step, const PostProcessor& net)>;

/// AdamW + one-cycle, one pair (with its augmentations) per step, pairs
/// visited in a seeded per-epoch order. Deterministic for a fixed seed.
/// Throws NumericalError naming the step and pair on a non-finite loss.
TrainResult train(std::span<const TrainPair> pairs, const TrainConfig& cfg,
                  std::optional<PostProcessor> initial = std::nullopt,
                  const CheckpointHook& on_checkpoint = {});

}  // namespace geomatch
