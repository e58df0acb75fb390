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

// Deterministic synthetic data: annotation corpora, rendered feature maps for
// identity and mirrored images, foreground masks, and the planted
// channel-permutation training task.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "geomatch/benchgen.hpp"
#include "geomatch/geoware.hpp"
#include "geomatch/matcher.hpp"
#include "geomatch/postprocessor.hpp"
#include "geomatch/train.hpp"

namespace geomatch {

/// The 17-keypoint quadruped layout (eyes, nose, neck, tail root, limbs)
/// with shoulder/knee/paw/hip subgroups and left/right flip pairs.
SubgroupSchema quadruped_schema(const std::string& category = "ap10k");

struct SyntheticCorpusConfig {
  std::vector<int> species_sizes{120, 80, 60, 40, 30, 20, 90, 60};
  int families = 3;
  ImageSize image{224, 224};
  double visibility = 0.8;
  double multi_instance = 0.05;
  std::uint64_t seed = 0;
};

/// Species are named s00, s01, ... and assigned to families f0, f1, ...
/// round-robin; image ids are "<species>_<index>".
AnnotationCorpus make_synthetic_corpus(const SyntheticCorpusConfig& cfg);

struct SyntheticFeatureConfig {
  GridSize grid{16, 16};
  int channels = 16;
  double part_sigma = 0.8;   // grid cells
  double background = 0.15;  // background noise amplitude
  double lr_similarity = 0.5;
  std::uint64_t seed = 0;
};

/// Unit part descriptors shared across the corpus; left/right partners share
/// a common component so they are similar but distinguishable.
std::vector<std::vector<double>> part_descriptors(const SubgroupSchema& schema,
                                                  const SyntheticFeatureConfig& cfg);

/// Features of an image with the given keypoints: a Gaussian blob of each
/// visible part's descriptor on top of per-image background noise. The
/// mirrored image is rendered from the flipped annotation (labels swapped)
/// over a mirrored background.
FeatureMap render_features(const KeypointSet& keypoints, const std::string& image_id,
                           const std::vector<std::vector<double>>& parts,
                           const SyntheticFeatureConfig& cfg, bool mirrored,
                           const std::vector<int>& flip_map);

/// Cells inside the bounding box (or all cells without one).
InstanceMask render_mask(const KeypointSet& keypoints, GridSize grid, bool mirrored);

/// Writes annotations.json (COCO), schemas/<category>.json, features/
/// (identity and hflip per image) and masks/ under `dir`.
void write_synthetic_dataset(const std::filesystem::path& dir, const AnnotationCorpus& corpus,
                             const SubgroupSchema& schema, const SyntheticFeatureConfig& cfg);

struct PermutationTaskConfig {
  int train_pairs = 32;
  int held_out_pairs = 8;
  int grid = 12;
  int channels = 16;
  int keypoints = 8;
  int max_shift = 2;
  int cell_pixels = 14;
  std::uint64_t seed = 0;
};

/// Source maps are random; each target is the source with a fixed involutive
/// channel permutation applied and a random spatial shift, so a refinement
/// that is symmetric under the permutation solves the task.
struct PermutationTask {
  std::vector<TrainPair> train;
  std::vector<TrainPair> held_out;
  std::vector<int> permutation;
  ImageSize image;
};

PermutationTask make_permutation_task(const PermutationTaskConfig& cfg);

/// Per-point PCK of the refined maps on the given pairs, threshold
/// alpha * max(image width, height).
double permutation_task_pck(const PostProcessor& net, const std::vector<TrainPair>& pairs,
                            ImageSize image, const InferenceConfig& inference, double alpha);

}  // namespace geomatch
