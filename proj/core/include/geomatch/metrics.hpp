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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomatch/geoware.hpp"
#include "geomatch/tensor.hpp"

namespace geomatch {

enum class PckReference { bbox, image };

PckReference parse_pck_reference(const std::string& name);
std::string to_string(PckReference ref);

struct PckConfig {
  double alpha = 0.10;
  PckReference reference = PckReference::bbox;
};

struct PckResult {
  std::vector<bool> correct;
  std::vector<double> distance;
  double threshold = 0.0;
  double score = 0.0;  // fraction correct; 0 for an empty result
};

/// Correctness threshold alpha * max(h, w) of the bbox or the image.
/// Throws ArgumentError when the reference is bbox and the set has none.
double pck_threshold(const KeypointSet& gts, const PckConfig& cfg);

/// preds[i] is the prediction for keypoint indices[i] of `gts`. A prediction
/// is correct when its pixel distance is <= the threshold.
PckResult pck(std::span<const ImagePoint> preds, const KeypointSet& gts,
              std::span<const int> indices, const PckConfig& cfg);

enum class Grouping { per_point, per_image };

/// per_point: global fraction of correct keypoints. per_image: mean of the
/// per-image fractions over images with at least one keypoint.
/// Throws ArgumentError when there is no keypoint at all.
double aggregate(std::span<const PckResult> results, Grouping grouping);

/// (max - min) / max over the azimuth bins present in `scores`.
/// Throws ArgumentError("undefined sensitivity") when every score is zero or
/// the map is empty.
double azimuth_sensitivity(const std::map<int, double>& scores);

enum class Outcome { correct, jitter, miss, swap };

std::string to_string(Outcome outcome);

struct KeypointOutcome {
  Outcome outcome = Outcome::correct;
  bool swap_lr = false;
};

struct BreakdownCounts {
  std::size_t correct = 0;
  std::size_t jitter = 0;
  std::size_t miss = 0;
  std::size_t swap = 0;
  std::size_t swap_lr = 0;

  std::size_t total() const { return correct + jitter + miss + swap; }
  void add(const KeypointOutcome& o);
  BreakdownCounts& operator+=(const BreakdownCounts& other);
};

struct BreakdownFractions {
  double correct = 0.0;
  double jitter = 0.0;
  double miss = 0.0;
  double swap = 0.0;
  double swap_lr = 0.0;
};

BreakdownFractions fractions(const BreakdownCounts& counts);

/// Foreground evidence for the target image: an instance mask at feature
/// resolution, else the ground-truth bounding box.
struct Foreground {
  const InstanceMask* mask = nullptr;
  std::optional<BoundingBox> bbox;

  bool contains(ImagePoint p, ImageSize image) const;
};

/// Classifies each prediction: correct within the PCK radius; miss when
/// outside the foreground; swap when the nearest visible annotated keypoint is
/// a different one (swap_lr when that keypoint shares the ground truth's
/// subgroup); jitter otherwise. Throws ArgumentError without foreground
/// evidence.
std::vector<KeypointOutcome> breakdown(std::span<const ImagePoint> preds,
                                       const KeypointSet& gts,
                                       std::span<const int> indices,
                                       const SubgroupSchema& schema,
                                       const Foreground& fg, const PckConfig& cfg);

}  // namespace geomatch
