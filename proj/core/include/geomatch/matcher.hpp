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

// Similarity maps and the inference operators that turn them into a location:
// hard argmax, global soft argmax, window soft argmax and Gaussian-kernel soft
// argmax. Also exhaustive nearest-neighbour fields between two feature maps.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geomatch/tensor.hpp"

namespace geomatch {

struct SimilarityMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  GridSize grid() const { return {width, height}; }
};

enum class InferenceMode { argmax, soft, window, kernel };

InferenceMode parse_inference_mode(const std::string& name);
std::string to_string(InferenceMode mode);

struct InferenceConfig {
  InferenceMode mode = InferenceMode::window;
  int window_size = 15;
  double temperature = 0.04;
  double kernel_sigma = 5.0;
  SampleMode sampling = SampleMode::bilinear;

  /// Throws ArgumentError on an even or non-positive window, or a
  /// non-positive temperature or sigma.
  void validate() const;
  /// A one-cell window is hard argmax; returns the config with that folded in.
  InferenceConfig canonical() const;
};

/// values(y, x) = dot(query, target(y, x)); target must be normalized.
SimilarityMap similarity_map(std::span<const float> query, const FeatureMap& target);

/// Integer location of the maximum; ties go to the lowest row-major index.
GridPoint hard_argmax(const SimilarityMap& s);

/// Expectation of cell centers under softmax(values / temperature).
GridPoint soft_argmax(const SimilarityMap& s, double temperature);

/// Soft argmax restricted to the window_size x window_size block centered on
/// the hard argmax, clipped at the border without re-centering.
GridPoint window_soft_argmax(const SimilarityMap& s, int window_size,
                             double temperature);

/// Soft argmax after multiplying the map by a Gaussian of std `sigma`
/// centered on the hard argmax.
GridPoint kernel_soft_argmax(const SimilarityMap& s, double sigma,
                             double temperature);

GridPoint locate(const SimilarityMap& s, const InferenceConfig& cfg);

struct NnField {
  GridSize grid;                // of the source map
  std::vector<int> index;       // best target cell (row-major) per source cell
  std::vector<double> distance; // L2 distance to that target descriptor
};

/// For each source cell, the target cell of maximum cosine similarity (ties to
/// the lowest index) and the L2 distance between the two descriptors.
NnField nn_field(const FeatureMap& src, const FeatureMap& tgt);

/// (source cell, target cell) pairs that are each other's nearest neighbour,
/// ordered by source cell.
std::vector<std::pair<int, int>> mutual_nn_pairs(const FeatureMap& src,
                                                 const FeatureMap& tgt);

/// Matches each source keypoint into the target with the configured operator.
/// Keypoints are processed independently; output order follows input order.
std::vector<GridPoint> match_keypoints(const FeatureMap& src, const FeatureMap& tgt,
                                       std::span<const GridPoint> keypoints,
                                       const InferenceConfig& cfg,
                                       std::size_t threads = 1);

}  // namespace geomatch
