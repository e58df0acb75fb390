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

// Instance Matching Distance, template-vote pose prediction, and test-time
// selection among viewpoint variants of a source image.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomatch/tensor.hpp"

namespace geomatch {

enum class Reduction { sum, mean };

/// Sum (or mean) over foreground source cells of the L2 distance between the
/// cell's descriptor and its cosine nearest neighbour in `tgt`.
/// Throws ArgumentError for an empty mask or mismatched dimensions.
double imd(const FeatureMap& src, const FeatureMap& tgt, const InstanceMask& mask,
           Reduction reduction = Reduction::sum);

/// Mean descriptor distance over mutual nearest-neighbour pairs; +infinity
/// when there are none.
double mutual_nn_distance(const FeatureMap& src, const FeatureMap& tgt);

enum class VariantLabel { identity, hflip, rot90, rot180, rot270 };

std::string to_string(VariantLabel label);
VariantLabel parse_variant(const std::string& name);
std::vector<VariantLabel> parse_variant_list(const std::string& csv);

/// Maps a point of the original grid into the variant's grid, and back.
GridPoint to_variant_frame(GridPoint p, VariantLabel label, GridSize original);
GridPoint from_variant_frame(GridPoint p, VariantLabel label, GridSize original);
InstanceMask transform_mask(const InstanceMask& m, VariantLabel label);
FeatureMap transform_features(const FeatureMap& f, VariantLabel label);

struct PoseVariant {
  VariantLabel label = VariantLabel::identity;
  FeatureMap features;  // extracted from the transformed image
  InstanceMask mask;    // transformed alongside
};

struct PoseTemplate {
  FeatureMap features;
  std::optional<InstanceMask> mask;
};

struct TemplateSet {
  std::string name;
  std::map<std::string, PoseTemplate> templates;  // pose label -> template

  /// Throws ArgumentError with fewer than two labels or mixed channel counts.
  void validate() const;
};

struct PosePrediction {
  std::string label;
  std::map<std::string, int> votes;
  std::map<std::string, double> total_imd;
  std::vector<std::string> set_choices;                 // per set
  std::vector<std::map<std::string, double>> set_scores; // per set, per label
};

/// Per set, the label minimizing the IMD sum from the query; the final label
/// is the plurality vote, ties broken by the smaller IMD total across sets,
/// then by label order.
PosePrediction predict_pose(const FeatureMap& query, const InstanceMask& query_mask,
                            std::span<const TemplateSet> sets);

enum class AlignMetric { imd, mutual_nn };

AlignMetric parse_align_metric(const std::string& name);
std::string to_string(AlignMetric metric);

struct AlignConfig {
  AlignMetric metric = AlignMetric::imd;
  Reduction reduction = Reduction::mean;
};

struct AlignmentResult {
  VariantLabel chosen = VariantLabel::identity;
  std::vector<std::pair<VariantLabel, double>> scores;  // in variant order
};

/// Scores every variant against the target and returns the minimum; ties keep
/// the earlier variant. The first variant must be the identity.
AlignmentResult adaptive_align(std::span<const PoseVariant> variants,
                               const FeatureMap& tgt, const AlignConfig& cfg = {},
                               std::size_t threads = 1);

}  // namespace geomatch
