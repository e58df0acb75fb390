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

// Keypoint subgroup schemas and the geometry-aware correspondence predicate.
//
// A mutually visible keypoint is geometry-aware when it belongs to a subgroup
// (paws, ears, wheels, ...) and at least one other member of that subgroup is
// visible in the target image, so that appearance alone cannot tell the
// candidates apart.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomatch/tensor.hpp"

namespace geomatch {

struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool contains(ImagePoint p) const {
    return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
  }
};

struct Keypoint {
  ImagePoint position;
  bool visible = false;
};

struct KeypointSet {
  std::vector<Keypoint> points;
  std::optional<BoundingBox> bbox;
  ImageSize image;

  std::size_t size() const { return points.size(); }
  bool visible(int i) const {
    return i >= 0 && i < static_cast<int>(points.size()) && points[i].visible;
  }
  std::vector<int> visible_indices() const;
  /// Throws ArgumentError when a visible keypoint or the bbox leaves the image.
  void validate() const;
};

/// Indices visible in both sets, ascending.
std::vector<int> mutual_visible(const KeypointSet& a, const KeypointSet& b);

class SubgroupSchema {
 public:
  SubgroupSchema() = default;
  /// Validates: disjoint subgroups of at least two members, flip_map an
  /// involution that maps every subgroup onto itself. Throws ArgumentError.
  SubgroupSchema(std::string category, std::map<std::string, std::vector<int>> subgroups,
                 std::vector<int> flip_map);

  const std::string& category() const { return category_; }
  const std::map<std::string, std::vector<int>>& subgroups() const { return subgroups_; }
  const std::vector<int>& flip_map() const { return flip_map_; }
  std::size_t keypoint_count() const { return flip_map_.size(); }

  /// Subgroup name of keypoint `kp`, if any.
  const std::string* subgroup_of(int kp) const;
  const std::vector<int>* members_of(int kp) const;
  int flipped(int kp) const;

 private:
  std::string category_;
  std::map<std::string, std::vector<int>> subgroups_;
  std::vector<int> flip_map_;
  std::vector<std::string> group_names_;
  std::vector<int> group_of_;  // keypoint -> index into group_names_, or -1
};

struct AnnotatedPair {
  std::string id;
  std::string category;
  KeypointSet source;
  KeypointSet target;
  std::vector<int> mutual_visible;
  std::optional<int> azimuth_difference;  // 0 (same pose) .. 4 (opposite)
};

/// Throws ArgumentError when kp is not in pair.mutual_visible.
bool is_geometry_aware(const AnnotatedPair& pair, const SubgroupSchema& schema, int kp);

struct GeoSplit {
  std::vector<std::vector<bool>> geo;  // per pair, aligned with mutual_visible
  std::size_t geo_keypoints = 0;
  std::size_t total_keypoints = 0;
  std::size_t geo_pairs = 0;
  std::size_t total_pairs = 0;

  double keypoint_fraction() const;
  double pair_fraction() const;
};

using SchemaRegistry = std::map<std::string, SubgroupSchema>;

/// Labels every mutually visible keypoint. Throws ArgumentError when a pair's
/// category has no schema.
GeoSplit split_geo_standard(std::span<const AnnotatedPair> pairs,
                            const SchemaRegistry& schemas);

/// Mirrors both annotation sets horizontally and relabels keypoints through
/// the schema's flip map.
AnnotatedPair flip_pair(const AnnotatedPair& pair, const SubgroupSchema& schema);
KeypointSet flip_keypoints(const KeypointSet& set, std::span<const int> flip_map);

}  // namespace geomatch
