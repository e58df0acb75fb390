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
#include "geomatch/geoware.hpp"

#include <algorithm>
#include <set>

#include "geomatch/error.hpp"

namespace geomatch {

std::vector<int> KeypointSet::visible_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    if (points[i].visible) out.push_back(i);
  }
  return out;
}

void KeypointSet::validate() const {
  if (image.width <= 0 || image.height <= 0) {
    throw ArgumentError("keypoint set needs positive image dimensions");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.visible && (p.position.x < 0 || p.position.y < 0 ||
                      p.position.x >= image.width || p.position.y >= image.height)) {
      throw ArgumentError("visible keypoint " + std::to_string(i) +
                          " lies outside the image");
    }
  }
  // One pixel of slack: boxes use continuous extents while mirroring follows
  // the pixel-center convention x -> W - 1 - x.
  if (bbox && (bbox->w < 0 || bbox->h < 0 || bbox->x < -1 || bbox->y < -1 ||
               bbox->x + bbox->w > image.width || bbox->y + bbox->h > image.height)) {
    throw ArgumentError("bounding box lies outside the image");
  }
}

std::vector<int> mutual_visible(const KeypointSet& a, const KeypointSet& b) {
  std::vector<int> out;
  const int n = static_cast<int>(std::min(a.size(), b.size()));
  for (int i = 0; i < n; ++i) {
    if (a.points[i].visible && b.points[i].visible) out.push_back(i);
  }
  return out;
}

SubgroupSchema::SubgroupSchema(std::string category,
                               std::map<std::string, std::vector<int>> subgroups,
                               std::vector<int> flip_map)
    : category_(std::move(category)),
      subgroups_(std::move(subgroups)),
      flip_map_(std::move(flip_map)) {
  const int n = static_cast<int>(flip_map_.size());
  for (int i = 0; i < n; ++i) {
    const int j = flip_map_[i];
    if (j < 0 || j >= n || flip_map_[j] != i) {
      throw ArgumentError("schema '" + category_ + "': flip_map is not an involution at " +
                          std::to_string(i));
    }
  }
  group_of_.assign(static_cast<std::size_t>(n), -1);
  for (const auto& [name, members] : subgroups_) {
    if (members.size() < 2) {
      throw ArgumentError("schema '" + category_ + "': subgroup '" + name +
                          "' needs at least two keypoints");
    }
    const int g = static_cast<int>(group_names_.size());
    group_names_.push_back(name);
    for (int kp : members) {
      if (kp < 0 || kp >= n) {
        throw ArgumentError("schema '" + category_ + "': keypoint " + std::to_string(kp) +
                            " of subgroup '" + name + "' is out of range");
      }
      if (group_of_[kp] != -1) {
        throw ArgumentError("schema '" + category_ + "': keypoint " + std::to_string(kp) +
                            " belongs to two subgroups");
      }
      group_of_[kp] = g;
    }
  }
  for (const auto& [name, members] : subgroups_) {
    const std::set<int> own(members.begin(), members.end());
    for (int kp : members) {
      if (!own.contains(flip_map_[kp])) {
        throw ArgumentError("schema '" + category_ + "': flip_map moves keypoint " +
                            std::to_string(kp) + " out of subgroup '" + name + "'");
      }
    }
  }
}

const std::string* SubgroupSchema::subgroup_of(int kp) const {
  if (kp < 0 || kp >= static_cast<int>(group_of_.size()) || group_of_[kp] < 0) {
    return nullptr;
  }
  return &group_names_[group_of_[kp]];
}

const std::vector<int>* SubgroupSchema::members_of(int kp) const {
  const std::string* name = subgroup_of(kp);
  return name ? &subgroups_.at(*name) : nullptr;
}

int SubgroupSchema::flipped(int kp) const {
  if (kp < 0 || kp >= static_cast<int>(flip_map_.size())) return kp;
  return flip_map_[kp];
}

bool is_geometry_aware(const AnnotatedPair& pair, const SubgroupSchema& schema, int kp) {
  if (std::find(pair.mutual_visible.begin(), pair.mutual_visible.end(), kp) ==
      pair.mutual_visible.end()) {
    throw ArgumentError("keypoint " + std::to_string(kp) + " of pair '" + pair.id +
                        "' is not mutually visible");
  }
  const auto* members = schema.members_of(kp);
  if (!members) return false;
  return std::any_of(members->begin(), members->end(),
                     [&](int j) { return j != kp && pair.target.visible(j); });
}

double GeoSplit::keypoint_fraction() const {
  return total_keypoints == 0 ? 0.0
                              : static_cast<double>(geo_keypoints) / total_keypoints;
}

double GeoSplit::pair_fraction() const {
  return total_pairs == 0 ? 0.0 : static_cast<double>(geo_pairs) / total_pairs;
}

GeoSplit split_geo_standard(std::span<const AnnotatedPair> pairs,
                            const SchemaRegistry& schemas) {
  GeoSplit out;
  out.geo.reserve(pairs.size());
  for (const auto& pair : pairs) {
    auto it = schemas.find(pair.category);
    if (it == schemas.end()) {
      throw ArgumentError("no subgroup schema for category '" + pair.category + "'");
    }
    std::vector<bool> labels;
    labels.reserve(pair.mutual_visible.size());
    bool any = false;
    for (int kp : pair.mutual_visible) {
      const bool geo = is_geometry_aware(pair, it->second, kp);
      labels.push_back(geo);
      any = any || geo;
      out.geo_keypoints += geo ? 1 : 0;
    }
    out.total_keypoints += labels.size();
    out.geo_pairs += any ? 1 : 0;
    out.total_pairs += 1;
    out.geo.push_back(std::move(labels));
  }
  return out;
}

KeypointSet flip_keypoints(const KeypointSet& set, std::span<const int> flip_map) {
  KeypointSet out = set;
  const double w = set.image.width;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    const std::size_t src =
        i < flip_map.size() ? static_cast<std::size_t>(flip_map[i]) : i;
    out.points[i] = set.points[src];
    out.points[i].position.x = w - 1 - set.points[src].position.x;
  }
  if (set.bbox) out.bbox->x = w - 1 - (set.bbox->x + set.bbox->w);
  return out;
}

AnnotatedPair flip_pair(const AnnotatedPair& pair, const SubgroupSchema& schema) {
  AnnotatedPair out = pair;
  out.source = flip_keypoints(pair.source, schema.flip_map());
  out.target = flip_keypoints(pair.target, schema.flip_map());
  std::vector<int> mv;
  for (int kp : pair.mutual_visible) mv.push_back(schema.flipped(kp));
  std::sort(mv.begin(), mv.end());
  out.mutual_visible = std::move(mv);
  return out;
}

}  // namespace geomatch
