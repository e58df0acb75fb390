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

// On-disk formats exchanged between subcommands: pair manifests, predictions,
// alignment tables, and the per-image feature/mask store.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geomatch/benchgen.hpp"
#include "geomatch/json_io.hpp"
#include "geomatch/pose.hpp"
#include "geomatch/tensor.hpp"

namespace geomatch {

inline constexpr const char* kPairsFormat = "geomatch.pairs/1";
inline constexpr const char* kPredictionsFormat = "geomatch.predictions/1";
inline constexpr const char* kAlignmentFormat = "geomatch.alignment/1";
inline constexpr const char* kReportFormat = "geomatch.report/1";

struct ManifestPair {
  std::string id;
  std::string src_id;
  std::string tgt_id;
  std::string category;  // schema key
  std::string src_species;
  std::string tgt_species;
  std::vector<int> mutual_visible;
  std::optional<int> azimuth_difference;
  KeypointSet source;
  KeypointSet target;

  AnnotatedPair annotated() const;
};

struct PairManifest {
  std::string setting;
  std::uint64_t seed = 0;
  std::string config_hash;
  Json metadata = Json::object();
  std::vector<ManifestPair> pairs;
};

/// Pair id convention: "<src_id>__<tgt_id>".
std::string pair_id(const std::string& src_id, const std::string& tgt_id);

Json to_json(const PairManifest& m);
/// Validates structure, unique pair ids, and that mutual_visible_indices are
/// exactly the keypoints visible in both annotations.
PairManifest manifest_from_json(const JsonCursor& c);
PairManifest load_manifest(const std::filesystem::path& path);

/// Manifest for one setting of a benchmark split, with embedded annotations.
PairManifest manifest_from_records(const std::vector<PairRecord>& records,
                                   const AnnotationCorpus& corpus, const std::string& category,
                                   const std::string& setting);

struct PairPredictions {
  std::map<int, ImagePoint> points;  // keypoint index -> target image point
};

struct PairAlignment {
  VariantLabel chosen = VariantLabel::identity;
  std::vector<std::pair<VariantLabel, double>> scores;
};

struct Predictions {
  std::uint64_t seed = 0;
  std::string config_hash;
  Json config = Json::object();
  std::vector<std::string> order;  // manifest order
  std::map<std::string, PairPredictions> pairs;
  std::map<std::string, PairAlignment> alignment;  // empty without alignment
};

Json to_json(const Predictions& p);
Predictions predictions_from_json(const JsonCursor& c);
Predictions load_predictions(const std::filesystem::path& path);

struct AlignmentTable {
  std::uint64_t seed = 0;
  std::string config_hash;
  Json config = Json::object();
  std::vector<std::string> order;
  std::map<std::string, PairAlignment> pairs;
};

Json to_json(const AlignmentTable& t);
AlignmentTable alignment_from_json(const JsonCursor& c);
AlignmentTable load_alignment(const std::filesystem::path& path);

/// Feature maps at `<dir>/<image-id>__<variant>.npy` and optional masks at
/// `<masks>/<image-id>.npy`. Loaded maps are L2-normalized on read when the
/// file is not already unit-norm.
class FeatureStore {
 public:
  FeatureStore(std::filesystem::path features_dir, std::optional<std::filesystem::path> masks_dir);

  std::filesystem::path feature_path(const std::string& image_id, VariantLabel variant) const;
  bool has_features(const std::string& image_id, VariantLabel variant) const;
  FeatureMap raw_features(const std::string& image_id, VariantLabel variant) const;
  FeatureMap features(const std::string& image_id, VariantLabel variant) const;

  bool has_masks() const { return masks_dir_.has_value(); }
  /// The identity-frame mask, or an all-foreground mask of the given grid
  /// when no mask directory is configured.
  InstanceMask mask(const std::string& image_id, GridSize grid) const;
  /// The stored mask at its own resolution; throws when masks are not configured.
  InstanceMask stored_mask(const std::string& image_id) const;

 private:
  std::filesystem::path features_dir_;
  std::optional<std::filesystem::path> masks_dir_;
};

}  // namespace geomatch
