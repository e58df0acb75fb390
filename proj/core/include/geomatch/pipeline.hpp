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

// Run configuration and the file-level pipelines behind each subcommand.
// Every pipeline is deterministic; per-pair work may run on several threads
// and results are assembled in manifest order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geomatch/benchgen.hpp"
#include "geomatch/json_io.hpp"
#include "geomatch/manifest.hpp"
#include "geomatch/matcher.hpp"
#include "geomatch/metrics.hpp"
#include "geomatch/pose.hpp"
#include "geomatch/postprocessor.hpp"
#include "geomatch/train.hpp"

namespace geomatch {

struct EvalConfig {
  std::vector<double> alphas{0.01, 0.05, 0.10};
  PckReference reference = PckReference::bbox;
  bool geo_split = true;
  double breakdown_alpha = 0.10;

  void validate() const;
};

struct AlignmentSettings {
  std::vector<VariantLabel> variants{VariantLabel::identity};
  AlignConfig config;
};

struct BenchmarkSettings {
  BenchmarkConfig config;
  std::string category = "ap10k";
};

/// Parsed config file. Relative paths resolve against the file's directory.
/// Paths never enter the config hash; only the seed and algorithmic settings
/// do, so moving data around does not change the hash.
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> dataset_root;  // COCO annotation file
  std::optional<std::filesystem::path> features_dir;
  std::optional<std::filesystem::path> masks_dir;
  std::optional<std::filesystem::path> schema_dir;
  std::optional<std::filesystem::path> output_dir;
  InferenceConfig inference;
  AlignmentSettings alignment;
  EvalConfig evaluation;
  BenchmarkSettings benchmark;
  TrainConfig train;

  /// Algorithmic settings as JSON (no paths).
  Json settings_json() const;
  std::string hash() const { return config_hash(settings_json()); }
  /// Throws InputError naming any configured path that does not exist.
  void check_paths() const;
};

RunConfig run_config_from_json(const JsonCursor& c, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

Json to_json(const InferenceConfig& cfg);
Json to_json(const TrainConfig& cfg);
Json to_json(const EvalConfig& cfg);
Json to_json(const BenchmarkConfig& cfg);

/// Maps source keypoint `index` into the frame of variant `label`. For hflip
/// with a flip map the query is the mirror of the flipped partner when that
/// partner is visible, so the query carries the same semantic label.
GridPoint variant_query(const KeypointSet& source, int index, VariantLabel label,
                        GridSize identity_grid, const std::vector<int>* flip_map);

struct MatchContext {
  const FeatureStore* store = nullptr;
  const SchemaRegistry* schemas = nullptr;  // optional
  const PostProcessor* net = nullptr;       // optional refinement
  std::size_t threads = 0;                  // 0 = thread_limit()
};

FeatureMap load_matching_features(const MatchContext& ctx, const std::string& image_id,
                                  VariantLabel variant);

AlignmentTable run_align(const PairManifest& manifest, const MatchContext& ctx,
                         const AlignmentSettings& settings);

/// Predicts target locations of every mutually visible keypoint. With an
/// alignment table, each pair's source is read from its chosen variant.
Predictions run_match(const PairManifest& manifest, const MatchContext& ctx,
                      const InferenceConfig& inference, const AlignmentTable* alignment);

struct BenchmarkOutput {
  std::map<std::string, PairManifest> settings;  // setting name -> manifest
  Json stats;
};

BenchmarkOutput run_build_benchmark(const AnnotationCorpus& corpus,
                                    const BenchmarkSettings& settings,
                                    const std::string& config_hash);

/// Training pairs from a manifest: identity features, and hflip features when
/// augmentation is on; keypoints converted to grid coordinates.
std::vector<TrainPair> load_train_pairs(const PairManifest& manifest, const FeatureStore& store,
                                        const SchemaRegistry* schemas, bool with_flips);

struct PoseTemplateManifest {
  std::vector<TemplateSet> sets;
};

/// `<dir>/templates.json`: {"sets": [{"name", "templates": {label:
/// {"features": file, "mask": file?}}}]} with files relative to `dir`.
PoseTemplateManifest load_pose_templates(const std::filesystem::path& dir);

}  // namespace geomatch
