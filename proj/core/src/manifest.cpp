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
#include "geomatch/manifest.hpp"

#include <set>

#include "geomatch/error.hpp"
#include "geomatch/npy.hpp"

namespace geomatch {

namespace {

void check_format(const JsonCursor& c, const char* expected) {
  const std::string got = c.at("format").as_string();
  if (got != expected) {
    c.at("format").fail("expected format \"" + std::string(expected) + "\", found \"" + got + "\"");
  }
}

Json alignment_json(const PairAlignment& a) {
  Json scores = Json::array();
  for (const auto& [label, score] : a.scores) {
    scores.push_back({{"variant", to_string(label)}, {"score", score}});
  }
  return {{"chosen", to_string(a.chosen)}, {"scores", std::move(scores)}};
}

VariantLabel variant_from(const JsonCursor& c) {
  try {
    return parse_variant(c.as_string());
  } catch (const ArgumentError& e) {
    c.fail(e.what());
  }
}

PairAlignment alignment_from(const JsonCursor& c) {
  PairAlignment a;
  a.chosen = variant_from(c.at("chosen"));
  const auto scores = c.at("scores");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    a.scores.emplace_back(variant_from(scores.at(i).at("variant")),
                          scores.at(i).at("score").as_number());
  }
  return a;
}

std::map<std::string, PairAlignment> alignment_map_from(const JsonCursor& c) {
  std::map<std::string, PairAlignment> out;
  for (const auto& [id, value] : c.object()) out[id] = alignment_from(c.at(id));
  return out;
}

Json alignment_map_json(const std::map<std::string, PairAlignment>& m) {
  Json j = Json::object();
  for (const auto& [id, a] : m) j[id] = alignment_json(a);
  return j;
}

}  // namespace

AnnotatedPair ManifestPair::annotated() const {
  return {id, category, source, target, mutual_visible, azimuth_difference};
}

std::string pair_id(const std::string& src_id, const std::string& tgt_id) {
  return src_id + "__" + tgt_id;
}

Json to_json(const PairManifest& m) {
  Json pairs = Json::array();
  for (const auto& p : m.pairs) {
    Json j = {{"id", p.id},
              {"src_id", p.src_id},
              {"tgt_id", p.tgt_id},
              {"category", p.category},
              {"src_species", p.src_species},
              {"tgt_species", p.tgt_species},
              {"mutual_visible_indices", p.mutual_visible},
              {"source", to_json(p.source)},
              {"target", to_json(p.target)}};
    if (p.azimuth_difference) j["azimuth_difference"] = *p.azimuth_difference;
    pairs.push_back(std::move(j));
  }
  return {{"format", kPairsFormat},
          {"setting", m.setting},
          {"seed", m.seed},
          {"config_hash", m.config_hash},
          {"metadata", m.metadata},
          {"pairs", std::move(pairs)}};
}

PairManifest manifest_from_json(const JsonCursor& c) {
  check_format(c, kPairsFormat);
  PairManifest m;
  if (auto s = c.find("setting")) m.setting = s->as_string();
  if (auto s = c.find("seed")) m.seed = s->as_uint();
  if (auto s = c.find("config_hash")) m.config_hash = s->as_string();
  if (auto s = c.find("metadata")) m.metadata = s->value();
  const auto pairs = c.at("pairs");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto pc = pairs.at(i);
    ManifestPair p;
    p.src_id = pc.at("src_id").as_string();
    p.tgt_id = pc.at("tgt_id").as_string();
    p.id = pc.find("id") ? pc.at("id").as_string() : pair_id(p.src_id, p.tgt_id);
    if (!seen.insert(p.id).second) pc.at("id").fail("duplicate pair id " + p.id);
    p.category = pc.at("category").as_string();
    if (auto s = pc.find("src_species")) p.src_species = s->as_string();
    if (auto s = pc.find("tgt_species")) p.tgt_species = s->as_string();
    if (auto a = pc.find("azimuth_difference")) {
      const auto v = a->as_int();
      if (v < 0) a->fail("azimuth difference must be non-negative");
      p.azimuth_difference = static_cast<int>(v);
    }
    p.source = keypoint_set_from_json(pc.at("source"));
    p.target = keypoint_set_from_json(pc.at("target"));
    if (p.source.size() != p.target.size()) {
      pc.at("target").at("keypoints").fail("keypoint count differs from the source");
    }
    p.mutual_visible = pc.at("mutual_visible_indices").as_int_list();
    if (p.mutual_visible != mutual_visible(p.source, p.target)) {
      pc.at("mutual_visible_indices")
          .fail("does not list exactly the keypoints visible in both images");
    }
    m.pairs.push_back(std::move(p));
  }
  return m;
}

PairManifest load_manifest(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  return manifest_from_json(JsonCursor(j, path.string()));
}

PairManifest manifest_from_records(const std::vector<PairRecord>& records,
                                   const AnnotationCorpus& corpus, const std::string& category,
                                   const std::string& setting) {
  const auto index = corpus.index();
  PairManifest m;
  m.setting = setting;
  for (const auto& r : records) {
    ManifestPair p;
    p.id = pair_id(r.src_id, r.tgt_id);
    p.src_id = r.src_id;
    p.tgt_id = r.tgt_id;
    p.category = category;
    p.src_species = r.src_species;
    p.tgt_species = r.tgt_species;
    p.mutual_visible = r.mutual_visible;
    p.source = index.at(r.src_id)->keypoints;
    p.target = index.at(r.tgt_id)->keypoints;
    m.pairs.push_back(std::move(p));
  }
  return m;
}

Json to_json(const Predictions& p) {
  Json preds = Json::object();
  for (const auto& [id, pp] : p.pairs) {
    Json kps = Json::object();
    for (const auto& [k, pt] : pp.points) kps[std::to_string(k)] = {{"x", pt.x}, {"y", pt.y}};
    preds[id] = std::move(kps);
  }
  Json j = {{"format", kPredictionsFormat},
            {"seed", p.seed},
            {"config_hash", p.config_hash},
            {"config", p.config},
            {"predictions", std::move(preds)}};
  if (!p.alignment.empty()) j["alignment"] = alignment_map_json(p.alignment);
  return j;
}

Predictions predictions_from_json(const JsonCursor& c) {
  check_format(c, kPredictionsFormat);
  Predictions p;
  if (auto s = c.find("seed")) p.seed = s->as_uint();
  if (auto s = c.find("config_hash")) p.config_hash = s->as_string();
  if (auto s = c.find("config")) p.config = s->value();
  const auto preds = c.at("predictions");
  for (const auto& [id, value] : preds.object()) {
    const auto pc = preds.at(id);
    PairPredictions pp;
    for (const auto& [key, pt] : pc.object()) {
      const auto kc = pc.at(key);
      int index = -1;
      try {
        std::size_t used = 0;
        index = std::stoi(key, &used);
        if (used != key.size()) index = -1;
      } catch (const std::exception&) {
        index = -1;
      }
      if (index < 0) kc.fail("keypoint keys must be non-negative integers");
      pp.points[index] = {kc.at("x").as_number(), kc.at("y").as_number()};
    }
    p.order.push_back(id);
    p.pairs[id] = std::move(pp);
  }
  if (auto a = c.find("alignment")) p.alignment = alignment_map_from(*a);
  return p;
}

Predictions load_predictions(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  return predictions_from_json(JsonCursor(j, path.string()));
}

Json to_json(const AlignmentTable& t) {
  return {{"format", kAlignmentFormat},
          {"seed", t.seed},
          {"config_hash", t.config_hash},
          {"config", t.config},
          {"alignment", alignment_map_json(t.pairs)}};
}

AlignmentTable alignment_from_json(const JsonCursor& c) {
  check_format(c, kAlignmentFormat);
  AlignmentTable t;
  if (auto s = c.find("seed")) t.seed = s->as_uint();
  if (auto s = c.find("config_hash")) t.config_hash = s->as_string();
  if (auto s = c.find("config")) t.config = s->value();
  t.pairs = alignment_map_from(c.at("alignment"));
  for (const auto& [id, a] : t.pairs) t.order.push_back(id);
  return t;
}

AlignmentTable load_alignment(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  return alignment_from_json(JsonCursor(j, path.string()));
}

FeatureStore::FeatureStore(std::filesystem::path features_dir,
                           std::optional<std::filesystem::path> masks_dir)
    : features_dir_(std::move(features_dir)), masks_dir_(std::move(masks_dir)) {
  if (!features_dir_.empty() && !std::filesystem::is_directory(features_dir_)) {
    throw InputError("feature directory not found: " + features_dir_.string());
  }
  if (masks_dir_ && !std::filesystem::is_directory(*masks_dir_)) {
    throw InputError("mask directory not found: " + masks_dir_->string());
  }
}

std::filesystem::path FeatureStore::feature_path(const std::string& image_id,
                                                 VariantLabel variant) const {
  return features_dir_ / (image_id + "__" + to_string(variant) + ".npy");
}

bool FeatureStore::has_features(const std::string& image_id, VariantLabel variant) const {
  return std::filesystem::is_regular_file(feature_path(image_id, variant));
}

FeatureMap FeatureStore::raw_features(const std::string& image_id, VariantLabel variant) const {
  const auto path = feature_path(image_id, variant);
  if (!std::filesystem::is_regular_file(path)) {
    throw InputError("missing feature file " + path.string());
  }
  return npy::load_feature_map(path);
}

FeatureMap FeatureStore::features(const std::string& image_id, VariantLabel variant) const {
  FeatureMap f = raw_features(image_id, variant);
  if (f.normalized()) return f;
  try {
    return l2_normalize(f);
  } catch (const NumericalError& e) {
    throw NumericalError(feature_path(image_id, variant).string() + ": " + e.what());
  }
}

InstanceMask FeatureStore::stored_mask(const std::string& image_id) const {
  if (!masks_dir_) throw ArgumentError("no mask directory configured");
  const auto path = *masks_dir_ / (image_id + ".npy");
  if (!std::filesystem::is_regular_file(path)) throw InputError("missing mask file " + path.string());
  return npy::load_mask(path);
}

InstanceMask FeatureStore::mask(const std::string& image_id, GridSize grid) const {
  if (!masks_dir_) return InstanceMask(grid.height, grid.width, true);
  const auto path = *masks_dir_ / (image_id + ".npy");
  InstanceMask m = stored_mask(image_id);
  if (m.grid() != grid) {
    throw InputError(path.string() + ": mask grid " + std::to_string(m.width()) + "x" +
                     std::to_string(m.height()) + " differs from the feature grid " +
                     std::to_string(grid.width) + "x" + std::to_string(grid.height));
  }
  return m;
}

}  // namespace geomatch
