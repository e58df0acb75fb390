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
#include "geomatch/pipeline.hpp"

#include <algorithm>
#include <set>

#include "geomatch/error.hpp"
#include "geomatch/npy.hpp"
#include "geomatch/parallel.hpp"

namespace geomatch {

namespace {

void check_keys(const JsonCursor& c, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : c.object()) {
    if (!keys.count(key)) c.at(key).fail("unknown key");
  }
}

std::filesystem::path resolve(const JsonCursor& c, const std::filesystem::path& base) {
  std::filesystem::path p = c.as_string();
  return p.is_absolute() ? p : base / p;
}

template <typename T, typename Parse>
T parse_enum(const JsonCursor& c, Parse parse) {
  try {
    return parse(c.as_string());
  } catch (const ArgumentError& e) {
    c.fail(e.what());
  }
}

template <typename Fn>
void validated(const JsonCursor& c, Fn fn) {
  try {
    fn();
  } catch (const ArgumentError& e) {
    c.fail(e.what());
  }
}

SampleMode parse_sample_mode(const std::string& s) {
  if (s == "bilinear") return SampleMode::bilinear;
  if (s == "nearest") return SampleMode::nearest;
  throw ArgumentError("unknown sampling mode \"" + s + "\" (expected bilinear or nearest)");
}

std::string to_string(SampleMode m) { return m == SampleMode::bilinear ? "bilinear" : "nearest"; }

Reduction parse_reduction(const std::string& s) {
  if (s == "sum") return Reduction::sum;
  if (s == "mean") return Reduction::mean;
  throw ArgumentError("unknown reduction \"" + s + "\" (expected sum or mean)");
}

std::string to_string(Reduction r) { return r == Reduction::sum ? "sum" : "mean"; }

int as_int32(const JsonCursor& c) { return static_cast<int>(c.as_int()); }

GridSize identity_grid_of(const FeatureMap& variant_map, VariantLabel label) {
  const bool odd = label == VariantLabel::rot90 || label == VariantLabel::rot270;
  return odd ? GridSize{variant_map.height(), variant_map.width()} : variant_map.grid();
}

const std::vector<int>* flip_map_for(const SchemaRegistry* schemas, const ManifestPair& p) {
  if (!schemas) return nullptr;
  auto it = schemas->find(p.category);
  if (it == schemas->end()) return nullptr;
  if (it->second.keypoint_count() != p.source.size()) {
    throw InputError("pair " + p.id + ": schema \"" + p.category + "\" has " +
                     std::to_string(it->second.keypoint_count()) + " keypoints, annotation has " +
                     std::to_string(p.source.size()));
  }
  return &it->second.flip_map();
}

Json counts_json(const PairCounts& c) { return {{"sampled", c.sampled}, {"kept", c.kept}}; }

}  // namespace

void EvalConfig::validate() const {
  if (alphas.empty()) throw ArgumentError("at least one PCK alpha is required");
  for (double a : alphas) {
    if (!(a > 0.0)) throw ArgumentError("PCK alpha must be positive");
  }
  if (!(breakdown_alpha > 0.0)) throw ArgumentError("breakdown alpha must be positive");
}

Json to_json(const InferenceConfig& cfg) {
  const InferenceConfig c = cfg.canonical();
  Json j = {{"mode", to_string(c.mode)}, {"sampling", to_string(c.sampling)}};
  if (c.mode == InferenceMode::window) j["window"] = c.window_size;
  if (c.mode != InferenceMode::argmax) j["temperature"] = c.temperature;
  if (c.mode == InferenceMode::kernel) j["kernel_sigma"] = c.kernel_sigma;
  return j;
}

Json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"weight_decay", cfg.weight_decay},
          {"pct_start", cfg.pct_start},
          {"div_factor", cfg.div_factor},
          {"final_div_factor", cfg.final_div_factor},
          {"total_steps", cfg.total_steps},
          {"dropout", cfg.dropout},
          {"perturb_std", cfg.perturb_std},
          {"temperature", cfg.temperature},
          {"contrastive_temperature", cfg.contrastive_temperature},
          {"augment", cfg.augment},
          {"weights",
           {{"original", cfg.weights.original},
            {"double_flip", cfg.weights.double_flip},
            {"single_flip", cfg.weights.single_flip},
            {"self_flip", cfg.weights.self_flip}}},
          {"bottleneck", cfg.bottleneck},
          {"blocks", cfg.blocks},
          {"kernel", cfg.kernel},
          {"checkpoint_every", cfg.checkpoint_every}};
}

Json to_json(const EvalConfig& cfg) {
  return {{"alphas", cfg.alphas},
          {"reference", to_string(cfg.reference)},
          {"geo_split", cfg.geo_split},
          {"breakdown_alpha", cfg.breakdown_alpha}};
}

Json to_json(const BenchmarkConfig& cfg) {
  return {{"n_val", cfg.n_val},
          {"n_test", cfg.n_test},
          {"holdout_below", cfg.holdout_below},
          {"train_pair_factor", cfg.train_pair_factor},
          {"min_visible", cfg.min_visible},
          {"min_mutual_visible", cfg.min_mutual_visible}};
}

Json RunConfig::settings_json() const {
  Json variants = Json::array();
  for (auto v : alignment.variants) variants.push_back(to_string(v));
  Json bench = to_json(benchmark.config);
  bench["category"] = benchmark.category;
  return {{"seed", seed},
          {"inference", to_json(inference)},
          {"alignment",
           {{"variants", std::move(variants)},
            {"metric", to_string(alignment.config.metric)},
            {"reduction", to_string(alignment.config.reduction)}}},
          {"evaluation", to_json(evaluation)},
          {"benchmark", std::move(bench)},
          {"train", to_json(train)}};
}

void RunConfig::check_paths() const {
  auto check = [](const std::optional<std::filesystem::path>& p, const char* what) {
    if (p && !std::filesystem::exists(*p)) {
      throw InputError(std::string(what) + " not found: " + p->string());
    }
  };
  check(dataset_root, "dataset annotations");
  check(features_dir, "feature directory");
  check(masks_dir, "mask directory");
  check(schema_dir, "schema directory");
}

RunConfig run_config_from_json(const JsonCursor& c, const std::filesystem::path& base_dir) {
  check_keys(c, {"seed", "dataset_root", "features_dir", "masks_dir", "schema_dir", "output_dir",
                 "inference", "alignment", "evaluation", "benchmark", "train"});
  RunConfig cfg;
  if (auto v = c.find("seed")) cfg.seed = v->as_uint();
  if (auto v = c.find("dataset_root")) cfg.dataset_root = resolve(*v, base_dir);
  if (auto v = c.find("features_dir")) cfg.features_dir = resolve(*v, base_dir);
  if (auto v = c.find("masks_dir")) cfg.masks_dir = resolve(*v, base_dir);
  if (auto v = c.find("schema_dir")) cfg.schema_dir = resolve(*v, base_dir);
  if (auto v = c.find("output_dir")) cfg.output_dir = resolve(*v, base_dir);

  if (auto s = c.find("inference")) {
    check_keys(*s, {"mode", "window", "temperature", "kernel_sigma", "sampling"});
    auto& inf = cfg.inference;
    if (auto v = s->find("mode")) inf.mode = parse_enum<InferenceMode>(*v, parse_inference_mode);
    if (auto v = s->find("window")) inf.window_size = as_int32(*v);
    if (auto v = s->find("temperature")) inf.temperature = v->as_number();
    if (auto v = s->find("kernel_sigma")) inf.kernel_sigma = v->as_number();
    if (auto v = s->find("sampling")) inf.sampling = parse_enum<SampleMode>(*v, parse_sample_mode);
    validated(*s, [&] { inf.validate(); });
  }
  if (auto s = c.find("alignment")) {
    check_keys(*s, {"variants", "metric", "reduction"});
    auto& al = cfg.alignment;
    if (auto v = s->find("variants")) {
      std::string csv;
      if (v->value().is_string()) {
        csv = v->as_string();
      } else {
        for (std::size_t i = 0; i < v->size(); ++i) {
          csv += (i ? "," : "") + v->at(i).as_string();
        }
      }
      validated(*v, [&] { al.variants = parse_variant_list(csv); });
    }
    if (auto v = s->find("metric")) {
      al.config.metric = parse_enum<AlignMetric>(*v, parse_align_metric);
    }
    if (auto v = s->find("reduction")) {
      al.config.reduction = parse_enum<Reduction>(*v, parse_reduction);
    }
  }
  if (auto s = c.find("evaluation")) {
    check_keys(*s, {"alphas", "reference", "geo_split", "breakdown_alpha"});
    auto& ev = cfg.evaluation;
    if (auto v = s->find("alphas")) ev.alphas = v->as_number_list();
    if (auto v = s->find("reference")) {
      ev.reference = parse_enum<PckReference>(*v, parse_pck_reference);
    }
    if (auto v = s->find("geo_split")) ev.geo_split = v->as_bool();
    if (auto v = s->find("breakdown_alpha")) ev.breakdown_alpha = v->as_number();
    validated(*s, [&] { ev.validate(); });
  }
  if (auto s = c.find("benchmark")) {
    check_keys(*s, {"n_val", "n_test", "holdout_below", "train_pair_factor", "min_visible",
                    "min_mutual_visible", "category"});
    auto& b = cfg.benchmark.config;
    if (auto v = s->find("n_val")) b.n_val = as_int32(*v);
    if (auto v = s->find("n_test")) b.n_test = as_int32(*v);
    if (auto v = s->find("holdout_below")) b.holdout_below = as_int32(*v);
    if (auto v = s->find("train_pair_factor")) b.train_pair_factor = as_int32(*v);
    if (auto v = s->find("min_visible")) b.min_visible = as_int32(*v);
    if (auto v = s->find("min_mutual_visible")) b.min_mutual_visible = as_int32(*v);
    if (auto v = s->find("category")) cfg.benchmark.category = v->as_string();
    validated(*s, [&] { b.validate(); });
  }
  if (auto s = c.find("train")) {
    check_keys(*s, {"learning_rate", "weight_decay", "pct_start", "div_factor",
                    "final_div_factor", "total_steps", "dropout", "perturb_std", "temperature",
                    "contrastive_temperature", "augment", "weights", "bottleneck", "blocks", "kernel",
                    "checkpoint_every"});
    auto& t = cfg.train;
    if (auto v = s->find("learning_rate")) t.learning_rate = v->as_number();
    if (auto v = s->find("weight_decay")) t.weight_decay = v->as_number();
    if (auto v = s->find("pct_start")) t.pct_start = v->as_number();
    if (auto v = s->find("div_factor")) t.div_factor = v->as_number();
    if (auto v = s->find("final_div_factor")) t.final_div_factor = v->as_number();
    if (auto v = s->find("total_steps")) t.total_steps = v->as_uint();
    if (auto v = s->find("dropout")) t.dropout = v->as_number();
    if (auto v = s->find("perturb_std")) t.perturb_std = v->as_number();
    if (auto v = s->find("temperature")) t.temperature = v->as_number();
    if (auto v = s->find("contrastive_temperature")) t.contrastive_temperature = v->as_number();
    if (auto v = s->find("augment")) t.augment = v->as_bool();
    if (auto w = s->find("weights")) {
      check_keys(*w, {"original", "double_flip", "single_flip", "self_flip"});
      if (auto v = w->find("original")) t.weights.original = v->as_number();
      if (auto v = w->find("double_flip")) t.weights.double_flip = v->as_number();
      if (auto v = w->find("single_flip")) t.weights.single_flip = v->as_number();
      if (auto v = w->find("self_flip")) t.weights.self_flip = v->as_number();
    }
    if (auto v = s->find("bottleneck")) t.bottleneck = as_int32(*v);
    if (auto v = s->find("blocks")) t.blocks = as_int32(*v);
    if (auto v = s->find("kernel")) t.kernel = as_int32(*v);
    if (auto v = s->find("checkpoint_every")) t.checkpoint_every = v->as_uint();
    validated(*s, [&] { t.validate(); });
  }
  cfg.train.seed = cfg.seed;
  cfg.benchmark.config.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  return run_config_from_json(JsonCursor(j, path.string()), path.parent_path());
}

GridPoint variant_query(const KeypointSet& source, int index, VariantLabel label,
                        GridSize identity_grid, const std::vector<int>* flip_map) {
  int from = index;
  if (label == VariantLabel::hflip && flip_map && !flip_map->empty()) {
    const int partner = (*flip_map)[static_cast<std::size_t>(index)];
    if (source.visible(partner)) from = partner;
  }
  const GridPoint p =
      image_to_grid(source.points[static_cast<std::size_t>(from)].position, source.image,
                    identity_grid);
  return to_variant_frame(p, label, identity_grid);
}

FeatureMap load_matching_features(const MatchContext& ctx, const std::string& image_id,
                                  VariantLabel variant) {
  if (!ctx.net) return ctx.store->features(image_id, variant);
  const FeatureMap raw = ctx.store->raw_features(image_id, variant);
  if (raw.channels() != ctx.net->in_channels()) {
    throw InputError(ctx.store->feature_path(image_id, variant).string() + ": has " +
                     std::to_string(raw.channels()) + " channels, the post-processor expects " +
                     std::to_string(ctx.net->in_channels()));
  }
  return postprocess(*ctx.net, raw);
}

AlignmentTable run_align(const PairManifest& manifest, const MatchContext& ctx,
                         const AlignmentSettings& settings) {
  if (settings.variants.empty() || settings.variants.front() != VariantLabel::identity) {
    throw ArgumentError("the variant list must start with identity");
  }
  std::vector<PairAlignment> results(manifest.pairs.size());
  parallel_for(
      manifest.pairs.size(),
      [&](std::size_t k) {
        const ManifestPair& p = manifest.pairs[k];
        const FeatureMap tgt = load_matching_features(ctx, p.tgt_id, VariantLabel::identity);
        std::vector<PoseVariant> variants;
        std::optional<InstanceMask> base_mask;
        for (VariantLabel label : settings.variants) {
          FeatureMap f = load_matching_features(ctx, p.src_id, label);
          const GridSize grid = identity_grid_of(f, label);
          if (!base_mask) base_mask = ctx.store->mask(p.src_id, grid);
          if (base_mask->grid() != grid) {
            throw InputError("pair " + p.id + ": feature grids of the source variants disagree");
          }
          InstanceMask m = transform_mask(*base_mask, label);
          variants.push_back({label, std::move(f), std::move(m)});
        }
        try {
          const AlignmentResult r = adaptive_align(variants, tgt, settings.config, 1);
          results[k] = {r.chosen, r.scores};
        } catch (const ArgumentError& e) {
          throw InputError("pair " + p.id + ": " + e.what());
        }
      },
      ctx.threads);
  AlignmentTable table;
  for (std::size_t k = 0; k < manifest.pairs.size(); ++k) {
    table.order.push_back(manifest.pairs[k].id);
    table.pairs[manifest.pairs[k].id] = results[k];
  }
  return table;
}

Predictions run_match(const PairManifest& manifest, const MatchContext& ctx,
                      const InferenceConfig& inference, const AlignmentTable* alignment) {
  inference.validate();
  std::vector<PairPredictions> results(manifest.pairs.size());
  parallel_for(
      manifest.pairs.size(),
      [&](std::size_t k) {
        const ManifestPair& p = manifest.pairs[k];
        VariantLabel label = VariantLabel::identity;
        if (alignment) {
          auto it = alignment->pairs.find(p.id);
          if (it == alignment->pairs.end()) {
            throw InputError("alignment table has no entry for pair " + p.id);
          }
          label = it->second.chosen;
        }
        const FeatureMap src = load_matching_features(ctx, p.src_id, label);
        const FeatureMap tgt = load_matching_features(ctx, p.tgt_id, VariantLabel::identity);
        const GridSize grid = identity_grid_of(src, label);
        const std::vector<int>* flip_map = flip_map_for(ctx.schemas, p);
        std::vector<GridPoint> queries;
        for (int i : p.mutual_visible) {
          queries.push_back(variant_query(p.source, i, label, grid, flip_map));
        }
        std::vector<GridPoint> found;
        try {
          found = match_keypoints(src, tgt, queries, inference, 1);
        } catch (const ArgumentError& e) {
          throw InputError("pair " + p.id + ": " + e.what());
        }
        PairPredictions out;
        for (std::size_t q = 0; q < found.size(); ++q) {
          out.points[p.mutual_visible[q]] = grid_to_image(found[q], p.target.image, tgt.grid());
        }
        results[k] = std::move(out);
      },
      ctx.threads);
  Predictions preds;
  for (std::size_t k = 0; k < manifest.pairs.size(); ++k) {
    const std::string& id = manifest.pairs[k].id;
    preds.order.push_back(id);
    preds.pairs[id] = std::move(results[k]);
    if (alignment) preds.alignment[id] = alignment->pairs.at(id);
  }
  return preds;
}

BenchmarkOutput run_build_benchmark(const AnnotationCorpus& corpus,
                                    const BenchmarkSettings& settings,
                                    const std::string& config_hash) {
  const BenchmarkConfig& cfg = settings.config;
  cfg.validate();
  corpus.validate();
  const AnnotationCorpus filtered = filter_images(corpus, cfg.min_visible);
  const BenchmarkSplit split = build_benchmark(corpus, cfg);

  BenchmarkOutput out;
  const std::pair<const char*, const std::vector<PairRecord>*> settings_list[] = {
      {"intra_train", &split.intra_train},
      {"intra_val", &split.intra_val},
      {"intra_test", &split.intra_test},
      {"cross_species_val", &split.cross_species_val},
      {"cross_species_test", &split.cross_species_test},
      {"cross_family_val", &split.cross_family_val},
      {"cross_family_test", &split.cross_family_test},
  };
  for (const auto& [name, records] : settings_list) {
    PairManifest m = manifest_from_records(*records, filtered, settings.category, name);
    m.seed = cfg.seed;
    m.config_hash = config_hash;
    m.metadata = {{"benchmark", to_json(cfg)},
                  {"cross_species", "all species pairs within a family"},
                  {"holdout_species", split.holdout_species}};
    out.settings.emplace(name, std::move(m));
  }

  Json species = Json::object();
  for (const auto& [name, s] : split.species) {
    Json entry = {{"family", s.family},
                  {"holdout", s.holdout},
                  {"train_images", s.train.size()},
                  {"val_images", s.val.size()},
                  {"test_images", s.test.size()}};
    auto counts = [&](const std::map<std::string, PairCounts>& m) {
      auto it = m.find(name);
      return counts_json(it == m.end() ? PairCounts{} : it->second);
    };
    entry["train_pairs"] = counts(split.train_counts);
    entry["val_pairs"] = counts(split.val_counts);
    entry["test_pairs"] = counts(split.test_counts);
    species[name] = std::move(entry);
  }
  out.stats = {{"format", "geomatch.benchmark-stats/1"},
               {"seed", cfg.seed},
               {"config_hash", config_hash},
               {"images", corpus.images.size()},
               {"filtered_images", filtered.images.size()},
               {"holdout_species", split.holdout_species},
               {"species", std::move(species)},
               {"cross_species",
                {{"val", counts_json(split.cross_species_val_counts)},
                 {"test", counts_json(split.cross_species_test_counts)}}},
               {"cross_family",
                {{"val", counts_json(split.cross_family_val_counts)},
                 {"test", counts_json(split.cross_family_test_counts)}}}};
  return out;
}

std::vector<TrainPair> load_train_pairs(const PairManifest& manifest, const FeatureStore& store,
                                        const SchemaRegistry* schemas, bool with_flips) {
  std::vector<TrainPair> out;
  for (const auto& p : manifest.pairs) {
    TrainPair t;
    t.id = p.id;
    t.source = to_dense(store.raw_features(p.src_id, VariantLabel::identity));
    t.target = to_dense(store.raw_features(p.tgt_id, VariantLabel::identity));
    if (with_flips) {
      for (const auto& [id, slot] : {std::pair{p.src_id, &t.source_flipped},
                                     std::pair{p.tgt_id, &t.target_flipped}}) {
        if (!store.has_features(id, VariantLabel::hflip)) {
          throw InputError("pair " + p.id + ": missing flipped-image feature file " +
                           store.feature_path(id, VariantLabel::hflip).string());
        }
        *slot = to_dense(store.raw_features(id, VariantLabel::hflip));
      }
    }
    auto to_grid = [](const KeypointSet& set, GridSize grid) {
      std::vector<std::optional<GridPoint>> kps(set.size());
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.points[i].visible) kps[i] = image_to_grid(set.points[i].position, set.image, grid);
      }
      return kps;
    };
    t.source_keypoints = to_grid(p.source, t.source.grid());
    t.target_keypoints = to_grid(p.target, t.target.grid());
    if (const auto* fm = flip_map_for(schemas, p)) t.flip_map = *fm;
    out.push_back(std::move(t));
  }
  return out;
}

PoseTemplateManifest load_pose_templates(const std::filesystem::path& dir) {
  const auto path = dir / "templates.json";
  const Json j = read_json_file(path);
  const JsonCursor c(j, path.string());
  PoseTemplateManifest out;
  const auto sets = c.at("sets");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto sc = sets.at(i);
    TemplateSet set;
    set.name = sc.at("name").as_string();
    const auto templates = sc.at("templates");
    for (const auto& [label, value] : templates.object()) {
      const auto tc = templates.at(label);
      PoseTemplate t;
      FeatureMap f = npy::load_feature_map(dir / tc.at("features").as_string());
      t.features = f.normalized() ? std::move(f) : l2_normalize(f);
      if (auto m = tc.find("mask")) t.mask = npy::load_mask(dir / m->as_string());
      set.templates.emplace(label, std::move(t));
    }
    validated(sc, [&] { set.validate(); });
    out.sets.push_back(std::move(set));
  }
  return out;
}

}  // namespace geomatch
