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
#include "geomatch/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "geomatch/error.hpp"
#include "geomatch/json_io.hpp"
#include "geomatch/npy.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {

namespace {

// Canonical layout of a quadruped facing right, unit box.
constexpr double kLayout[17][2] = {
    {0.85, 0.22}, {0.80, 0.20}, {0.95, 0.30}, {0.70, 0.35}, {0.15, 0.35}, {0.65, 0.45},
    {0.66, 0.65}, {0.67, 0.90}, {0.60, 0.43}, {0.58, 0.63}, {0.56, 0.88}, {0.25, 0.45},
    {0.27, 0.66}, {0.28, 0.90}, {0.20, 0.43}, {0.18, 0.64}, {0.17, 0.88}};

std::vector<double> random_unit(int channels, CounterRng& rng) {
  std::vector<double> v(static_cast<std::size_t>(channels));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& e : v) {
      e = rng.normal();
      norm += e * e;
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-6);
  for (double& e : v) e /= norm;
  return v;
}

}  // namespace

SubgroupSchema quadruped_schema(const std::string& category) {
  return SubgroupSchema(category,
                        {{"shoulder", {5, 8}},
                         {"foot", {7, 10, 13, 16}},
                         {"knee", {6, 9, 12, 15}},
                         {"hip", {11, 14}}},
                        {1, 0, 2, 3, 4, 8, 9, 10, 5, 6, 7, 14, 15, 16, 11, 12, 13});
}

AnnotationCorpus make_synthetic_corpus(const SyntheticCorpusConfig& cfg) {
  if (cfg.families <= 0) throw ArgumentError("synthetic corpus needs at least one family");
  const SubgroupSchema schema = quadruped_schema();
  const CounterRng root(cfg.seed);
  const double w = cfg.image.width;
  const double h = cfg.image.height;
  AnnotationCorpus corpus;
  for (std::size_t s = 0; s < cfg.species_sizes.size(); ++s) {
    char name[16];
    std::snprintf(name, sizeof(name), "s%02zu", s);
    const std::string species = name;
    const std::string family = "f" + std::to_string(s % static_cast<std::size_t>(cfg.families));
    CounterRng srng = root.substream("species/" + species);
    double layout[17][2];
    for (int k = 0; k < 17; ++k) {
      layout[k][0] = std::clamp(kLayout[k][0] + 0.03 * srng.normal(), 0.0, 1.0);
      layout[k][1] = std::clamp(kLayout[k][1] + 0.03 * srng.normal(), 0.0, 1.0);
    }
    for (int i = 0; i < cfg.species_sizes[s]; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%04d", species.c_str(), i);
      CounterRng rng = root.substream(std::string("image/") + id);
      const bool facing_left = rng.uniform() < 0.5;
      const double scale = 0.5 + 0.4 * rng.uniform();
      const double ox = (1.0 - scale) * rng.uniform();
      const double oy = (1.0 - scale) * rng.uniform();
      CorpusImage img;
      img.id = id;
      img.species = species;
      img.family = family;
      img.instance_count = rng.uniform() < cfg.multi_instance ? 2 : 1;
      img.keypoints.image = cfg.image;
      double x0 = w;
      double y0 = h;
      double x1 = 0.0;
      double y1 = 0.0;
      for (int k = 0; k < 17; ++k) {
        // a left-facing animal shows its mirrored partner at each label
        const int src = facing_left ? schema.flipped(k) : k;
        double u = layout[src][0] + 0.02 * rng.normal();
        const double v = layout[src][1] + 0.02 * rng.normal();
        if (facing_left) u = 1.0 - u;
        const double px = std::clamp((ox + scale * u) * (w - 1), 0.0, w - 1);
        const double py = std::clamp((oy + scale * v) * (h - 1), 0.0, h - 1);
        const bool visible = rng.uniform() < cfg.visibility;
        img.keypoints.points.push_back({{px, py}, visible});
        x0 = std::min(x0, px);
        y0 = std::min(y0, py);
        x1 = std::max(x1, px);
        y1 = std::max(y1, py);
      }
      x0 = std::max(0.0, x0 - 4.0);
      y0 = std::max(0.0, y0 - 4.0);
      x1 = std::min(w - 1, x1 + 4.0);
      y1 = std::min(h - 1, y1 + 4.0);
      img.keypoints.bbox = BoundingBox{x0, y0, x1 - x0, y1 - y0};
      corpus.images.push_back(std::move(img));
    }
  }
  return corpus;
}

std::vector<std::vector<double>> part_descriptors(const SubgroupSchema& schema,
                                                  const SyntheticFeatureConfig& cfg) {
  CounterRng rng = CounterRng(cfg.seed).substream("parts");
  const std::size_t n = schema.keypoint_count();
  std::vector<std::vector<double>> shared(n);
  std::vector<std::vector<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) shared[k] = random_unit(cfg.channels, rng);
  for (std::size_t k = 0; k < n; ++k) {
    const int partner = schema.flipped(static_cast<int>(k));
    if (partner == static_cast<int>(k)) {
      out[k] = shared[k];
      continue;
    }
    const auto& common = shared[static_cast<std::size_t>(std::min<int>(partner, k))];
    std::vector<double> own = random_unit(cfg.channels, rng);
    double norm = 0.0;
    for (int c = 0; c < cfg.channels; ++c) {
      own[c] = cfg.lr_similarity * common[c] + (1.0 - cfg.lr_similarity) * own[c];
      norm += own[c] * own[c];
    }
    norm = std::sqrt(norm);
    for (double& e : own) e /= norm;
    out[k] = std::move(own);
  }
  return out;
}

FeatureMap render_features(const KeypointSet& keypoints, const std::string& image_id,
                           const std::vector<std::vector<double>>& parts,
                           const SyntheticFeatureConfig& cfg, bool mirrored,
                           const std::vector<int>& flip_map) {
  const int gw = cfg.grid.width;
  const int gh = cfg.grid.height;
  const int c = cfg.channels;
  FeatureMap f(gh, gw, c);
  CounterRng rng = CounterRng(cfg.seed).substream("background/" + image_id);
  std::vector<double> bg(static_cast<std::size_t>(gw) * gh * c);
  for (double& e : bg) e = cfg.background * rng.normal();

  const KeypointSet shown = mirrored ? flip_keypoints(keypoints, flip_map) : keypoints;
  std::vector<std::pair<GridPoint, std::size_t>> blobs;
  for (std::size_t k = 0; k < shown.size(); ++k) {
    if (!shown.points[k].visible) continue;
    blobs.emplace_back(image_to_grid(shown.points[k].position, shown.image, cfg.grid), k);
  }
  const double inv = 1.0 / (2.0 * cfg.part_sigma * cfg.part_sigma);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      const int bx = mirrored ? gw - 1 - x : x;
      auto cell = f.at(y, x);
      const double* b = bg.data() + (static_cast<std::size_t>(y) * gw + bx) * c;
      for (int k = 0; k < c; ++k) cell[k] = static_cast<float>(b[k]);
      for (const auto& [p, label] : blobs) {
        const double d2 = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
        const double wgt = std::exp(-d2 * inv);
        if (wgt < 1e-6) continue;
        for (int k = 0; k < c; ++k) cell[k] += static_cast<float>(wgt * parts[label][k]);
      }
    }
  }
  return l2_normalize(f);
}

InstanceMask render_mask(const KeypointSet& keypoints, GridSize grid, bool mirrored) {
  InstanceMask m(grid.height, grid.width, !keypoints.bbox.has_value());
  if (!keypoints.bbox) return m;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const ImagePoint p = grid_to_image({static_cast<double>(x), static_cast<double>(y)},
                                         keypoints.image, grid);
      if (keypoints.bbox->contains(p)) m.set(y, x, true);
    }
  }
  return mirrored ? flip_horizontal(m) : m;
}

void write_synthetic_dataset(const std::filesystem::path& dir, const AnnotationCorpus& corpus,
                             const SubgroupSchema& schema, const SyntheticFeatureConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "masks");
  fs::create_directories(dir / "schemas");
  write_json_file(dir / "annotations.json", corpus_to_coco(corpus));
  write_json_file(dir / "schemas" / (schema.category() + ".json"), to_json(schema));
  const auto parts = part_descriptors(schema, cfg);
  for (const auto& img : corpus.images) {
    if (img.keypoints.size() != schema.keypoint_count()) {
      throw ArgumentError("image " + img.id + " does not match the schema keypoint count");
    }
    for (bool mirrored : {false, true}) {
      const FeatureMap f = render_features(img.keypoints, img.id, parts, cfg, mirrored,
                                           schema.flip_map());
      npy::save_feature_map(dir / "features" / (img.id + (mirrored ? "__hflip" : "__identity") +
                                                ".npy"),
                            f);
    }
    npy::save_mask(dir / "masks" / (img.id + ".npy"), render_mask(img.keypoints, cfg.grid, false));
  }
}

PermutationTask make_permutation_task(const PermutationTaskConfig& cfg) {
  if (cfg.channels < 2 || cfg.grid < 2 * cfg.max_shift + 2 || cfg.keypoints < 2) {
    throw ArgumentError("permutation task is too small");
  }
  const CounterRng root(cfg.seed);
  PermutationTask task;
  task.image = {cfg.grid * cfg.cell_pixels, cfg.grid * cfg.cell_pixels};

  // random perfect matching of channels (one fixed point when odd)
  CounterRng prng = root.substream("permutation");
  std::vector<int> order(static_cast<std::size_t>(cfg.channels));
  for (int k = 0; k < cfg.channels; ++k) order[k] = k;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[prng.bounded(i)]);
  task.permutation.assign(order.size(), 0);
  for (int k = 0; k < cfg.channels; ++k) task.permutation[k] = k;
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
    task.permutation[order[i]] = order[i + 1];
    task.permutation[order[i + 1]] = order[i];
  }

  const int g = cfg.grid;
  const int c = cfg.channels;
  auto make_pair = [&](const std::string& id) {
    CounterRng rng = root.substream("pair/" + id);
    TrainPair p;
    p.id = id;
    p.source = DenseMap(g, g, c);
    p.target = DenseMap(g, g, c);
    for (double& v : p.source.values) v = rng.normal();
    const int span = 2 * cfg.max_shift + 1;
    const int dx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span))) - cfg.max_shift;
    const int dy = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span))) - cfg.max_shift;
    for (int y = 0; y < g; ++y) {
      for (int x = 0; x < g; ++x) {
        auto dst = p.target.cell(y * g + x);
        const int sx = x - dx;
        const int sy = y - dy;
        if (sx < 0 || sx >= g || sy < 0 || sy >= g) {
          for (double& v : dst) v = rng.normal();
          continue;
        }
        auto src = p.source.cell(sy * g + sx);
        for (int k = 0; k < c; ++k) dst[k] = src[task.permutation[k]];
      }
    }
    // keypoints on source cells whose shifted position stays in the grid
    std::vector<std::uint64_t> candidates;
    for (int y = 0; y < g; ++y) {
      for (int x = 0; x < g; ++x) {
        if (x + dx >= 0 && x + dx < g && y + dy >= 0 && y + dy < g) {
          candidates.push_back(static_cast<std::uint64_t>(y * g + x));
        }
      }
    }
    for (auto pick : sample_distinct(candidates.size(), static_cast<std::uint64_t>(cfg.keypoints),
                                     rng)) {
      const int cell = static_cast<int>(candidates[pick]);
      const double x = cell % g;
      const double y = cell / g;
      p.source_keypoints.push_back(GridPoint{x, y});
      p.target_keypoints.push_back(GridPoint{x + dx, y + dy});
    }
    return p;
  };
  for (int i = 0; i < cfg.train_pairs; ++i) task.train.push_back(make_pair("train-" + std::to_string(i)));
  for (int i = 0; i < cfg.held_out_pairs; ++i) {
    task.held_out.push_back(make_pair("held-out-" + std::to_string(i)));
  }
  return task;
}

double permutation_task_pck(const PostProcessor& net, const std::vector<TrainPair>& pairs,
                            ImageSize image, const InferenceConfig& inference, double alpha) {
  const double threshold = alpha * std::max(image.width, image.height);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& p : pairs) {
    const FeatureMap src = postprocess(net, to_feature_map(p.source, false));
    const FeatureMap tgt = postprocess(net, to_feature_map(p.target, false));
    std::vector<GridPoint> queries;
    std::vector<GridPoint> truth;
    for (std::size_t i = 0; i < p.source_keypoints.size(); ++i) {
      if (!p.source_keypoints[i] || !p.target_keypoints[i]) continue;
      queries.push_back(*p.source_keypoints[i]);
      truth.push_back(*p.target_keypoints[i]);
    }
    const auto found = match_keypoints(src, tgt, queries, inference, 1);
    for (std::size_t i = 0; i < found.size(); ++i) {
      const ImagePoint a = grid_to_image(found[i], image, tgt.grid());
      const ImagePoint b = grid_to_image(truth[i], image, tgt.grid());
      hits += std::hypot(a.x - b.x, a.y - b.y) <= threshold ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace geomatch
