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
#include "geomatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

double distance(ImagePoint a, ImagePoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

void check_aligned(std::size_t preds, std::size_t indices, const KeypointSet& gts,
                   std::span<const int> idx) {
  if (preds != indices) {
    throw ArgumentError("predictions and evaluated keypoints differ in length");
  }
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(gts.size())) {
      throw ArgumentError("evaluated keypoint index " + std::to_string(i) +
                          " is out of range");
    }
  }
}

}  // namespace

PckReference parse_pck_reference(const std::string& name) {
  if (name == "bbox") return PckReference::bbox;
  if (name == "image") return PckReference::image;
  throw ArgumentError("unknown PCK reference '" + name + "'");
}

std::string to_string(PckReference ref) {
  return ref == PckReference::bbox ? "bbox" : "image";
}

double pck_threshold(const KeypointSet& gts, const PckConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ArgumentError("PCK alpha must be positive");
  if (cfg.reference == PckReference::bbox) {
    if (!gts.bbox) throw ArgumentError("PCK reference is bbox but no bbox is annotated");
    return cfg.alpha * std::max(gts.bbox->w, gts.bbox->h);
  }
  return cfg.alpha * std::max(gts.image.width, gts.image.height);
}

PckResult pck(std::span<const ImagePoint> preds, const KeypointSet& gts,
              std::span<const int> indices, const PckConfig& cfg) {
  check_aligned(preds.size(), indices.size(), gts, indices);
  PckResult out;
  out.threshold = pck_threshold(gts, cfg);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = distance(preds[i], gts.points[indices[i]].position);
    const bool ok = d <= out.threshold;
    out.distance.push_back(d);
    out.correct.push_back(ok);
    hits += ok ? 1 : 0;
  }
  out.score = preds.empty() ? 0.0 : static_cast<double>(hits) / preds.size();
  return out;
}

double aggregate(std::span<const PckResult> results, Grouping grouping) {
  std::size_t hits = 0;
  std::size_t total = 0;
  double image_sum = 0.0;
  std::size_t images = 0;
  for (const auto& r : results) {
    if (r.correct.empty()) continue;
    const auto h = static_cast<std::size_t>(std::count(r.correct.begin(), r.correct.end(), true));
    hits += h;
    total += r.correct.size();
    image_sum += static_cast<double>(h) / r.correct.size();
    images += 1;
  }
  if (total == 0) throw ArgumentError("cannot aggregate PCK over zero keypoints");
  return grouping == Grouping::per_point ? static_cast<double>(hits) / total
                                         : image_sum / images;
}

double azimuth_sensitivity(const std::map<int, double>& scores) {
  if (scores.empty()) throw ArgumentError("undefined sensitivity: no azimuth bins");
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& [bin, s] : scores) {
    hi = std::max(hi, s);
    lo = std::min(lo, s);
  }
  if (!(hi > 0.0)) throw ArgumentError("undefined sensitivity: all scores are zero");
  return (hi - lo) / hi;
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::correct:
      return "correct";
    case Outcome::jitter:
      return "jitter";
    case Outcome::miss:
      return "miss";
    case Outcome::swap:
      return "swap";
  }
  return "unknown";
}

void BreakdownCounts::add(const KeypointOutcome& o) {
  switch (o.outcome) {
    case Outcome::correct:
      ++correct;
      break;
    case Outcome::jitter:
      ++jitter;
      break;
    case Outcome::miss:
      ++miss;
      break;
    case Outcome::swap:
      ++swap;
      break;
  }
  if (o.swap_lr) ++swap_lr;
}

BreakdownCounts& BreakdownCounts::operator+=(const BreakdownCounts& other) {
  correct += other.correct;
  jitter += other.jitter;
  miss += other.miss;
  swap += other.swap;
  swap_lr += other.swap_lr;
  return *this;
}

BreakdownFractions fractions(const BreakdownCounts& counts) {
  const double n = static_cast<double>(counts.total());
  if (n == 0) return {};
  return {counts.correct / n, counts.jitter / n, counts.miss / n, counts.swap / n,
          counts.swap_lr / n};
}

bool Foreground::contains(ImagePoint p, ImageSize image) const {
  if (mask) {
    const GridPoint g = image_to_grid(p, image, mask->grid());
    const int x = std::clamp(static_cast<int>(std::lround(g.x)), 0, mask->width() - 1);
    const int y = std::clamp(static_cast<int>(std::lround(g.y)), 0, mask->height() - 1);
    return mask->at(y, x);
  }
  if (bbox) return bbox->contains(p);
  throw ArgumentError("breakdown needs a foreground mask or a bounding box");
}

std::vector<KeypointOutcome> breakdown(std::span<const ImagePoint> preds,
                                       const KeypointSet& gts,
                                       std::span<const int> indices,
                                       const SubgroupSchema& schema,
                                       const Foreground& fg, const PckConfig& cfg) {
  check_aligned(preds.size(), indices.size(), gts, indices);
  if (!fg.mask && !fg.bbox) {
    throw ArgumentError("breakdown needs a foreground mask or a bounding box");
  }
  const double threshold = pck_threshold(gts, cfg);
  const auto visible = gts.visible_indices();
  std::vector<KeypointOutcome> out;
  out.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int gt = indices[i];
    const ImagePoint p = preds[i];
    KeypointOutcome o;
    if (distance(p, gts.points[gt].position) <= threshold) {
      o.outcome = Outcome::correct;
    } else if (!fg.contains(p, gts.image)) {
      o.outcome = Outcome::miss;
    } else {
      // nearest visible annotation; the ground truth wins ties
      int nearest = gt;
      double best = distance(p, gts.points[gt].position);
      for (int k : visible) {
        const double d = distance(p, gts.points[k].position);
        if (d < best) {
          best = d;
          nearest = k;
        }
      }
      if (nearest == gt) {
        o.outcome = Outcome::jitter;
      } else {
        o.outcome = Outcome::swap;
        const auto* members = schema.members_of(gt);
        o.swap_lr = members &&
                    std::find(members->begin(), members->end(), nearest) != members->end();
      }
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace geomatch
