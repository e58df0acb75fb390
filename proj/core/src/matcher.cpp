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
#include "geomatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geomatch/error.hpp"
#include "geomatch/parallel.hpp"

namespace geomatch {

namespace {

struct Rect {
  int x0, y0, x1, y1;  // inclusive
};

// Softmax-weighted mean of cell centers over `r`, stabilized by the max.
GridPoint softmax_expectation(const SimilarityMap& s, const Rect& r,
                              double temperature) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) peak = std::max(peak, s.at(y, x));
  }
  double total = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) {
      const double w = std::exp((s.at(y, x) - peak) / temperature);
      total += w;
      sx += w * x;
      sy += w * y;
    }
  }
  return {sx / total, sy / total};
}

Rect full(const SimilarityMap& s) { return {0, 0, s.width - 1, s.height - 1}; }

void check_nonempty(const SimilarityMap& s) {
  if (s.width <= 0 || s.height <= 0 ||
      s.values.size() != static_cast<std::size_t>(s.width) * s.height) {
    throw ArgumentError("similarity map is empty or inconsistent");
  }
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
}

void check_pair(const FeatureMap& src, const FeatureMap& tgt) {
  if (src.channels() != tgt.channels()) {
    throw ArgumentError("channel mismatch: " + std::to_string(src.channels()) +
                        " vs " + std::to_string(tgt.channels()));
  }
  if (!src.normalized() || !tgt.normalized()) {
    throw ArgumentError("nearest-neighbour search needs normalized feature maps");
  }
}

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += static_cast<double>(a[k]) * b[k];
  }
  return acc;
}

double l2(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Row-major index of the best target cell for `query`.
int best_cell(std::span<const float> query, const FeatureMap& tgt) {
  int best = 0;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < tgt.cells(); ++j) {
    const double sim = dot(query, tgt.cell(j));
    if (sim > best_sim) {
      best_sim = sim;
      best = j;
    }
  }
  return best;
}

}  // namespace

InferenceMode parse_inference_mode(const std::string& name) {
  if (name == "argmax") return InferenceMode::argmax;
  if (name == "soft") return InferenceMode::soft;
  if (name == "window") return InferenceMode::window;
  if (name == "kernel") return InferenceMode::kernel;
  throw ArgumentError("unknown inference mode '" + name +
                      "' (expected argmax, soft, window or kernel)");
}

std::string to_string(InferenceMode mode) {
  switch (mode) {
    case InferenceMode::argmax:
      return "argmax";
    case InferenceMode::soft:
      return "soft";
    case InferenceMode::window:
      return "window";
    case InferenceMode::kernel:
      return "kernel";
  }
  return "unknown";
}

void InferenceConfig::validate() const {
  if (window_size < 1 || window_size % 2 == 0) {
    throw ArgumentError("window size must be odd and >= 1, got " +
                        std::to_string(window_size));
  }
  check_temperature(temperature);
  if (!(kernel_sigma > 0.0)) throw ArgumentError("kernel sigma must be positive");
}

InferenceConfig InferenceConfig::canonical() const {
  InferenceConfig out = *this;
  if (out.mode == InferenceMode::window && out.window_size == 1) out.mode = InferenceMode::argmax;
  return out;
}

SimilarityMap similarity_map(std::span<const float> query, const FeatureMap& target) {
  if (static_cast<int>(query.size()) != target.channels()) {
    throw ArgumentError("channel mismatch: query has " +
                        std::to_string(query.size()) + ", target has " +
                        std::to_string(target.channels()));
  }
  if (!target.normalized()) {
    throw ArgumentError("similarity target must be a normalized feature map");
  }
  SimilarityMap s{target.height(), target.width(), {}};
  s.values.resize(static_cast<std::size_t>(target.cells()));
  for (int i = 0; i < target.cells(); ++i) s.values[i] = dot(query, target.cell(i));
  return s;
}

GridPoint hard_argmax(const SimilarityMap& s) {
  check_nonempty(s);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (s.values[i] > s.values[best]) best = i;
  }
  return {static_cast<double>(best % s.width), static_cast<double>(best / s.width)};
}

GridPoint soft_argmax(const SimilarityMap& s, double temperature) {
  check_nonempty(s);
  check_temperature(temperature);
  return softmax_expectation(s, full(s), temperature);
}

GridPoint window_soft_argmax(const SimilarityMap& s, int window_size,
                             double temperature) {
  if (window_size < 1 || window_size % 2 == 0) {
    throw ArgumentError("window size must be odd and >= 1");
  }
  check_temperature(temperature);
  const GridPoint c = hard_argmax(s);
  const int cx = static_cast<int>(c.x);
  const int cy = static_cast<int>(c.y);
  const int r = window_size / 2;
  const Rect rect{std::max(0, cx - r), std::max(0, cy - r),
                  std::min(s.width - 1, cx + r), std::min(s.height - 1, cy + r)};
  return softmax_expectation(s, rect, temperature);
}

GridPoint kernel_soft_argmax(const SimilarityMap& s, double sigma,
                             double temperature) {
  if (!(sigma > 0.0)) throw ArgumentError("kernel sigma must be positive");
  check_temperature(temperature);
  const GridPoint c = hard_argmax(s);
  SimilarityMap weighted = s;
  const double denom = 2.0 * sigma * sigma;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const double d2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
      weighted.values[static_cast<std::size_t>(y) * s.width + x] *= std::exp(-d2 / denom);
    }
  }
  return softmax_expectation(weighted, full(weighted), temperature);
}

GridPoint locate(const SimilarityMap& s, const InferenceConfig& cfg) {
  switch (cfg.mode) {
    case InferenceMode::argmax:
      return hard_argmax(s);
    case InferenceMode::soft:
      return soft_argmax(s, cfg.temperature);
    case InferenceMode::window:
      return window_soft_argmax(s, cfg.window_size, cfg.temperature);
    case InferenceMode::kernel:
      return kernel_soft_argmax(s, cfg.kernel_sigma, cfg.temperature);
  }
  throw ArgumentError("unknown inference mode");
}

NnField nn_field(const FeatureMap& src, const FeatureMap& tgt) {
  check_pair(src, tgt);
  if (tgt.cells() == 0) throw ArgumentError("target feature map is empty");
  NnField field{src.grid(), {}, {}};
  field.index.resize(static_cast<std::size_t>(src.cells()));
  field.distance.resize(static_cast<std::size_t>(src.cells()));
  for (int i = 0; i < src.cells(); ++i) {
    const int j = best_cell(src.cell(i), tgt);
    field.index[i] = j;
    field.distance[i] = l2(src.cell(i), tgt.cell(j));
  }
  return field;
}

std::vector<std::pair<int, int>> mutual_nn_pairs(const FeatureMap& src,
                                                 const FeatureMap& tgt) {
  check_pair(src, tgt);
  std::vector<std::pair<int, int>> pairs;
  if (src.cells() == 0 || tgt.cells() == 0) return pairs;
  std::vector<int> backward(static_cast<std::size_t>(tgt.cells()));
  for (int j = 0; j < tgt.cells(); ++j) backward[j] = best_cell(tgt.cell(j), src);
  for (int i = 0; i < src.cells(); ++i) {
    const int j = best_cell(src.cell(i), tgt);
    if (backward[j] == i) pairs.emplace_back(i, j);
  }
  return pairs;
}

std::vector<GridPoint> match_keypoints(const FeatureMap& src, const FeatureMap& tgt,
                                       std::span<const GridPoint> keypoints,
                                       const InferenceConfig& cfg,
                                       std::size_t threads) {
  cfg.validate();
  if (src.channels() != tgt.channels()) {
    throw ArgumentError("channel mismatch between source and target features");
  }
  std::vector<GridPoint> out(keypoints.size());
  parallel_for(
      keypoints.size(),
      [&](std::size_t i) {
        const auto query = sample_descriptor(src, keypoints[i], cfg.sampling);
        out[i] = locate(similarity_map(query, tgt), cfg);
      },
      threads);
  return out;
}

}  // namespace geomatch
