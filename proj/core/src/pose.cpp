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
#include "geomatch/pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geomatch/error.hpp"
#include "geomatch/matcher.hpp"
#include "geomatch/parallel.hpp"

namespace geomatch {

namespace {

int quarter_turns(VariantLabel label) {
  switch (label) {
    case VariantLabel::rot90:
      return 1;
    case VariantLabel::rot180:
      return 2;
    case VariantLabel::rot270:
      return 3;
    default:
      return 0;
  }
}

}  // namespace

double imd(const FeatureMap& src, const FeatureMap& tgt, const InstanceMask& mask,
           Reduction reduction) {
  if (mask.grid() != src.grid()) {
    throw ArgumentError("mask dimensions do not match the source feature map");
  }
  const std::size_t n = mask.count();
  if (n == 0) throw ArgumentError("IMD needs a non-empty source mask");
  const NnField field = nn_field(src, tgt);
  double total = 0.0;
  for (int i = 0; i < src.cells(); ++i) {
    if (mask.bits()[i]) total += field.distance[i];
  }
  return reduction == Reduction::mean ? total / static_cast<double>(n) : total;
}

double mutual_nn_distance(const FeatureMap& src, const FeatureMap& tgt) {
  const auto pairs = mutual_nn_pairs(src, tgt);
  if (pairs.empty()) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (auto [i, j] : pairs) {
    double sq = 0.0;
    auto a = src.cell(i);
    auto b = tgt.cell(j);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = static_cast<double>(a[k]) - b[k];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(pairs.size());
}

std::string to_string(VariantLabel label) {
  switch (label) {
    case VariantLabel::identity:
      return "identity";
    case VariantLabel::hflip:
      return "hflip";
    case VariantLabel::rot90:
      return "rot90";
    case VariantLabel::rot180:
      return "rot180";
    case VariantLabel::rot270:
      return "rot270";
  }
  return "unknown";
}

VariantLabel parse_variant(const std::string& name) {
  for (auto label : {VariantLabel::identity, VariantLabel::hflip, VariantLabel::rot90,
                     VariantLabel::rot180, VariantLabel::rot270}) {
    if (to_string(label) == name) return label;
  }
  throw ArgumentError("unknown variant '" + name + "'");
}

std::vector<VariantLabel> parse_variant_list(const std::string& csv) {
  std::vector<VariantLabel> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_variant(item));
  }
  if (out.empty() || out.front() != VariantLabel::identity) {
    throw ArgumentError("variant list must start with identity");
  }
  return out;
}

GridPoint to_variant_frame(GridPoint p, VariantLabel label, GridSize original) {
  if (label == VariantLabel::hflip) return flip_point(p, original);
  return rotate_point(p, original, quarter_turns(label));
}

GridPoint from_variant_frame(GridPoint p, VariantLabel label, GridSize original) {
  if (label == VariantLabel::hflip) return flip_point(p, original);
  const int turns = quarter_turns(label);
  if (turns == 0) return p;
  const GridSize rotated = turns % 2 == 1 ? GridSize{original.height, original.width}
                                          : original;
  return rotate_point(p, rotated, (4 - turns) % 4);
}

InstanceMask transform_mask(const InstanceMask& m, VariantLabel label) {
  if (label == VariantLabel::hflip) return flip_horizontal(m);
  return rotate90(m, quarter_turns(label));
}

FeatureMap transform_features(const FeatureMap& f, VariantLabel label) {
  if (label == VariantLabel::hflip) return flip_horizontal(f);
  return rotate90(f, quarter_turns(label));
}

void TemplateSet::validate() const {
  if (templates.size() < 2) {
    throw ArgumentError("template set '" + name + "' needs at least two poses");
  }
  const int channels = templates.begin()->second.features.channels();
  for (const auto& [label, t] : templates) {
    if (t.features.channels() != channels) {
      throw ArgumentError("template set '" + name + "' mixes channel counts");
    }
  }
}

PosePrediction predict_pose(const FeatureMap& query, const InstanceMask& query_mask,
                            std::span<const TemplateSet> sets) {
  if (sets.empty()) throw ArgumentError("pose prediction needs a template set");
  PosePrediction out;
  for (const auto& set : sets) {
    set.validate();
    std::map<std::string, double> scores;
    std::string best;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& [label, t] : set.templates) {
      const double d = imd(query, t.features, query_mask, Reduction::sum);
      scores[label] = d;
      out.total_imd[label] += d;
      if (d < best_score) {
        best_score = d;
        best = label;
      }
    }
    out.votes[best] += 1;
    out.set_choices.push_back(best);
    out.set_scores.push_back(std::move(scores));
  }
  // map iteration is lexicographic, so strict comparisons keep the first label
  int best_votes = -1;
  double best_total = std::numeric_limits<double>::infinity();
  for (const auto& [label, votes] : out.votes) {
    const double total = out.total_imd[label];
    if (votes > best_votes || (votes == best_votes && total < best_total)) {
      best_votes = votes;
      best_total = total;
      out.label = label;
    }
  }
  return out;
}

AlignMetric parse_align_metric(const std::string& name) {
  if (name == "imd") return AlignMetric::imd;
  if (name == "mutual_nn" || name == "mutual-nn") return AlignMetric::mutual_nn;
  throw ArgumentError("unknown alignment metric '" + name + "'");
}

std::string to_string(AlignMetric metric) {
  return metric == AlignMetric::imd ? "imd" : "mutual_nn";
}

AlignmentResult adaptive_align(std::span<const PoseVariant> variants,
                               const FeatureMap& tgt, const AlignConfig& cfg,
                               std::size_t threads) {
  if (variants.empty() || variants.front().label != VariantLabel::identity) {
    throw ArgumentError("alignment needs the identity variant listed first");
  }
  std::vector<double> scores(variants.size());
  parallel_for(
      variants.size(),
      [&](std::size_t i) {
        const auto& v = variants[i];
        scores[i] = cfg.metric == AlignMetric::imd
                        ? imd(v.features, tgt, v.mask, cfg.reduction)
                        : mutual_nn_distance(v.features, tgt);
      },
      threads);
  AlignmentResult out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    out.scores.emplace_back(variants[i].label, scores[i]);
    if (scores[i] < scores[best]) best = i;
  }
  out.chosen = variants[best].label;
  return out;
}

}  // namespace geomatch
