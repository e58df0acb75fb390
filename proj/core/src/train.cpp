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
#include "geomatch/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geomatch/error.hpp"
#include "geomatch/optim.hpp"

namespace geomatch {

namespace {

GridPoint mirror(GridPoint p, int width) { return {width - 1 - p.x, p.y}; }

int flipped_label(const std::vector<int>& flip_map, std::size_t i) {
  return flip_map.empty() ? static_cast<int>(i) : flip_map[i];
}

const std::optional<GridPoint>& at(const std::vector<std::optional<GridPoint>>& kps, int i) {
  return kps[static_cast<std::size_t>(i)];
}

void check_pair(const TrainPair& pair) {
  const auto n = pair.source_keypoints.size();
  if (pair.target_keypoints.size() != n) {
    throw InputError("pair " + pair.id + ": keypoint lists differ in length");
  }
  if (!pair.flip_map.empty()) {
    if (pair.flip_map.size() != n) {
      throw InputError("pair " + pair.id + ": flip map length differs from keypoint count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int j = pair.flip_map[i];
      if (j < 0 || static_cast<std::size_t>(j) >= n ||
          pair.flip_map[static_cast<std::size_t>(j)] != static_cast<int>(i)) {
        throw InputError("pair " + pair.id + ": flip map is not an involution");
      }
    }
  }
  if (pair.source.channels != pair.target.channels) {
    throw InputError("pair " + pair.id + ": source and target channel counts differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (pair.source_keypoints[i] && !in_grid(*pair.source_keypoints[i], pair.source.grid())) {
      throw InputError("pair " + pair.id + ": source keypoint " + std::to_string(i) +
                       " outside the feature grid");
    }
    if (pair.target_keypoints[i] && !in_grid(*pair.target_keypoints[i], pair.target.grid())) {
      throw InputError("pair " + pair.id + ": target keypoint " + std::to_string(i) +
                       " outside the feature grid");
    }
  }
}

const DenseMap& role_map(const TrainPair& pair, MapRole role) {
  switch (role) {
    case MapRole::source:
      return pair.source;
    case MapRole::target:
      return pair.target;
    case MapRole::source_flipped:
      return *pair.source_flipped;
    case MapRole::target_flipped:
      return *pair.target_flipped;
  }
  return pair.source;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ArgumentError("learning rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw ArgumentError("weight decay must be non-negative");
  if (!(pct_start > 0.0 && pct_start < 1.0)) throw ArgumentError("pct_start must lie in (0, 1)");
  if (!(div_factor > 0.0) || !(final_div_factor > 0.0)) {
    throw ArgumentError("schedule divisors must be positive");
  }
  if (total_steps == 0) throw ArgumentError("total steps must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
  if (!(perturb_std >= 0.0)) throw ArgumentError("perturbation std must be non-negative");
  if (!(temperature > 0.0) || !(contrastive_temperature > 0.0)) {
    throw ArgumentError("temperatures must be positive");
  }
  if (!(weights.original >= 0.0 && weights.double_flip >= 0.0 && weights.single_flip >= 0.0 &&
        weights.self_flip >= 0.0)) {
    throw ArgumentError("augmentation weights must be non-negative");
  }
  if (bottleneck <= 0 || blocks <= 0) {
    throw ArgumentError("post-processor needs a positive bottleneck width and block count");
  }
  if (kernel != 1 && kernel != 3) throw ArgumentError("bottleneck kernel must be 1 or 3");
}

std::string to_string(PairVariant v) {
  switch (v) {
    case PairVariant::original:
      return "original";
    case PairVariant::double_flip:
      return "double_flip";
    case PairVariant::single_flip:
      return "single_flip";
    case PairVariant::self_flip:
      return "self_flip";
  }
  return "unknown";
}

std::vector<AugmentedBatch> augment_pair(const TrainPair& pair, const AugmentWeights& weights,
                                         bool include_flips) {
  check_pair(pair);
  const auto& ks = pair.source_keypoints;
  const auto& kt = pair.target_keypoints;
  const int ws = pair.source.width;
  const int wt = pair.target.width;
  const std::size_t n = ks.size();

  std::vector<AugmentedBatch> out;
  AugmentedBatch original{PairVariant::original, MapRole::source, MapRole::target, {}, {}, {},
                          weights.original};
  for (std::size_t i = 0; i < n; ++i) {
    if (!ks[i] || !kt[i]) continue;
    original.labels.push_back(static_cast<int>(i));
    original.source_points.push_back(*ks[i]);
    original.target_points.push_back(*kt[i]);
  }
  out.push_back(std::move(original));
  if (!include_flips) return out;
  if (!pair.source_flipped) {
    throw InputError("pair " + pair.id + ": missing flipped-image features for the source");
  }
  if (!pair.target_flipped) {
    throw InputError("pair " + pair.id + ": missing flipped-image features for the target");
  }

  AugmentedBatch dbl{PairVariant::double_flip, MapRole::source_flipped, MapRole::target_flipped,
                     {}, {}, {}, weights.double_flip};
  AugmentedBatch single{PairVariant::single_flip, MapRole::source_flipped, MapRole::target,
                        {}, {}, {}, weights.single_flip};
  AugmentedBatch self{PairVariant::self_flip, MapRole::source, MapRole::source_flipped,
                      {}, {}, {}, weights.self_flip};
  for (std::size_t i = 0; i < n; ++i) {
    const int j = flipped_label(pair.flip_map, i);
    const auto& sj = at(ks, j);
    const auto& tj = at(kt, j);
    const int label = static_cast<int>(i);
    if (sj && tj) {
      dbl.labels.push_back(label);
      dbl.source_points.push_back(mirror(*sj, ws));
      dbl.target_points.push_back(mirror(*tj, wt));
    }
    if (sj && kt[i]) {
      single.labels.push_back(label);
      single.source_points.push_back(mirror(*sj, ws));
      single.target_points.push_back(*kt[i]);
    }
    if (ks[i] && sj) {
      self.labels.push_back(label);
      self.source_points.push_back(*ks[i]);
      self.target_points.push_back(mirror(*sj, ws));
    }
  }
  out.push_back(std::move(dbl));
  out.push_back(std::move(single));
  out.push_back(std::move(self));
  return out;
}

std::vector<bool> dropout_mask(int channels, double rate, CounterRng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
  std::vector<bool> keep(static_cast<std::size_t>(channels));
  for (int k = 0; k < channels; ++k) keep[k] = rng.uniform() >= rate;
  return keep;
}

DenseMap apply_dropout(const DenseMap& f, double rate, CounterRng& rng) {
  const auto keep = dropout_mask(f.channels, rate, rng);
  if (rate == 0.0 || std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) {
    return f;
  }
  const double scale = 1.0 / (1.0 - rate);
  DenseMap out = f;
  for (int i = 0; i < out.cells(); ++i) {
    auto c = out.cell(i);
    for (int k = 0; k < out.channels; ++k) c[k] = keep[k] ? c[k] * scale : 0.0;
  }
  return out;
}

LossParts evaluate_objective(PostProcessor& net, const Objective& objective,
                             bool accumulate_grads) {
  const std::size_t m = objective.maps.size();
  std::vector<PostProcessor::Tape> tapes(m);
  std::vector<DenseMap> outputs(m);
  std::vector<DenseMap> grads(m);
  for (std::size_t k = 0; k < m; ++k) {
    outputs[k] = net.forward(objective.maps[k], accumulate_grads ? &tapes[k] : nullptr);
    grads[k] = DenseMap(outputs[k].height, outputs[k].width, outputs[k].channels);
  }
  LossParts total;
  for (const auto& term : objective.terms) {
    LossParts parts;
    const LossGrad lg = total_loss(outputs[term.source], outputs[term.target],
                                   term.source_points, term.target_points,
                                   objective.temperature, objective.contrastive_temperature,
                                   term.noise, &parts);
    total.sparse += term.weight * parts.sparse;
    total.dense += term.weight * parts.dense;
    if (!accumulate_grads) continue;
    auto& gs = grads[term.source].values;
    auto& gt = grads[term.target].values;
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += term.weight * lg.grad_source.values[i];
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += term.weight * lg.grad_target.values[i];
  }
  if (accumulate_grads) {
    for (std::size_t k = 0; k < m; ++k) net.backward(tapes[k], grads[k]);
  }
  return total;
}

Objective make_objective(const TrainPair& pair, const TrainConfig& cfg, CounterRng& rng) {
  const auto batches = augment_pair(pair, cfg.weights, cfg.augment);
  Objective obj;
  obj.temperature = cfg.temperature;
  obj.contrastive_temperature = cfg.contrastive_temperature;
  std::vector<int> slot(4, -1);
  auto map_index = [&](MapRole role) {
    int& s = slot[static_cast<std::size_t>(role)];
    if (s < 0) {
      s = static_cast<int>(obj.maps.size());
      obj.maps.push_back(apply_dropout(role_map(pair, role), cfg.dropout, rng));
    }
    return s;
  };
  for (const auto& b : batches) {
    if (b.labels.size() < 2 || b.weight == 0.0) continue;
    ObjectiveTerm term;
    term.source = map_index(b.source);
    term.target = map_index(b.target);
    term.source_points = b.source_points;
    term.target_points = b.target_points;
    term.noise = draw_perturbation(b.labels.size(), cfg.perturb_std, rng);
    term.weight = b.weight;
    obj.terms.push_back(std::move(term));
  }
  return obj;
}

TrainResult train(std::span<const TrainPair> pairs, const TrainConfig& cfg,
                  std::optional<PostProcessor> initial, const CheckpointHook& on_checkpoint) {
  cfg.validate();
  if (pairs.empty()) throw InputError("training needs at least one pair");
  const int channels = pairs.front().source.channels;
  for (const auto& p : pairs) {
    check_pair(p);
    if (p.source.channels != channels) {
      throw InputError("pair " + p.id + ": channel count differs from the first pair");
    }
    std::size_t visible = 0;
    for (std::size_t i = 0; i < p.source_keypoints.size(); ++i) {
      if (p.source_keypoints[i] && p.target_keypoints[i]) ++visible;
    }
    if (visible < 2) {
      throw InputError("pair " + p.id + ": fewer than two mutually visible keypoints");
    }
  }

  const CounterRng root(cfg.seed);
  TrainResult result;
  if (initial) {
    if (initial->in_channels() != channels || initial->out_channels() != channels) {
      throw ArgumentError("initial post-processor does not match the feature channels");
    }
    result.net = std::move(*initial);
  } else {
    result.net = PostProcessor::bottleneck_stack(channels, cfg.bottleneck, cfg.blocks, cfg.kernel);
    CounterRng init = root.substream("init");
    result.net.initialize(init);
  }
  PostProcessor& net = result.net;

  AdamW opt(net.param_count(), {0.9, 0.999, 1e-8, cfg.weight_decay});
  const OneCycleSchedule schedule(cfg.learning_rate, cfg.total_steps, cfg.pct_start,
                                  cfg.div_factor, cfg.final_div_factor);
  const CounterRng order_root = root.substream("order");
  const CounterRng step_root = root.substream("step");
  std::vector<std::size_t> order(pairs.size());
  result.trace.reserve(cfg.total_steps);

  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    const std::size_t pos = step % pairs.size();
    if (pos == 0) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      CounterRng shuffle = order_root.substream(static_cast<std::uint64_t>(step / pairs.size()));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle.bounded(i)]);
      }
    }
    const TrainPair& pair = pairs[order[pos]];
    const double lr = schedule.lr(step);
    CounterRng rng = step_root.substream(static_cast<std::uint64_t>(step));

    net.zero_grad();
    LossParts parts;
    try {
      const Objective obj = make_objective(pair, cfg, rng);
      parts = evaluate_objective(net, obj, true);
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(step) + ", pair " + pair.id + ": " +
                           e.what());
    }
    const bool finite_grads = std::all_of(net.grads().begin(), net.grads().end(),
                                          [](double g) { return std::isfinite(g); });
    if (!std::isfinite(parts.total()) || !finite_grads) {
      throw NumericalError("non-finite loss at step " + std::to_string(step) + ", pair " +
                           pair.id);
    }
    opt.step(net.params(), net.grads(), lr);
    result.trace.push_back({step, lr, parts.sparse, parts.dense, parts.total()});

    const bool last = step + 1 == cfg.total_steps;
    const bool due = cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0;
    if (on_checkpoint && (last || due)) on_checkpoint(step + 1, net);
  }
  net.zero_grad();
  return result;
}

}  // namespace geomatch
