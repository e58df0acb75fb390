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

// Training objectives over post-processed (unit-normalized) feature maps.
// Each returns the loss value and its gradient with respect to both maps.

#include <span>
#include <vector>

#include "geomatch/postprocessor.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {

struct LossGrad {
  double value = 0.0;
  DenseMap grad_source;
  DenseMap grad_target;
};

/// Bilinear descriptor at a grid point (border clamped), re-normalized.
struct SampledDescriptor {
  int cells[4] = {0, 0, 0, 0};
  double weights[4] = {0, 0, 0, 0};
  double norm = 0.0;
  std::vector<double> unit;
};

SampledDescriptor sample_dense(const DenseMap& map, GridPoint p);
/// Scatters dLoss/d(unit) back onto the map cells.
void sample_dense_backward(const SampledDescriptor& d, std::span<const double> grad_unit,
                           DenseMap& grad_map);

/// Symmetric cross-entropy over the n x n cosine matrix between source and
/// target keypoint descriptors, identity pairing as labels, both directions
/// averaged. Throws ArgumentError for fewer than two pairs.
LossGrad loss_sparse(const DenseMap& src, const DenseMap& tgt,
                     std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                     double temperature);

/// Sum over keypoints of the L2 distance between the global soft argmax of the
/// keypoint's similarity map and the perturbed target location
/// kps_tgt[i] + noise[i]. `noise` may be empty (no perturbation).
LossGrad loss_dense(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, std::span<const GridPoint> noise = {});

/// Gaussian ground-truth perturbation, std in grid cells; x then y per point.
std::vector<GridPoint> draw_perturbation(std::size_t n, double std_cells, CounterRng& rng);

/// loss_dense with freshly drawn perturbation.
LossGrad loss_dense(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, double perturb_std, CounterRng& rng);

struct LossParts {
  double sparse = 0.0;
  double dense = 0.0;
  double total() const { return sparse + dense; }
};

/// Unweighted sum of both objectives with summed gradients.
LossGrad total_loss(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, double contrastive_temperature,
                    std::span<const GridPoint> noise, LossParts* parts = nullptr);

}  // namespace geomatch
