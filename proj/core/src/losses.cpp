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
#include "geomatch/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

void check_maps(const DenseMap& src, const DenseMap& tgt, std::size_t ns, std::size_t nt) {
  if (src.channels != tgt.channels) {
    throw ArgumentError("source and target maps differ in channel count");
  }
  if (ns != nt) throw ArgumentError("keypoint lists differ in length");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

SampledDescriptor sample_dense(const DenseMap& map, GridPoint p) {
  if (!in_grid(p, map.grid())) {
    throw ArgumentError("keypoint (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") lies outside the feature grid");
  }
  const double fx = std::floor(p.x);
  const double fy = std::floor(p.y);
  const double ax = p.x - fx;
  const double ay = p.y - fy;
  auto cx = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, map.width - 1.0)); };
  auto cy = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, map.height - 1.0)); };
  SampledDescriptor d;
  d.cells[0] = cy(fy) * map.width + cx(fx);
  d.cells[1] = cy(fy) * map.width + cx(fx + 1);
  d.cells[2] = cy(fy + 1) * map.width + cx(fx);
  d.cells[3] = cy(fy + 1) * map.width + cx(fx + 1);
  d.weights[0] = (1 - ax) * (1 - ay);
  d.weights[1] = ax * (1 - ay);
  d.weights[2] = (1 - ax) * ay;
  d.weights[3] = ax * ay;
  std::vector<double> v(static_cast<std::size_t>(map.channels), 0.0);
  for (int c = 0; c < 4; ++c) {
    auto cell = map.cell(d.cells[c]);
    for (int k = 0; k < map.channels; ++k) v[k] += d.weights[c] * cell[k];
  }
  d.norm = std::sqrt(dot(v, v));
  if (!(d.norm >= 1e-12)) throw NumericalError("degenerate interpolated descriptor");
  for (double& e : v) e /= d.norm;
  d.unit = std::move(v);
  return d;
}

void sample_dense_backward(const SampledDescriptor& d, std::span<const double> grad_unit,
                           DenseMap& grad_map) {
  const double proj = dot(d.unit, grad_unit);
  for (int c = 0; c < 4; ++c) {
    if (d.weights[c] == 0.0) continue;
    auto g = grad_map.cell(d.cells[c]);
    for (std::size_t k = 0; k < d.unit.size(); ++k) {
      g[k] += d.weights[c] * (grad_unit[k] - d.unit[k] * proj) / d.norm;
    }
  }
}

LossGrad loss_sparse(const DenseMap& src, const DenseMap& tgt,
                     std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                     double temperature) {
  check_maps(src, tgt, kps_src.size(), kps_tgt.size());
  const std::size_t n = kps_src.size();
  if (n < 2) throw ArgumentError("contrastive loss needs at least two keypoint pairs");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");

  std::vector<SampledDescriptor> a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(sample_dense(src, kps_src[i]));
    b.push_back(sample_dense(tgt, kps_tgt[i]));
  }
  std::vector<double> logits(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) logits[i * n + j] = dot(a[i].unit, b[j].unit) / temperature;
  }

  // dz accumulates dLoss/dlogit from both directions
  std::vector<double> dz(n * n, 0.0);
  double loss = 0.0;
  const double scale = 0.5 / static_cast<double>(n);
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t r = 0; r < n; ++r) {
      auto z = [&](std::size_t c) { return dir == 0 ? logits[r * n + c] : logits[c * n + r]; };
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n; ++c) peak = std::max(peak, z(c));
      double total = 0.0;
      for (std::size_t c = 0; c < n; ++c) total += std::exp(z(c) - peak);
      const double lse = peak + std::log(total);
      loss += scale * (lse - z(r));
      for (std::size_t c = 0; c < n; ++c) {
        const double p = std::exp(z(c) - lse) - (c == r ? 1.0 : 0.0);
        (dir == 0 ? dz[r * n + c] : dz[c * n + r]) += scale * p;
      }
    }
  }

  LossGrad out{loss, DenseMap(src.height, src.width, src.channels),
               DenseMap(tgt.height, tgt.width, tgt.channels)};
  const int c = src.channels;
  std::vector<double> ga(static_cast<std::size_t>(c)), gb(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(ga.begin(), ga.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double row = dz[i * n + j] / temperature;  // d/da_i via b_j
      const double col = dz[j * n + i] / temperature;  // d/db_i via a_j
      for (int k = 0; k < c; ++k) {
        ga[k] += row * b[j].unit[k];
        gb[k] += col * a[j].unit[k];
      }
    }
    sample_dense_backward(a[i], ga, out.grad_source);
    sample_dense_backward(b[i], gb, out.grad_target);
  }
  return out;
}

LossGrad loss_dense(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, std::span<const GridPoint> noise) {
  check_maps(src, tgt, kps_src.size(), kps_tgt.size());
  if (kps_src.empty()) throw ArgumentError("dense loss needs at least one keypoint pair");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  if (!noise.empty() && noise.size() != kps_src.size()) {
    throw ArgumentError("perturbation count differs from keypoint count");
  }
  LossGrad out{0.0, DenseMap(src.height, src.width, src.channels),
               DenseMap(tgt.height, tgt.width, tgt.channels)};
  const int cells = tgt.cells();
  const int c = tgt.channels;
  std::vector<double> sim(static_cast<std::size_t>(cells));
  std::vector<double> w(static_cast<std::size_t>(cells));
  std::vector<double> ga(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < kps_src.size(); ++i) {
    const SampledDescriptor a = sample_dense(src, kps_src[i]);
    double peak = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < cells; ++q) {
      sim[q] = dot(a.unit, tgt.cell(q));
      peak = std::max(peak, sim[q]);
    }
    double total = 0.0;
    for (int q = 0; q < cells; ++q) {
      w[q] = std::exp((sim[q] - peak) / temperature);
      total += w[q];
    }
    double px = 0.0;
    double py = 0.0;
    for (int q = 0; q < cells; ++q) {
      w[q] /= total;
      px += w[q] * (q % tgt.width);
      py += w[q] * (q / tgt.width);
    }
    double gx = kps_tgt[i].x;
    double gy = kps_tgt[i].y;
    if (!noise.empty()) {
      gx += noise[i].x;
      gy += noise[i].y;
    }
    const double rx = px - gx;
    const double ry = py - gy;
    const double dist = std::hypot(rx, ry);
    out.value += dist;
    if (dist == 0.0) continue;  // subgradient 0 at the kink
    const double ux = rx / dist;
    const double uy = ry / dist;
    std::fill(ga.begin(), ga.end(), 0.0);
    for (int q = 0; q < cells; ++q) {
      const double ds = w[q] * (((q % tgt.width) - px) * ux + ((q / tgt.width) - py) * uy) /
                        temperature;
      if (ds == 0.0) continue;
      auto t = tgt.cell(q);
      auto gt = out.grad_target.cell(q);
      for (int k = 0; k < c; ++k) {
        ga[k] += ds * t[k];
        gt[k] += ds * a.unit[k];
      }
    }
    sample_dense_backward(a, ga, out.grad_source);
  }
  return out;
}

std::vector<GridPoint> draw_perturbation(std::size_t n, double std_cells, CounterRng& rng) {
  std::vector<GridPoint> out(n);
  if (std_cells <= 0.0) return out;
  for (auto& p : out) {
    p.x = std_cells * rng.normal();
    p.y = std_cells * rng.normal();
  }
  return out;
}

LossGrad loss_dense(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, double perturb_std, CounterRng& rng) {
  const auto noise = draw_perturbation(kps_src.size(), perturb_std, rng);
  return loss_dense(src, tgt, kps_src, kps_tgt, temperature, noise);
}

LossGrad total_loss(const DenseMap& src, const DenseMap& tgt,
                    std::span<const GridPoint> kps_src, std::span<const GridPoint> kps_tgt,
                    double temperature, double contrastive_temperature,
                    std::span<const GridPoint> noise, LossParts* parts) {
  LossGrad dense = loss_dense(src, tgt, kps_src, kps_tgt, temperature, noise);
  LossGrad sparse = loss_sparse(src, tgt, kps_src, kps_tgt, contrastive_temperature);
  if (parts) {
    parts->dense = dense.value;
    parts->sparse = sparse.value;
  }
  for (std::size_t i = 0; i < dense.grad_source.values.size(); ++i) {
    dense.grad_source.values[i] += sparse.grad_source.values[i];
  }
  for (std::size_t i = 0; i < dense.grad_target.values.size(); ++i) {
    dense.grad_target.values[i] += sparse.grad_target.values[i];
  }
  dense.value += sparse.value;
  return dense;
}

}  // namespace geomatch
