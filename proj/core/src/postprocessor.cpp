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
#include "geomatch/postprocessor.hpp"

#include <algorithm>
#include <cmath>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

std::size_t layer_params(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv1x1:
      return static_cast<std::size_t>(l.out_channels) * l.in_channels + l.out_channels;
    case LayerKind::conv3x3:
      return static_cast<std::size_t>(9) * l.out_channels * l.in_channels + l.out_channels;
    default:
      return 0;
  }
}

void conv1x1_forward(const DenseMap& in, const double* w, const double* b, int out_c,
                     DenseMap& out) {
  const int in_c = in.channels;
  for (int i = 0; i < in.cells(); ++i) {
    auto x = in.cell(i);
    auto y = out.cell(i);
    for (int o = 0; o < out_c; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in_c;
      double acc = b[o];
      for (int k = 0; k < in_c; ++k) acc += row[k] * x[k];
      y[o] = acc;
    }
  }
}

void conv1x1_backward(const DenseMap& in, const double* w, int out_c, const DenseMap& g_out,
                      DenseMap& g_in, double* gw, double* gb) {
  const int in_c = in.channels;
  for (int i = 0; i < in.cells(); ++i) {
    auto x = in.cell(i);
    auto g = g_out.cell(i);
    auto gx = g_in.cell(i);
    for (int o = 0; o < out_c; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      const double* row = w + static_cast<std::size_t>(o) * in_c;
      double* grow = gw + static_cast<std::size_t>(o) * in_c;
      gb[o] += go;
      for (int k = 0; k < in_c; ++k) {
        grow[k] += go * x[k];
        gx[k] += go * row[k];
      }
    }
  }
}

void conv3x3_forward(const DenseMap& in, const double* w, const double* b, int out_c,
                     DenseMap& out) {
  const int in_c = in.channels;
  const int h = in.height;
  const int wd = in.width;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      auto dst = out.cell(y * wd + x);
      for (int o = 0; o < out_c; ++o) dst[o] = b[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = x + kx - 1;
          if (sx < 0 || sx >= wd) continue;
          auto src = in.cell(sy * wd + sx);
          const double* tap = w + static_cast<std::size_t>(ky * 3 + kx) * out_c * in_c;
          for (int o = 0; o < out_c; ++o) {
            const double* row = tap + static_cast<std::size_t>(o) * in_c;
            double acc = 0.0;
            for (int k = 0; k < in_c; ++k) acc += row[k] * src[k];
            dst[o] += acc;
          }
        }
      }
    }
  }
}

void conv3x3_backward(const DenseMap& in, const double* w, int out_c, const DenseMap& g_out,
                      DenseMap& g_in, double* gw, double* gb) {
  const int in_c = in.channels;
  const int h = in.height;
  const int wd = in.width;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      auto g = g_out.cell(y * wd + x);
      for (int o = 0; o < out_c; ++o) gb[o] += g[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = x + kx - 1;
          if (sx < 0 || sx >= wd) continue;
          auto src = in.cell(sy * wd + sx);
          auto gsrc = g_in.cell(sy * wd + sx);
          const std::size_t tap = static_cast<std::size_t>(ky * 3 + kx) * out_c * in_c;
          for (int o = 0; o < out_c; ++o) {
            const double go = g[o];
            if (go == 0.0) continue;
            const double* row = w + tap + static_cast<std::size_t>(o) * in_c;
            double* grow = gw + tap + static_cast<std::size_t>(o) * in_c;
            for (int k = 0; k < in_c; ++k) {
              grow[k] += go * src[k];
              gsrc[k] += go * row[k];
            }
          }
        }
      }
    }
  }
}

}  // namespace

DenseMap to_dense(const FeatureMap& f) {
  DenseMap d(f.height(), f.width(), f.channels());
  std::copy(f.data().begin(), f.data().end(), d.values.begin());
  return d;
}

FeatureMap to_feature_map(const DenseMap& d, bool normalized) {
  std::vector<float> data(d.values.size());
  std::transform(d.values.begin(), d.values.end(), data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return FeatureMap(d.height, d.width, d.channels, std::move(data), normalized);
}

DenseMap normalize_cells(const DenseMap& in, std::vector<double>* norms) {
  DenseMap out(in.height, in.width, in.channels);
  if (norms) norms->assign(static_cast<std::size_t>(in.cells()), 0.0);
  for (int i = 0; i < in.cells(); ++i) {
    auto x = in.cell(i);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    const double n = std::sqrt(sq);
    if (!(n >= 1e-12)) {
      throw NumericalError("degenerate descriptor at cell " + std::to_string(i) +
                           " of the post-processor output");
    }
    auto y = out.cell(i);
    for (int k = 0; k < in.channels; ++k) y[k] = x[k] / n;
    if (norms) (*norms)[i] = n;
  }
  return out;
}

DenseMap normalize_cells_backward(const DenseMap& normalized,
                                  const std::vector<double>& norms,
                                  const DenseMap& grad_normalized) {
  DenseMap out(normalized.height, normalized.width, normalized.channels);
  for (int i = 0; i < normalized.cells(); ++i) {
    auto y = normalized.cell(i);
    auto g = grad_normalized.cell(i);
    double proj = 0.0;
    for (int k = 0; k < normalized.channels; ++k) proj += y[k] * g[k];
    auto dst = out.cell(i);
    for (int k = 0; k < normalized.channels; ++k) dst[k] = (g[k] - y[k] * proj) / norms[i];
  }
  return out;
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv1x1:
      return "conv1x1";
    case LayerKind::conv3x3:
      return "conv3x3";
    case LayerKind::relu:
      return "relu";
    case LayerKind::residual_add:
      return "residual_add";
  }
  return "unknown";
}

PostProcessor::PostProcessor(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ArgumentError("post-processor needs at least one layer");
  std::vector<int> act_channels{layers_.front().in_channels};
  std::size_t offset = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    const std::string where = "layer " + std::to_string(k) + " (" + to_string(l.kind) + ")";
    if (l.in_channels <= 0 || l.out_channels <= 0) {
      throw ArgumentError(where + ": channel counts must be positive");
    }
    if (l.in_channels != act_channels.back()) {
      throw ArgumentError(where + ": expects " + std::to_string(l.in_channels) +
                          " input channels, previous layer gives " +
                          std::to_string(act_channels.back()));
    }
    if ((l.kind == LayerKind::relu || l.kind == LayerKind::residual_add) &&
        l.in_channels != l.out_channels) {
      throw ArgumentError(where + ": must preserve the channel count");
    }
    if (l.kind == LayerKind::residual_add) {
      if (l.skip < 0 || l.skip > static_cast<int>(k)) {
        throw ArgumentError(where + ": skip must name an earlier activation");
      }
      if (act_channels[l.skip] != l.in_channels) {
        throw ArgumentError(where + ": residual connects unequal channel counts");
      }
    }
    offsets_.push_back(offset);
    offset += layer_params(l);
    act_channels.push_back(l.out_channels);
  }
  params_.assign(offset, 0.0);
  grads_.assign(offset, 0.0);
}

PostProcessor PostProcessor::bottleneck_stack(int channels, int bottleneck, int blocks,
                                              int kernel) {
  if (kernel != 1 && kernel != 3) throw ArgumentError("bottleneck kernel must be 1 or 3");
  std::vector<LayerSpec> layers;
  for (int b = 0; b < blocks; ++b) {
    const int block_input = static_cast<int>(layers.size());
    layers.push_back({LayerKind::conv1x1, channels, bottleneck});
    layers.push_back({LayerKind::relu, bottleneck, bottleneck});
    layers.push_back({kernel == 3 ? LayerKind::conv3x3 : LayerKind::conv1x1, bottleneck, bottleneck});
    layers.push_back({LayerKind::relu, bottleneck, bottleneck});
    layers.push_back({LayerKind::conv1x1, bottleneck, channels});
    layers.push_back({LayerKind::residual_add, channels, channels, block_input});
  }
  return PostProcessor(std::move(layers));
}

PostProcessor PostProcessor::identity(int channels) {
  PostProcessor net({{LayerKind::conv1x1, channels, channels}});
  for (int k = 0; k < channels; ++k) {
    net.params_[static_cast<std::size_t>(k) * channels + k] = 1.0;
  }
  return net;
}

void PostProcessor::initialize(CounterRng& rng, bool zero_expand) {
  std::fill(params_.begin(), params_.end(), 0.0);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.kind != LayerKind::conv1x1 && l.kind != LayerKind::conv3x3) continue;
    const bool feeds_residual = k + 1 < layers_.size() &&
                                layers_[k + 1].kind == LayerKind::residual_add;
    if (zero_expand && feeds_residual) continue;
    const int taps = l.kind == LayerKind::conv3x3 ? 9 : 1;
    const double bound = 1.0 / std::sqrt(static_cast<double>(taps * l.in_channels));
    const std::size_t n = static_cast<std::size_t>(taps) * l.in_channels * l.out_channels;
    for (std::size_t i = 0; i < n; ++i) {
      params_[offsets_[k] + i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
}

int PostProcessor::in_channels() const {
  return layers_.empty() ? 0 : layers_.front().in_channels;
}

int PostProcessor::out_channels() const {
  return layers_.empty() ? 0 : layers_.back().out_channels;
}

void PostProcessor::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

DenseMap PostProcessor::forward(const DenseMap& input, Tape* tape) const {
  if (input.channels != in_channels()) {
    throw ArgumentError("post-processor expects " + std::to_string(in_channels()) +
                        " channels, got " + std::to_string(input.channels));
  }
  std::vector<DenseMap> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(input);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    const DenseMap& x = acts.back();
    DenseMap y(x.height, x.width, l.out_channels);
    const double* w = params_.data() + offsets_[k];
    switch (l.kind) {
      case LayerKind::conv1x1:
        conv1x1_forward(x, w, w + static_cast<std::size_t>(l.out_channels) * l.in_channels,
                        l.out_channels, y);
        break;
      case LayerKind::conv3x3:
        conv3x3_forward(x, w, w + static_cast<std::size_t>(9) * l.out_channels * l.in_channels,
                        l.out_channels, y);
        break;
      case LayerKind::relu:
        for (std::size_t i = 0; i < y.values.size(); ++i) {
          y.values[i] = std::max(0.0, x.values[i]);
        }
        break;
      case LayerKind::residual_add: {
        const DenseMap& s = acts[l.skip];
        for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] = x.values[i] + s.values[i];
        break;
      }
    }
    acts.push_back(std::move(y));
  }
  std::vector<double> norms;
  DenseMap out = normalize_cells(acts.back(), &norms);
  if (tape) {
    tape->activations = std::move(acts);
    tape->norms = std::move(norms);
    tape->output = out;
  }
  return out;
}

void PostProcessor::backward(const Tape& tape, const DenseMap& grad_output) {
  const auto& acts = tape.activations;
  std::vector<DenseMap> g(acts.size());
  for (std::size_t i = 0; i < acts.size(); ++i) {
    g[i] = DenseMap(acts[i].height, acts[i].width, acts[i].channels);
  }
  g.back() = normalize_cells_backward(tape.output, tape.norms, grad_output);
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    const DenseMap& gy = g[k + 1];
    DenseMap& gx = g[k];
    const double* w = params_.data() + offsets_[k];
    double* gw = grads_.data() + offsets_[k];
    switch (l.kind) {
      case LayerKind::conv1x1: {
        const std::size_t nw = static_cast<std::size_t>(l.out_channels) * l.in_channels;
        conv1x1_backward(acts[k], w, l.out_channels, gy, gx, gw, gw + nw);
        break;
      }
      case LayerKind::conv3x3: {
        const std::size_t nw = static_cast<std::size_t>(9) * l.out_channels * l.in_channels;
        conv3x3_backward(acts[k], w, l.out_channels, gy, gx, gw, gw + nw);
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < gy.values.size(); ++i) {
          if (acts[k].values[i] > 0.0) gx.values[i] += gy.values[i];
        }
        break;
      case LayerKind::residual_add:
        for (std::size_t i = 0; i < gy.values.size(); ++i) {
          gx.values[i] += gy.values[i];
          g[l.skip].values[i] += gy.values[i];
        }
        break;
    }
  }
}

FeatureMap postprocess(const PostProcessor& net, const FeatureMap& f) {
  return to_feature_map(net.forward(to_dense(f)), true);
}

}  // namespace geomatch
