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

// Trainable refinement network applied to raw feature maps, with a hand-written
// reverse pass. All trainer arithmetic is 64-bit.

#include <span>
#include <string>
#include <vector>

#include "geomatch/rng.hpp"
#include "geomatch/tensor.hpp"

namespace geomatch {

/// 64-bit H x W x C grid used inside the trainer.
struct DenseMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  DenseMap() = default;
  DenseMap(int h, int w, int c)
      : height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, 0.0) {}

  int cells() const { return height * width; }
  GridSize grid() const { return {width, height}; }
  std::span<const double> cell(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<double> cell(int i) {
    return {values.data() + static_cast<std::size_t>(i) * channels,
            static_cast<std::size_t>(channels)};
  }
};

DenseMap to_dense(const FeatureMap& f);
FeatureMap to_feature_map(const DenseMap& d, bool normalized);

/// Per-location unit normalization; `norms` receives the pre-normalization
/// lengths. Throws NumericalError on a degenerate location.
DenseMap normalize_cells(const DenseMap& in, std::vector<double>* norms = nullptr);
/// Reverse of normalize_cells given its output and the recorded norms.
DenseMap normalize_cells_backward(const DenseMap& normalized,
                                  const std::vector<double>& norms,
                                  const DenseMap& grad_normalized);

enum class LayerKind { conv1x1, conv3x3, relu, residual_add };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::conv1x1;
  int in_channels = 0;
  int out_channels = 0;
  // residual_add only: activation added to the running tensor, where
  // activation 0 is the network input and activation k + 1 the output of
  // layer k.
  int skip = -1;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Layer stack plus flat parameter and gradient vectors.
///
/// Parameter layout per layer: conv1x1 weights [out][in] then bias [out];
/// conv3x3 weights [ky][kx][out][in] then bias [out]. Convolutions use zero
/// padding and stride 1.
class PostProcessor {
 public:
  PostProcessor() = default;
  /// Throws ArgumentError when shapes do not compose.
  explicit PostProcessor(std::vector<LayerSpec> layers);

  /// `blocks` residual bottlenecks: 1x1 reduce, relu, kxk (k = 1 or 3), relu,
  /// 1x1 expand, residual add.
  static PostProcessor bottleneck_stack(int channels, int bottleneck, int blocks, int kernel = 3);
  /// A single 1x1 convolution with identity weights and zero bias.
  static PostProcessor identity(int channels);

  /// Fan-in scaled uniform weights and zero biases. With zero_expand, the
  /// convolution feeding each residual add starts at zero so every block is
  /// an exact identity at step 0.
  void initialize(CounterRng& rng, bool zero_expand = true);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int in_channels() const;
  int out_channels() const;
  std::size_t param_count() const { return params_.size(); }
  std::size_t param_offset(std::size_t layer) const { return offsets_[layer]; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }
  void zero_grad();

  struct Tape {
    std::vector<DenseMap> activations;  // input, then one per layer
    std::vector<double> norms;
    DenseMap output;                    // normalized
  };

  /// Forward pass followed by per-location normalization.
  DenseMap forward(const DenseMap& input, Tape* tape = nullptr) const;
  /// Accumulates parameter gradients given dLoss/d(normalized output).
  void backward(const Tape& tape, const DenseMap& grad_output);

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::vector<double> grads_;
};

/// Applies the network to a float map; output is normalized.
FeatureMap postprocess(const PostProcessor& net, const FeatureMap& f);

}  // namespace geomatch
