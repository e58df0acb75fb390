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
#include "geomatch/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

constexpr double kDegenerateNorm = 1e-12;

void check_dims(int height, int width, int channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw ArgumentError("feature map dimensions must be non-negative");
  }
}

int check_turns(int quarter_turns) {
  if (quarter_turns < 0 || quarter_turns > 3) {
    throw ArgumentError("quarter_turns must be in [0, 3], got " +
                        std::to_string(quarter_turns));
  }
  return quarter_turns;
}

// Source location (in the input grid) feeding output cell (y, x) after a
// counter-clockwise rotation. Output dims are (w, h) for odd turns.
std::pair<int, int> rotated_source(int y, int x, int h, int w, int turns) {
  switch (turns) {
    case 1:  // out(y, x) = in(x, w - 1 - y)
      return {x, w - 1 - y};
    case 2:
      return {h - 1 - y, w - 1 - x};
    case 3:  // out(y, x) = in(h - 1 - x, y)
      return {h - 1 - x, y};
    default:
      return {y, x};
  }
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
}

FeatureMap::FeatureMap(int height, int width, int channels,
                       std::vector<float> data, bool normalized)
    : height_(height),
      width_(width),
      channels_(channels),
      data_(std::move(data)),
      normalized_(normalized) {
  check_dims(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw ArgumentError("feature map data length " +
                        std::to_string(data_.size()) + " does not match " +
                        std::to_string(height) + "x" + std::to_string(width) +
                        "x" + std::to_string(channels));
  }
}

std::span<const float> FeatureMap::at(int y, int x) const {
  return cell(y * width_ + x);
}

std::span<const float> FeatureMap::cell(int index) const {
  return {data_.data() + static_cast<std::size_t>(index) * channels_,
          static_cast<std::size_t>(channels_)};
}

std::span<float> FeatureMap::at(int y, int x) {
  normalized_ = false;
  return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_,
          static_cast<std::size_t>(channels_)};
}

std::span<float> FeatureMap::mutable_data() {
  normalized_ = false;
  return data_;
}

InstanceMask::InstanceMask(int height, int width, bool fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) {
    throw ArgumentError("mask dimensions must be non-negative");
  }
  bits_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

InstanceMask::InstanceMask(int height, int width,
                           std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (bits_.size() != static_cast<std::size_t>(height) * width) {
    throw ArgumentError("mask length does not match its dimensions");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t InstanceMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::size_t InstanceMask::index(int y, int x) const {
  return static_cast<std::size_t>(y) * width_ + x;
}

FeatureMap l2_normalize(const FeatureMap& f) {
  std::vector<float> out(f.data().size());
  const int c = f.channels();
  for (int i = 0; i < f.cells(); ++i) {
    auto v = f.cell(i);
    double sq = 0.0;
    for (float e : v) sq += static_cast<double>(e) * e;
    const double norm = std::sqrt(sq);
    if (!(norm >= kDegenerateNorm)) {
      throw NumericalError("degenerate descriptor at cell (" +
                           std::to_string(i / f.width()) + ", " +
                           std::to_string(i % f.width()) + ")");
    }
    for (int k = 0; k < c; ++k) {
      out[static_cast<std::size_t>(i) * c + k] =
          static_cast<float>(static_cast<double>(v[k]) / norm);
    }
  }
  return FeatureMap(f.height(), f.width(), c, std::move(out), true);
}

FeatureMap flip_horizontal(const FeatureMap& f) {
  std::vector<float> out(f.data().size());
  const int w = f.width();
  const int c = f.channels();
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      auto src = f.at(y, w - 1 - x);
      std::copy(src.begin(), src.end(),
                out.begin() + (static_cast<std::ptrdiff_t>(y) * w + x) * c);
    }
  }
  return FeatureMap(f.height(), w, c, std::move(out), f.normalized());
}

InstanceMask flip_horizontal(const InstanceMask& m) {
  InstanceMask out(m.height(), m.width());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      out.set(y, x, m.at(y, m.width() - 1 - x));
    }
  }
  return out;
}

FeatureMap rotate90(const FeatureMap& f, int quarter_turns) {
  const int turns = check_turns(quarter_turns);
  const int h = f.height();
  const int w = f.width();
  const int c = f.channels();
  const bool odd = turns % 2 == 1;
  const int oh = odd ? w : h;
  const int ow = odd ? h : w;
  std::vector<float> out(f.data().size());
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      auto [sy, sx] = rotated_source(y, x, h, w, turns);
      auto src = f.at(sy, sx);
      std::copy(src.begin(), src.end(),
                out.begin() + (static_cast<std::ptrdiff_t>(y) * ow + x) * c);
    }
  }
  return FeatureMap(oh, ow, c, std::move(out), f.normalized());
}

InstanceMask rotate90(const InstanceMask& m, int quarter_turns) {
  const int turns = check_turns(quarter_turns);
  const int h = m.height();
  const int w = m.width();
  const bool odd = turns % 2 == 1;
  InstanceMask out(odd ? w : h, odd ? h : w);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      auto [sy, sx] = rotated_source(y, x, h, w, turns);
      out.set(y, x, m.at(sy, sx));
    }
  }
  return out;
}

GridPoint flip_point(GridPoint p, GridSize grid) {
  return {grid.width - 1 - p.x, p.y};
}

GridPoint rotate_point(GridPoint p, GridSize grid, int quarter_turns) {
  const int turns = check_turns(quarter_turns);
  const double w = grid.width;
  const double h = grid.height;
  switch (turns) {
    case 1:
      return {p.y, w - 1 - p.x};
    case 2:
      return {w - 1 - p.x, h - 1 - p.y};
    case 3:
      return {h - 1 - p.y, p.x};
    default:
      return p;
  }
}

GridPoint image_to_grid(ImagePoint p, ImageSize image, GridSize grid) {
  return {(p.x + 0.5) * grid.width / image.width - 0.5,
          (p.y + 0.5) * grid.height / image.height - 0.5};
}

ImagePoint grid_to_image(GridPoint p, ImageSize image, GridSize grid) {
  return {(p.x + 0.5) * image.width / grid.width - 0.5,
          (p.y + 0.5) * image.height / grid.height - 0.5};
}

bool in_grid(GridPoint p, GridSize grid) {
  return p.x >= -0.5 && p.x <= grid.width - 0.5 && p.y >= -0.5 &&
         p.y <= grid.height - 0.5;
}

std::vector<float> sample_descriptor(const FeatureMap& f, GridPoint p,
                                     SampleMode mode) {
  if (!in_grid(p, f.grid()) || f.cells() == 0) {
    throw ArgumentError("sample point (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ") lies outside the " +
                        std::to_string(f.width()) + "x" +
                        std::to_string(f.height()) + " grid");
  }
  const int w = f.width();
  const int h = f.height();
  auto clamp_x = [w](long v) { return static_cast<int>(std::clamp(v, 0L, w - 1L)); };
  auto clamp_y = [h](long v) { return static_cast<int>(std::clamp(v, 0L, h - 1L)); };

  if (mode == SampleMode::nearest) {
    auto v = f.at(clamp_y(std::lround(p.y)), clamp_x(std::lround(p.x)));
    return {v.begin(), v.end()};
  }

  const double fx0 = std::floor(p.x);
  const double fy0 = std::floor(p.y);
  if (fx0 == p.x && fy0 == p.y) {
    auto v = f.at(static_cast<int>(fy0), static_cast<int>(fx0));
    return {v.begin(), v.end()};
  }
  const double ax = p.x - fx0;
  const double ay = p.y - fy0;
  const long x0 = static_cast<long>(fx0);
  const long y0 = static_cast<long>(fy0);
  auto c00 = f.at(clamp_y(y0), clamp_x(x0));
  auto c01 = f.at(clamp_y(y0), clamp_x(x0 + 1));
  auto c10 = f.at(clamp_y(y0 + 1), clamp_x(x0));
  auto c11 = f.at(clamp_y(y0 + 1), clamp_x(x0 + 1));
  const double w00 = (1 - ax) * (1 - ay);
  const double w01 = ax * (1 - ay);
  const double w10 = (1 - ax) * ay;
  const double w11 = ax * ay;

  const int c = f.channels();
  std::vector<double> acc(c);
  double sq = 0.0;
  for (int k = 0; k < c; ++k) {
    acc[k] = w00 * c00[k] + w01 * c01[k] + w10 * c10[k] + w11 * c11[k];
    sq += acc[k] * acc[k];
  }
  double scale = 1.0;
  if (f.normalized()) {
    const double norm = std::sqrt(sq);
    if (!(norm >= kDegenerateNorm)) {
      throw NumericalError("degenerate descriptor after interpolation");
    }
    scale = 1.0 / norm;
  }
  std::vector<float> out(c);
  for (int k = 0; k < c; ++k) out[k] = static_cast<float>(acc[k] * scale);
  return out;
}

}  // namespace geomatch
