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

// Dense feature grids, instance masks, and the coordinate conventions shared
// by every other module.
//
// Grid coordinates put cell centers on integers: cell (x, y) covers
// [x - 0.5, x + 0.5] x [y - 0.5, y + 0.5]. Image coordinates are pixels with
// the origin at the top-left, x to the right and y downward.

#include <cstdint>
#include <span>
#include <vector>

namespace geomatch {

struct GridPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct GridSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const GridSize&, const GridSize&) = default;
};

/// H x W x C descriptor grid stored row-major (y, then x, then channel).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels);
  FeatureMap(int height, int width, int channels, std::vector<float> data,
             bool normalized = false);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  int cells() const { return height_ * width_; }
  GridSize grid() const { return {width_, height_}; }
  bool normalized() const { return normalized_; }
  bool empty() const { return data_.empty(); }

  std::span<const float> at(int y, int x) const;
  std::span<const float> cell(int index) const;
  // Mutable access clears the normalized flag.
  std::span<float> at(int y, int x);

  const std::vector<float>& data() const { return data_; }
  std::span<float> mutable_data();

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
  bool normalized_ = false;
};

/// Binary foreground mask at feature-grid resolution.
class InstanceMask {
 public:
  InstanceMask() = default;
  InstanceMask(int height, int width, bool fill = false);
  InstanceMask(int height, int width, std::vector<std::uint8_t> bits);

  int height() const { return height_; }
  int width() const { return width_; }
  GridSize grid() const { return {width_, height_}; }
  bool at(int y, int x) const { return bits_[index(y, x)] != 0; }
  void set(int y, int x, bool value) { bits_[index(y, x)] = value ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;

 private:
  std::size_t index(int y, int x) const;

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class SampleMode { bilinear, nearest };

/// Unit-normalizes every location. Throws NumericalError("degenerate
/// descriptor ...") for a location with norm below 1e-12.
FeatureMap l2_normalize(const FeatureMap& f);

FeatureMap flip_horizontal(const FeatureMap& f);
InstanceMask flip_horizontal(const InstanceMask& m);

/// Counter-clockwise rotation by 90 degrees per quarter turn.
/// Throws ArgumentError unless quarter_turns is in [0, 3].
FeatureMap rotate90(const FeatureMap& f, int quarter_turns);
InstanceMask rotate90(const InstanceMask& m, int quarter_turns);

// Where a grid point lands after the same transforms; `grid` is the size of
// the untransformed grid.
GridPoint flip_point(GridPoint p, GridSize grid);
GridPoint rotate_point(GridPoint p, GridSize grid, int quarter_turns);

GridPoint image_to_grid(ImagePoint p, ImageSize image, GridSize grid);
ImagePoint grid_to_image(GridPoint p, ImageSize image, GridSize grid);

bool in_grid(GridPoint p, GridSize grid);

/// Descriptor at a sub-cell location. Bilinear sampling clamps at the border
/// and re-normalizes when the map is normalized; integer locations return the
/// stored cell unchanged. Throws ArgumentError outside the grid.
std::vector<float> sample_descriptor(const FeatureMap& f, GridPoint p,
                                     SampleMode mode = SampleMode::bilinear);

}  // namespace geomatch
