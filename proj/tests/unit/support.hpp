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

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "geomatch/geoware.hpp"
#include "geomatch/matcher.hpp"
#include "geomatch/postprocessor.hpp"
#include "geomatch/rng.hpp"
#include "geomatch/tensor.hpp"

namespace geomatch::test {

inline FeatureMap random_features(int h, int w, int c, CounterRng& rng, bool normalize = true) {
  FeatureMap f(h, w, c);
  for (float& v : f.mutable_data()) v = static_cast<float>(rng.normal());
  return normalize ? l2_normalize(f) : f;
}

inline DenseMap random_dense(int h, int w, int c, CounterRng& rng, double scale = 1.0) {
  DenseMap d(h, w, c);
  for (double& v : d.values) v = scale * rng.normal();
  return d;
}

inline SimilarityMap random_similarity(int h, int w, CounterRng& rng) {
  SimilarityMap s{h, w, std::vector<double>(static_cast<std::size_t>(h) * w)};
  for (double& v : s.values) v = 2.0 * rng.uniform() - 1.0;
  return s;
}

inline KeypointSet random_keypoints(int n, ImageSize image, CounterRng& rng,
                                    double visibility = 0.8, bool with_bbox = true) {
  KeypointSet set;
  set.image = image;
  for (int i = 0; i < n; ++i) {
    Keypoint k;
    k.position = {rng.uniform() * (image.width - 1), rng.uniform() * (image.height - 1)};
    k.visible = rng.uniform() < visibility;
    set.points.push_back(k);
  }
  if (with_bbox) {
    const double x0 = rng.uniform() * image.width * 0.3;
    const double y0 = rng.uniform() * image.height * 0.3;
    set.bbox = BoundingBox{x0, y0, image.width * 0.6, image.height * 0.6};
  }
  return set;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("geomatch_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace geomatch::test
