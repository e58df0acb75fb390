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

// NPY v1.0 reader/writer restricted to little-endian float32 C-order arrays.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "geomatch/tensor.hpp"

namespace geomatch::npy {

struct Array {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

/// Parses an in-memory NPY file. Throws InputError on anything other than
/// version 1.0, descr '<f4' and fortran_order False.
Array parse(const std::string& bytes);
std::string serialize(const Array& array);

Array read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Array& array);

/// (H, W, C) array. The normalized flag is inferred: set when every location
/// already has unit norm within 1e-5.
FeatureMap load_feature_map(const std::filesystem::path& path);
void save_feature_map(const std::filesystem::path& path, const FeatureMap& f);

/// (H, W) array; nonzero entries are foreground.
InstanceMask load_mask(const std::filesystem::path& path);
void save_mask(const std::filesystem::path& path, const InstanceMask& m);

}  // namespace geomatch::npy
