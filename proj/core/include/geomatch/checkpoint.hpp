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

// Binary post-processor checkpoints and the CSV loss trace.
//
// Layout (little-endian): "GEOMCKPT", u32 version, u32 layer count, then per
// layer u32 kind, u32 in, u32 out, i32 skip; then u64 parameter count and the
// parameters as float32.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "geomatch/postprocessor.hpp"
#include "geomatch/train.hpp"

namespace geomatch {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const PostProcessor& net);
/// Throws InputError on a malformed or truncated buffer.
PostProcessor parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const PostProcessor& net);
PostProcessor load_checkpoint(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
void save_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows);

}  // namespace geomatch
