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

// Portable counter-based random stream.
//
// Output n of a stream with key k is splitmix64_mix(k + (n + 1) * golden),
// i.e. SplitMix64 evaluated at an explicit counter. Substreams derive their
// key from the parent key and a name, so independent consumers (one per
// species, one per training pair) never share state and the sequence is the
// same on every platform and compiler.

#include <cstdint>
#include <string_view>

namespace geomatch {

std::uint64_t splitmix64_mix(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view bytes);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t bounded(std::uint64_t n);
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal();

  CounterRng substream(std::string_view name) const;
  CounterRng substream(std::uint64_t index) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace geomatch
