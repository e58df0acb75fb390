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

#include <cstddef>
#include <functional>

namespace geomatch {

/// Worker count: GEOMATCH_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t thread_limit();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = thread_limit()).
/// Items are claimed dynamically; callers write results into per-index slots so
/// the output never depends on scheduling. When items throw, the exception of
/// the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace geomatch
