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

// Central finite-difference validation of analytic gradients.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "geomatch/rng.hpp"
#include "geomatch/train.hpp"

namespace geomatch {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;  // samples whose +-h step crossed a ReLU kink
};

/// Compares `analytic` against (f(p + h e_i) - f(p - h e_i)) / 2h over
/// min(samples, n) distinct indices drawn from `rng` (all indices when
/// samples >= n). Relative error uses max(|analytic|, |numeric|, 1e-8).
/// `params` is perturbed in place and restored.
GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& f,
                                  std::span<double> params, std::span<const double> analytic,
                                  double h, std::size_t samples, CounterRng& rng);

/// As above, but an index is skipped and another drawn when `kinked(i)`
/// reports that the +-h probe of parameter i is not differentiable.
GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& f,
                                  std::span<double> params, std::span<const double> analytic,
                                  double h, std::size_t samples, CounterRng& rng,
                                  const std::function<bool(std::size_t)>& kinked);

/// Sign pattern of every ReLU input over all maps of the objective.
std::vector<bool> relu_pattern(const PostProcessor& net, const Objective& objective);

/// Gradient check of evaluate_objective with respect to the network
/// parameters. The objective is fixed (Dropout and noise already drawn).
/// Probes that flip any ReLU sign are skipped: the loss is not
/// differentiable along them and a difference quotient measures nothing.
GradCheckResult finite_diff_check(PostProcessor& net, const Objective& objective, double h,
                                  std::size_t samples, CounterRng& rng);

}  // namespace geomatch
