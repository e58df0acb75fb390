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
#include "geomatch/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "geomatch/error.hpp"

namespace geomatch {

GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& f,
                                  std::span<double> params, std::span<const double> analytic,
                                  double h, std::size_t samples, CounterRng& rng,
                                  const std::function<bool(std::size_t)>& kinked) {
  if (params.size() != analytic.size()) {
    throw ArgumentError("gradient length differs from parameter count");
  }
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  // visit indices in a seeded random order until enough usable ones are seen
  std::vector<std::size_t> order(params.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.bounded(i)]);
  GradCheckResult result;
  for (std::size_t i : order) {
    if (result.checked >= samples) break;
    if (kinked && kinked(i)) {
      ++result.skipped_kinks;
      continue;
    }
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f(params);
    params[i] = saved - h;
    const double down = f(params);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (result.checked == 0 || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
    ++result.checked;
  }
  return result;
}

GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& f,
                                  std::span<double> params, std::span<const double> analytic,
                                  double h, std::size_t samples, CounterRng& rng) {
  return finite_diff_check(f, params, analytic, h, samples, rng, {});
}

std::vector<bool> relu_pattern(const PostProcessor& net, const Objective& objective) {
  std::vector<bool> pattern;
  PostProcessor::Tape tape;
  for (const auto& map : objective.maps) {
    net.forward(map, &tape);
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
      if (net.layers()[k].kind != LayerKind::relu) continue;
      for (double v : tape.activations[k].values) pattern.push_back(v > 0.0);
    }
  }
  return pattern;
}

GradCheckResult finite_diff_check(PostProcessor& net, const Objective& objective, double h,
                                  std::size_t samples, CounterRng& rng) {
  net.zero_grad();
  evaluate_objective(net, objective, true);
  const std::vector<double> analytic(net.grads().begin(), net.grads().end());
  net.zero_grad();
  const std::vector<bool> base = relu_pattern(net, objective);
  auto params = net.params();
  auto kinked = [&](std::size_t i) {
    const double saved = params[i];
    bool crossed = false;
    for (double step : {h, -h}) {
      params[i] = saved + step;
      crossed = crossed || relu_pattern(net, objective) != base;
    }
    params[i] = saved;
    return crossed;
  };
  auto f = [&](std::span<const double>) {
    return evaluate_objective(net, objective, false).total();
  };
  return finite_diff_check(f, params, analytic, h, samples, rng, kinked);
}

}  // namespace geomatch
