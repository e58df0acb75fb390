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
#include <span>
#include <vector>

namespace geomatch {

/// Adam with decoupled weight decay: theta *= 1 - lr * wd before the Adam step.
class AdamW {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-3;
  };

  AdamW(std::size_t n, Options options);

  void step(std::span<double> params, std::span<const double> grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  Options opt_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

/// One-cycle learning rate: linear warmup from max_lr / div_factor to max_lr
/// over the first pct_start of the steps, then cosine annealing down to
/// max_lr / (div_factor * final_div_factor) at the last step.
class OneCycleSchedule {
 public:
  OneCycleSchedule(double max_lr, std::size_t total_steps, double pct_start = 0.3,
                   double div_factor = 25.0, double final_div_factor = 1e4);

  double lr(std::size_t step) const;
  std::size_t warmup_steps() const { return warmup_; }

 private:
  double max_lr_;
  double initial_lr_;
  double final_lr_;
  std::size_t total_;
  std::size_t warmup_;
};

}  // namespace geomatch
