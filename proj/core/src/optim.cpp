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
#include "geomatch/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geomatch/error.hpp"

namespace geomatch {

AdamW::AdamW(std::size_t n, Options options) : opt_(options), m_(n, 0.0), v_(n, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ArgumentError("AdamW: parameter count changed");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  const double decay = 1.0 - lr * opt_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * grads[i];
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grads[i] * grads[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] = params[i] * decay - lr * mhat / (std::sqrt(vhat) + opt_.eps);
  }
}

OneCycleSchedule::OneCycleSchedule(double max_lr, std::size_t total_steps, double pct_start,
                                   double div_factor, double final_div_factor)
    : max_lr_(max_lr),
      initial_lr_(max_lr / div_factor),
      final_lr_(max_lr / (div_factor * final_div_factor)),
      total_(total_steps) {
  if (!(pct_start > 0.0 && pct_start < 1.0)) {
    throw ArgumentError("pct_start must lie in (0, 1)");
  }
  if (max_lr < 0.0 || div_factor <= 0.0 || final_div_factor <= 0.0) {
    throw ArgumentError("one-cycle rates must be positive");
  }
  warmup_ = static_cast<std::size_t>(std::floor(pct_start * static_cast<double>(total_)));
}

double OneCycleSchedule::lr(std::size_t step) const {
  if (total_ == 0) return max_lr_;
  step = std::min(step, total_ - 1);
  if (step < warmup_) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup_);
    return initial_lr_ + (max_lr_ - initial_lr_) * t;
  }
  const std::size_t span = total_ - 1 > warmup_ ? total_ - 1 - warmup_ : 1;
  const double t = static_cast<double>(step - warmup_) / static_cast<double>(span);
  return final_lr_ + (max_lr_ - final_lr_) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace geomatch
