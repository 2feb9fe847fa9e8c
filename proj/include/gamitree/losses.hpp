// Copyright 2026 The gamitree Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GAMITREE_LOSSES_HPP
#define GAMITREE_LOSSES_HPP

#include <cmath>
#include <span>
#include <vector>

#include "gamitree/dataset.hpp"

namespace gamitree {

// Hessian floor for the log loss; keeps the pseudo-response finite when the
// current prediction saturates.
inline constexpr double kHessianFloor = 1e-6;

// Per-row first/second derivatives of the loss at the current prediction and
// the Newton pseudo-response z = -G/H.
struct LossGrad {
  std::vector<double> grad;
  std::vector<double> hess;
  std::vector<double> z;
};

double init_offset(std::span<const double> y, Task task);

double row_loss(double y, double g, Task task);
LossGrad grad_hess(std::span<const double> y, std::span<const double> g, Task task);
double mean_loss(std::span<const double> y, std::span<const double> g, Task task);

inline double sigmoid(double g) {
  return g >= 0 ? 1.0 / (1.0 + std::exp(-g)) : std::exp(g) / (1.0 + std::exp(g));
}

}  // namespace gamitree

#endif  // GAMITREE_LOSSES_HPP
