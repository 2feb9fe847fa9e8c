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

#include "gamitree/losses.hpp"

#include <algorithm>
#include <cmath>

#include "gamitree/error.hpp"

namespace gamitree {

double init_offset(std::span<const double> y, Task task) {
  if (y.empty()) throw_validation("empty target");
  double sum = 0.0;
  for (double v : y) sum += v;
  const double mean = sum / static_cast<double>(y.size());
  if (task == Task::Continuous) return mean;
  if (mean <= 0.0 || mean >= 1.0) throw_validation("degenerate target: binary task needs both classes");
  return std::log(mean / (1.0 - mean));
}

double row_loss(double y, double g, Task task) {
  if (task == Task::Continuous) {
    const double r = y - g;
    return r * r;
  }
  // log(1 + exp(g)) - y g, evaluated without overflow.
  const double softplus = std::max(g, 0.0) + std::log1p(std::exp(-std::abs(g)));
  return softplus - y * g;
}

LossGrad grad_hess(std::span<const double> y, std::span<const double> g, Task task) {
  if (y.size() != g.size()) throw_validation("grad_hess: length mismatch");
  const std::size_t n = y.size();
  LossGrad out;
  out.grad.resize(n);
  out.hess.resize(n);
  out.z.resize(n);
  if (task == Task::Continuous) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - g[i];
      out.grad[i] = -2.0 * r;
      out.hess[i] = 2.0;
      out.z[i] = r;
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double p = sigmoid(g[i]);
    const double h = std::max(p * (1.0 - p), kHessianFloor);
    out.grad[i] = p - y[i];
    out.hess[i] = h;
    out.z[i] = (y[i] - p) / h;
  }
  return out;
}

double mean_loss(std::span<const double> y, std::span<const double> g, Task task) {
  if (y.size() != g.size()) throw_validation("mean_loss: length mismatch");
  if (y.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += row_loss(y[i], g[i], task);
  return sum / static_cast<double>(y.size());
}

}  // namespace gamitree
