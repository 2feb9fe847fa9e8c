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

#ifndef GAMITREE_SIM_HPP
#define GAMITREE_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gamitree/dataset.hpp"

namespace gamitree::sim {

inline constexpr std::size_t kPredictors = 30;
inline constexpr std::size_t kModelBlock = 20;  // x1..x20 share one factor
inline constexpr double kTruncation = 2.5;

struct SimScenario {
  int model_id = 1;  // 1..4
  std::size_t n = 1000;
  double rho = 0.0;  // equicorrelation within each block, [0, 1)
  Task task = Task::Continuous;
  double noise_sd = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

inline double clip(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

// n x 30 predictors, column-major: two independent equicorrelated Gaussian
// blocks (x1..x20 and x21..x30) built as sqrt(rho) u + sqrt(1 - rho) e, then
// clipped to [-2.5, 2.5]. Row i draws only from its own counter-seeded stream.
std::vector<std::vector<double>> gen_predictors(const SimScenario& s);

// g(x) for one row; x[0] is x1. Needs at least 10 entries.
double eval_model_form(int model_id, std::span<const double> x);
std::vector<double> eval_model_form(int model_id, const std::vector<std::vector<double>>& columns);

struct SimResponse {
  std::vector<double> y;
  double beta0 = 0.0;  // binary only
};

// Continuous: y = g + N(0, noise_sd^2). Binary: beta0 chosen by bisection so
// the sample mean of sigmoid(beta0 + g) is 0.5, then y ~ Bernoulli.
SimResponse gen_response(std::span<const double> g, const SimScenario& s);

// Solves mean(sigmoid(beta0 + g)) = 0.5 on [-20, 20].
double balance_intercept(std::span<const double> g);

// 0-based variable pairs carrying a true interaction.
std::vector<std::pair<std::size_t, std::size_t>> true_pairs(int model_id);

struct SimData {
  Dataset data;  // columns x1..x30
  std::vector<double> g;
  double beta0 = 0.0;
};

SimData simulate(const SimScenario& s);

struct SimSplit {
  Dataset train, valid, test;
  double beta0 = 0.0;
};

// Rows [0, n/2) train, [n/2, n/2 + n/4) validation, rest test.
SimSplit simulate_split(const SimScenario& s);

}  // namespace gamitree::sim

#endif  // GAMITREE_SIM_HPP
