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

#ifndef GAMITREE_BOOST_HPP
#define GAMITREE_BOOST_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "gamitree/dataset.hpp"
#include "gamitree/mbtree.hpp"

namespace gamitree {

struct ScaledTree {
  ModelBasedTree tree;
  double scale = 1.0;
};

struct BoostParams {
  std::size_t max_iterations = 1000;
  double learning_rate = 0.2;
  std::size_t patience = 10;
  TreeParams tree;
  int threads = 0;  // 0 = runtime default
  bool keep_candidate_sse = false;
};

// Current model output carried on both row sets.
struct Predictions {
  std::vector<double> train;
  std::vector<double> valid;
};

struct StageResult {
  std::vector<ScaledTree> trees;     // retained trees, in fit order
  std::size_t stop_iterations = 0;   // == trees.size()
  std::size_t iterations_run = 0;    // before rollback
  std::vector<double> validation_curve;  // [0] is the loss before the stage
  std::vector<double> train_curve;
  // Per iteration, every candidate's weighted SSE (keep_candidate_sse only).
  std::vector<std::vector<double>> candidate_sse;
};

// Greedy main-effect boosting: every iteration fits one main-effect tree per
// variable and keeps the one with the smallest weighted SSE. Stops once the
// loss d iterations back is no worse than every loss since, then rolls back
// those d trees. `g` is advanced to the retained model.
StageResult fit_main_stage(const FeatureFrame& train, const Dataset& valid, Predictions& g,
                           const BoostParams& params);

// Same loop over the oriented pairs in `combos`.
StageResult fit_interaction_stage(const FeatureFrame& train, const Dataset& valid, Predictions& g,
                                  std::span<const Orientation> combos, const BoostParams& params);

// g[i] += scale * T(x_i), in order, for each tree.
void apply_trees(std::span<const ScaledTree> trees, const Dataset& ds, std::vector<double>& g);
void apply_tree(const ScaledTree& tree, const Dataset& ds, std::vector<double>& g);

}  // namespace gamitree

#endif  // GAMITREE_BOOST_HPP
