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

#ifndef GAMITREE_GAMI_HPP
#define GAMITREE_GAMI_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gamitree/boost.hpp"
#include "gamitree/dataset.hpp"
#include "gamitree/filter.hpp"
#include "gamitree/mbtree.hpp"

namespace gamitree {

struct GamiConfig {
  std::size_t max_iterations = 1000;  // M, per stage
  std::size_t max_depth = 2;          // 1 for the binary task
  double learning_rate = 0.2;
  std::size_t nknots = 5;
  std::size_t rounds = 5;  // R
  std::size_t npairs = 10;  // q
  std::vector<double> alpha_grid = default_alpha_grid();
  double max_coef = 1.0;
  std::size_t patience = 10;  // d
  std::size_t min_leaf = 20;
  std::size_t max_bins = kDefaultMaxBins;
  std::size_t filter_subsample = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 0;

  void validate() const;
  TreeParams tree_params() const;
  BoostParams boost_params() const;
  FilterParams filter_params() const;
};

GamiConfig default_config(Task task);

struct Round {
  StageResult main;
  PairRanking ranking;
  StageResult interaction;
};

struct FeatureMeta {
  std::string name;
  std::vector<double> bin_edges;
  std::vector<double> knots;
};

struct FittedModel {
  Task task = Task::Continuous;
  double offset = 0.0;
  GamiConfig config;
  std::vector<FeatureMeta> features;
  std::vector<Round> rounds;

  std::size_t tree_count() const;
  // Visits every retained tree in accumulation order.
  void for_each_tree(const std::function<void(std::size_t round, bool interaction, const ScaledTree&)>& fn) const;
};

using FitLogger = std::function<void(const std::string&)>;

// Alternates main-effect boosting, interaction filtering and interaction
// boosting for up to config.rounds rounds, each stage continuing from the
// current model; stops early once both stages of a round keep no trees.
FittedModel fit_gami(const Dataset& train, const Dataset& valid, const GamiConfig& config,
                     const FitLogger& log = {});

// Link-scale predictions (log-odds for the binary task).
std::vector<double> predict(const FittedModel& model, const Dataset& ds);
std::vector<double> predict_proba(const FittedModel& model, const Dataset& ds);

// Maps each model feature to its column in `ds`; throws naming the first
// missing feature.
std::vector<std::size_t> resolve_features(const FittedModel& model, const Dataset& ds);

// Keeps the first `rounds` rounds.
FittedModel truncate_rounds(const FittedModel& model, std::size_t rounds);

inline constexpr int kModelSchemaVersion = 1;

std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace gamitree

#endif  // GAMITREE_GAMI_HPP
