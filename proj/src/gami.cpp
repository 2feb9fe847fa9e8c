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

#include "gamitree/gami.hpp"

#include <cmath>
#include <sstream>

#include "gamitree/error.hpp"
#include "gamitree/losses.hpp"

namespace gamitree {

void GamiConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw_validation("learning rate must lie in (0, 1]");
  if (rounds < 1) throw_validation("rounds must be at least 1");
  if (npairs < 1) throw_validation("npairs must be at least 1");
  if (nknots < 2 || nknots > kMaxKnots)
    throw_validation("nknots must lie in [2, " + std::to_string(kMaxKnots) + "]");
  if (patience < 1) throw_validation("patience must be at least 1");
  if (max_bins < 2 || max_bins > kMaxBinsLimit) throw_validation("max_bins out of range");
  if (alpha_grid.empty()) throw_validation("alpha grid must be nonempty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0) || !std::isfinite(alpha_grid[i])) throw_validation("alpha values must be finite and >= 0");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) throw_validation("alpha grid must be ascending");
  }
  if (!(max_coef >= 0.0)) throw_validation("max_coef must be >= 0");
  if (threads < 0) throw_validation("threads must be >= 0");
}

TreeParams GamiConfig::tree_params() const {
  TreeParams p;
  p.max_depth = max_depth;
  p.min_leaf = min_leaf;
  p.alpha_grid = alpha_grid;
  p.max_coef = max_coef;
  return p;
}

BoostParams GamiConfig::boost_params() const {
  BoostParams p;
  p.max_iterations = max_iterations;
  p.learning_rate = learning_rate;
  p.patience = patience;
  p.tree = tree_params();
  p.threads = threads;
  return p;
}

FilterParams GamiConfig::filter_params() const {
  FilterParams p;
  p.tree = tree_params();
  p.tree.max_depth = 2;
  p.subsample = filter_subsample;
  p.seed = seed;
  p.threads = threads;
  return p;
}

GamiConfig default_config(Task task) {
  GamiConfig c;
  c.max_depth = task == Task::Binary ? 1 : 2;
  return c;
}

std::size_t FittedModel::tree_count() const {
  std::size_t n = 0;
  for (const auto& r : rounds) n += r.main.trees.size() + r.interaction.trees.size();
  return n;
}

void FittedModel::for_each_tree(
    const std::function<void(std::size_t round, bool interaction, const ScaledTree&)>& fn) const {
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    for (const auto& t : rounds[r].main.trees) fn(r, false, t);
    for (const auto& t : rounds[r].interaction.trees) fn(r, true, t);
  }
}

FittedModel fit_gami(const Dataset& train, const Dataset& valid, const GamiConfig& config, const FitLogger& log) {
  config.validate();
  if (train.names() != valid.names()) throw_validation("train and validation sets have different columns");
  if (train.task() != valid.task()) throw_validation("train and validation sets have different tasks");

  const FeatureFrame frame = make_frame(train, config.max_bins, config.nknots);
  FittedModel model;
  model.task = train.task();
  model.config = config;
  model.offset = init_offset(train.target(), train.task());
  for (std::size_t j = 0; j < train.cols(); ++j)
    model.features.push_back({train.name(j), frame.bins[j].edges, frame.knots[j].knots()});

  Predictions g{std::vector<double>(train.rows(), model.offset), std::vector<double>(valid.rows(), model.offset)};
  const BoostParams boost = config.boost_params();
  FilterParams filter = config.filter_params();

  for (std::size_t r = 0; r < config.rounds; ++r) {
    Round round;
    round.main = fit_main_stage(frame, valid, g, boost);
    filter.seed = config.seed + r;
    round.ranking = filter_interactions(frame, g.train, config.npairs, filter);
    round.interaction = fit_interaction_stage(frame, valid, g, round.ranking.combos, boost);
    if (log) {
      std::ostringstream msg;
      msg << "round " << r + 1 << ": main trees " << round.main.stop_iterations << " (ran "
          << round.main.iterations_run << "), interaction trees " << round.interaction.stop_iterations << " (ran "
          << round.interaction.iterations_run << "), validation loss "
          << mean_loss(valid.target(), g.valid, valid.task());
      log(msg.str());
    }
    const bool dual_zero = round.main.stop_iterations == 0 && round.interaction.stop_iterations == 0;
    model.rounds.push_back(std::move(round));
    if (dual_zero) break;
  }
  return model;
}

std::vector<std::size_t> resolve_features(const FittedModel& model, const Dataset& ds) {
  std::vector<std::size_t> cols(model.features.size());
  for (std::size_t j = 0; j < model.features.size(); ++j) {
    cols[j] = ds.find(model.features[j].name);
    if (cols[j] >= ds.cols()) throw_validation("missing feature column '" + model.features[j].name + "'");
  }
  return cols;
}

std::vector<double> predict(const FittedModel& model, const Dataset& ds) {
  const std::vector<std::size_t> cols = resolve_features(model, ds);
  std::vector<double> g(ds.rows(), model.offset);
  model.for_each_tree([&](std::size_t, bool, const ScaledTree& st) {
    const auto xm = ds.column(cols[st.tree.model_var]);
    const auto xs = ds.column(cols[st.tree.split_var]);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += st.scale * st.tree.predict_one(xm[i], xs[i]);
  });
  return g;
}

std::vector<double> predict_proba(const FittedModel& model, const Dataset& ds) {
  std::vector<double> g = predict(model, ds);
  for (double& v : g) v = sigmoid(v);
  return g;
}

FittedModel truncate_rounds(const FittedModel& model, std::size_t rounds) {
  FittedModel out = model;
  if (out.rounds.size() > rounds) out.rounds.resize(rounds);
  return out;
}

}  // namespace gamitree
