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

#include "gamitree/boost.hpp"

#include <omp.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>

#include "gamitree/error.hpp"
#include "gamitree/losses.hpp"

namespace gamitree {

void apply_tree(const ScaledTree& st, const Dataset& ds, std::vector<double>& g) {
  const auto xm = ds.column(st.tree.model_var);
  const auto xs = ds.column(st.tree.split_var);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += st.scale * st.tree.predict_one(xm[i], xs[i]);
}

void apply_trees(std::span<const ScaledTree> trees, const Dataset& ds, std::vector<double>& g) {
  for (const auto& t : trees) apply_tree(t, ds, g);
}

namespace {

using CandidateFit = std::function<GrownTree(std::size_t, std::span<const double>, std::span<const double>)>;

// Losses L_0..L_m; stop when L_{m-d} <= min(L_{m-d+1..m}).
bool patience_exhausted(const std::vector<double>& curve, std::size_t d) {
  const std::size_t m = curve.size() - 1;
  if (m < d) return false;
  const double anchor = curve[m - d];
  for (std::size_t k = m - d + 1; k <= m; ++k)
    if (curve[k] < anchor) return false;
  return true;
}

StageResult run_stage(const FeatureFrame& frame, const Dataset& valid, Predictions& g, std::size_t n_candidates,
                      const CandidateFit& fit_candidate, const BoostParams& params) {
  const Dataset& train = *frame.data;
  const Task task = train.task();
  if (params.patience < 1) throw_validation("patience must be at least 1");
  if (g.train.size() != train.rows() || g.valid.size() != valid.rows())
    throw_validation("prediction vectors do not match dataset sizes");

  StageResult out;
  out.validation_curve.push_back(mean_loss(valid.target(), g.valid, task));
  out.train_curve.push_back(mean_loss(train.target(), g.train, task));
  if (n_candidates == 0) return out;

  // Snapshot ring of the last d+1 states, indexed by iteration count.
  const std::size_t ring = params.patience + 1;
  std::vector<Predictions> snapshots(ring);
  snapshots[0] = g;
  std::vector<ScaledTree> accepted;
  std::optional<std::size_t> stop_at;

  const int threads = params.threads > 0 ? params.threads : omp_get_max_threads();
  std::vector<GrownTree> fits(n_candidates);

  for (std::size_t m = 1; m <= params.max_iterations; ++m) {
    const LossGrad lg = grad_hess(train.target(), g.train, task);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t c = 0; c < n_candidates; ++c) fits[c] = fit_candidate(c, lg.z, lg.hess);

    std::size_t best = 0;
    for (std::size_t c = 1; c < n_candidates; ++c)
      if (fits[c].sse < fits[best].sse) best = c;
    if (params.keep_candidate_sse) {
      std::vector<double> sse(n_candidates);
      for (std::size_t c = 0; c < n_candidates; ++c) sse[c] = fits[c].sse;
      out.candidate_sse.push_back(std::move(sse));
    }

    ScaledTree chosen{std::move(fits[best].tree), params.learning_rate};
    apply_tree(chosen, train, g.train);
    apply_tree(chosen, valid, g.valid);
    accepted.push_back(std::move(chosen));
    out.validation_curve.push_back(mean_loss(valid.target(), g.valid, task));
    out.train_curve.push_back(mean_loss(train.target(), g.train, task));
    out.iterations_run = m;
    snapshots[m % ring] = g;

    if (patience_exhausted(out.validation_curve, params.patience)) {
      stop_at = m - params.patience;
      break;
    }
  }

  if (!stop_at) {
    // Ran out of iterations: keep the best state still held in the ring.
    const std::size_t m = out.iterations_run;
    const std::size_t first = m >= params.patience ? m - params.patience : 0;
    std::size_t best = first;
    for (std::size_t k = first + 1; k <= m; ++k)
      if (out.validation_curve[k] < out.validation_curve[best]) best = k;
    stop_at = best;
  }
  accepted.resize(*stop_at);
  g = std::move(snapshots[*stop_at % ring]);
  out.trees = std::move(accepted);
  out.stop_iterations = out.trees.size();
  return out;
}

}  // namespace

StageResult fit_main_stage(const FeatureFrame& train, const Dataset& valid, Predictions& g,
                           const BoostParams& params) {
  const std::size_t p = train.cols();
  auto fit = [&](std::size_t j, std::span<const double> z, std::span<const double> w) {
    return grow_tree(TreeSpec{TreeKind::Main, j, j}, train.main_data(j), z, w, params.tree);
  };
  return run_stage(train, valid, g, p, fit, params);
}

StageResult fit_interaction_stage(const FeatureFrame& train, const Dataset& valid, Predictions& g,
                                  std::span<const Orientation> combos, const BoostParams& params) {
  // Scan order decides ties, so sort combos lexicographically.
  std::vector<Orientation> order(combos.begin(), combos.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (const auto& o : order)
    if (o.model_var == o.split_var || o.model_var >= train.cols() || o.split_var >= train.cols())
      throw_validation("invalid interaction combination");
  auto fit = [&](std::size_t c, std::span<const double> z, std::span<const double> w) {
    const Orientation o = order[c];
    return grow_tree(TreeSpec{TreeKind::Interaction, o.model_var, o.split_var}, train.interaction_data(o), z, w,
                     params.tree);
  };
  return run_stage(train, valid, g, order.size(), fit, params);
}

}  // namespace gamitree
