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

#ifndef GAMITREE_PURIFY_HPP
#define GAMITREE_PURIFY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gamitree/boost.hpp"
#include "gamitree/dataset.hpp"
#include "gamitree/gami.hpp"

namespace gamitree {

// sum_i coef_i B_i(x) over a linear B-spline basis.
struct AdditiveSpline {
  SplineBasis basis;
  std::vector<double> coef;
  double eval(double x) const;
};

// g_j(x) = sum of its scaled main-effect trees + sum of transferred splines + shift.
struct MainEffect {
  std::size_t var = 0;
  std::vector<ScaledTree> trees;
  std::vector<AdditiveSpline> splines;
  double shift = 0.0;
  double eval(double x) const;
};

// g_jk(x_j, x_k) = sum of both orientations' scaled trees - removed splines + shift.
struct PairEffect {
  std::size_t j = 0;  // j < k
  std::size_t k = 0;
  std::vector<ScaledTree> trees;
  std::vector<AdditiveSpline> removed_j;
  std::vector<AdditiveSpline> removed_k;
  double shift = 0.0;
  bool additive = false;  // surface lay in the additive space; evaluates to 0
  double eval(double xj, double xk) const;
};

struct EffectSet {
  double intercept = 0.0;
  std::vector<std::string> names;  // model feature names
  std::vector<MainEffect> mains;   // one per feature, index == var
  std::vector<PairEffect> pairs;   // sorted by (j, k)
  bool purified = false;

  double eval_row(std::span<const double> x) const;
};

// Groups the model's trees by variable / unordered pair.
EffectSet assemble_raw_effects(const FittedModel& model);

// Projects each pair surface onto intercept + spline(x_j) + spline(x_k) over
// the training rows, moves the additive part into the main effects and the
// constant into the intercept, then centers every main effect.
EffectSet purify_effects(const EffectSet& raw, const Dataset& train, std::size_t nknots);

struct ImportanceEntry {
  std::string component;  // "x1" or "x1:x2"
  bool interaction = false;
  std::size_t j = 0;
  std::size_t k = 0;  // == j for main effects
  double importance = 0.0;
};

// Population standard deviation of each component over the training rows,
// sorted descending.
std::vector<ImportanceEntry> importance(const EffectSet& effects, const Dataset& train);

struct MainGrid {
  std::size_t var = 0;
  std::vector<double> x;
  std::vector<double> value;
};

struct PairSlice {
  double quantile = 0.0;
  double xk = 0.0;
  std::vector<double> value;  // over PairGrid::xj
};

struct PairGrid {
  std::size_t j = 0;
  std::size_t k = 0;
  std::vector<double> xj;
  std::vector<double> xk;
  std::vector<double> value;  // row-major, value[a * xk.size() + b] = g(xj[a], xk[b])
  std::vector<PairSlice> slices;
};

struct EffectGrids {
  double intercept = 0.0;
  std::vector<std::string> names;
  std::vector<MainGrid> mains;
  std::vector<PairGrid> pairs;
};

inline const std::vector<double>& default_slice_quantiles() {
  static const std::vector<double> q{0.1, 0.5, 0.9};
  return q;
}

// Tabulates every component on grid_size equally spaced points over its
// training range; pairs also get slices with x_k held at training quantiles.
EffectGrids export_effect_grids(const EffectSet& effects, const Dataset& train, std::size_t grid_size,
                                const std::vector<double>& slice_quantiles = default_slice_quantiles());

// One CSV per main effect, one long-form CSV plus one slices CSV per pair,
// importance.csv and index.json.
void write_effect_exports(const std::string& dir, const EffectGrids& grids,
                          const std::vector<ImportanceEntry>& importances);
void write_importance_csv(const std::string& path, const std::vector<ImportanceEntry>& importances);

}  // namespace gamitree

#endif  // GAMITREE_PURIFY_HPP
