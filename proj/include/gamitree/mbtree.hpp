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

#ifndef GAMITREE_MBTREE_HPP
#define GAMITREE_MBTREE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "gamitree/dataset.hpp"

namespace gamitree {

// Intercept plus at most 16 spline columns.
inline constexpr std::size_t kMaxDesignCols = 17;
inline constexpr std::size_t kMaxKnots = kMaxDesignCols - 1;

// {e^-8, e^-7, ..., e^0}
std::vector<double> default_alpha_grid();

// Weighted gram quantities of one row set: X'WX, X'Wz, z'Wz, sum of weights
// and row count. Column 0 of the design is always the intercept.
struct GramBlock {
  std::size_t cols = 0;
  std::array<double, kMaxDesignCols * kMaxDesignCols> xtwx{};
  std::array<double, kMaxDesignCols> xtwz{};
  double zwz = 0.0;
  double sum_w = 0.0;
  double count = 0.0;

  explicit GramBlock(std::size_t c = 0) : cols(c) {}
  double& at(std::size_t r, std::size_t c) { return xtwx[r * kMaxDesignCols + c]; }
  double at(std::size_t r, std::size_t c) const { return xtwx[r * kMaxDesignCols + c]; }
  GramBlock& operator+=(const GramBlock& o);
  GramBlock& operator-=(const GramBlock& o);
};

// Per-bin gram blocks over the bins of the splitting variable. Any node of a
// tree that splits on that variable covers a contiguous run of bins, so node
// grams are sums of bin grams.
class GramAccumulator {
 public:
  GramAccumulator(std::size_t bins, std::size_t cols);

  std::size_t bins() const { return bins_; }
  std::size_t cols() const { return cols_; }

  // Adds one row's design vector. Only the upper triangle is accumulated.
  void add_dense(std::size_t bin, std::span<const double> design, double z, double w);
  // Row with design [1, x].
  void add_linear(std::size_t bin, double x, double z, double w);
  // Row with design [1, B_1(x), ..., B_K(x)] located at `p`.
  void add_spline(std::size_t bin, SplinePoint p, double z, double w);

  GramBlock block(std::size_t bin) const;
  // Sum over bins [lo, hi).
  GramBlock range(std::size_t lo, std::size_t hi) const;
  GramBlock total() const { return range(0, bins_); }

 private:
  std::size_t stride() const { return cols_ * cols_ + cols_ + 3; }
  double* bin_ptr(std::size_t bin) { return data_.data() + bin * stride(); }
  const double* bin_ptr(std::size_t bin) const { return data_.data() + bin * stride(); }

  std::size_t bins_;
  std::size_t cols_;
  std::vector<double> data_;
};

// Ridge fit of one tree node, penalty chosen by GCV.
struct NodeModel {
  std::vector<double> coefficients;
  double alpha = 0.0;
  double df = 0.0;
  double gcv = 0.0;
  double sse = 0.0;
};

// Solves (X'WX + alpha I')b = X'Wz for each alpha (I' leaves the intercept
// unpenalized), drops any alpha whose normalized slope |b_c| * sd_c exceeds
// max_coef, and keeps the lowest GCV = n SSE / (n - df)^2. If every alpha
// violates max_coef the largest alpha is used; if every system is singular
// the node falls back to its weighted mean.
NodeModel ridge_fit(const GramBlock& acc, std::span<const double> alpha_grid, double max_coef);

// GCV expressed on the SSE scale, n * GCV; additive across sibling nodes.
double gcv_score(const NodeModel& m, double n);

enum class TreeKind { Main, Interaction };

struct TreeNode {
  double threshold = 0.0;  // rows with split value <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  NodeModel model;  // populated on leaves
  bool is_leaf() const { return left < 0; }
};

// Main-effect tree: splits and models on the same variable. Interaction
// tree: splits on split_var, fits a model in model_var inside each leaf.
class ModelBasedTree {
 public:
  TreeKind kind = TreeKind::Main;
  std::size_t model_var = 0;
  std::size_t split_var = 0;
  std::optional<SplineBasis> basis;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t depth = 0;

  double predict_one(double model_value, double split_value) const;
  std::vector<double> predict(const Dataset& ds) const;
  std::size_t leaf_count() const;
  double eval_leaf(const NodeModel& m, double model_value) const;
};

struct TreeParams {
  std::size_t max_depth = 2;
  std::size_t min_leaf = 20;
  std::vector<double> alpha_grid = default_alpha_grid();
  double max_coef = 1.0;
};

struct TreeSpec {
  TreeKind kind = TreeKind::Main;
  std::size_t model_var = 0;
  std::size_t split_var = 0;
};

// Inputs for one tree fit. `rows` restricts the fit to a subset of row ids;
// empty means every row.
struct TreeData {
  std::span<const double> model_values;
  const BinIndex* split_bins = nullptr;
  const SplineBasis* basis = nullptr;
  std::span<const std::uint32_t> rows = {};
};

struct GrownTree {
  ModelBasedTree tree;
  double sse = 0.0;  // sum_i w_i (z_i - T(x_i))^2 over the fitted rows
};

GramAccumulator build_grams(const TreeData& data, std::span<const double> z, std::span<const double> w);

GrownTree grow_tree(const TreeSpec& spec, const TreeData& data, std::span<const double> z,
                    std::span<const double> w, const TreeParams& params);

// Convenience form that bins the split variable of `ds` itself.
GrownTree grow_tree(const TreeSpec& spec, const Dataset& ds, std::span<const double> z,
                    std::span<const double> w, const TreeParams& params,
                    const SplineBasis* basis = nullptr, std::size_t max_bins = kDefaultMaxBins);

inline std::vector<double> predict_tree(const ModelBasedTree& tree, const Dataset& ds) {
  return tree.predict(ds);
}


// (modeling variable, splitting variable) of an interaction tree.
struct Orientation {
  std::size_t model_var = 0;
  std::size_t split_var = 0;
  friend bool operator==(const Orientation&, const Orientation&) = default;
  friend auto operator<=>(const Orientation&, const Orientation&) = default;
};

// Training data with its per-variable quantile bins (splitting) and knot
// sets (modeling). Built once per fit and shared by every tree.
struct FeatureFrame {
  const Dataset* data = nullptr;
  std::vector<BinIndex> bins;
  std::vector<SplineBasis> knots;
  std::size_t nknots = 5;

  std::size_t cols() const { return bins.size(); }
  // Interaction leaves use the spline basis only when nknots > 2; two knots
  // span the same space as [1, x].
  const SplineBasis* interaction_basis(std::size_t j) const { return nknots > 2 ? &knots[j] : nullptr; }
  TreeData main_data(std::size_t j, std::span<const std::uint32_t> rows = {}) const;
  TreeData interaction_data(Orientation o, std::span<const std::uint32_t> rows = {}) const;
};

FeatureFrame make_frame(const Dataset& ds, std::size_t max_bins, std::size_t nknots);

}  // namespace gamitree

#endif  // GAMITREE_MBTREE_HPP
