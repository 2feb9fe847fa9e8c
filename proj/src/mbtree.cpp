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

#include "gamitree/mbtree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>

#include "gamitree/error.hpp"

namespace gamitree {

namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kMinChildWeight = 1e-8;

}  // namespace

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int e = -8; e <= 0; ++e) grid.push_back(std::exp(static_cast<double>(e)));
  return grid;
}

GramBlock& GramBlock::operator+=(const GramBlock& o) {
  for (std::size_t r = 0; r < cols; ++r) {
    for (std::size_t c = 0; c < cols; ++c) at(r, c) += o.at(r, c);
    xtwz[r] += o.xtwz[r];
  }
  zwz += o.zwz;
  sum_w += o.sum_w;
  count += o.count;
  return *this;
}

GramBlock& GramBlock::operator-=(const GramBlock& o) {
  for (std::size_t r = 0; r < cols; ++r) {
    for (std::size_t c = 0; c < cols; ++c) at(r, c) -= o.at(r, c);
    xtwz[r] -= o.xtwz[r];
  }
  zwz -= o.zwz;
  sum_w -= o.sum_w;
  count -= o.count;
  return *this;
}

GramAccumulator::GramAccumulator(std::size_t bins, std::size_t cols)
    : bins_(bins), cols_(cols), data_(bins * (cols * cols + cols + 3), 0.0) {
  if (cols < 1 || cols > kMaxDesignCols) throw_validation("design column count out of range");
}

// Layout per bin: [upper-triangle-in-full c*c | c entries of X'Wz | zWz | sumW | count]
void GramAccumulator::add_dense(std::size_t bin, std::span<const double> design, double z, double w) {
  double* p = bin_ptr(bin);
  const std::size_t c = cols_;
  for (std::size_t r = 0; r < c; ++r) {
    const double wr = w * design[r];
    if (wr == 0.0) continue;
    for (std::size_t k = r; k < c; ++k) p[r * c + k] += wr * design[k];
    p[c * c + r] += wr * z;
  }
  p[c * c + c] += w * z * z;
  p[c * c + c + 1] += w;
  p[c * c + c + 2] += 1.0;
}

void GramAccumulator::add_linear(std::size_t bin, double x, double z, double w) {
  double* p = bin_ptr(bin);
  const double wx = w * x;
  const double wz = w * z;
  p[0] += w;
  p[1] += wx;
  p[3] += wx * x;
  p[4] += wz;
  p[5] += wx * z;
  p[6] += wz * z;
  p[7] += w;
  p[8] += 1.0;
}

void GramAccumulator::add_spline(std::size_t bin, SplinePoint pt, double z, double w) {
  double* p = bin_ptr(bin);
  const std::size_t c = cols_;
  const std::size_t a = pt.segment + 1;
  const std::size_t b = a + 1;
  const double wa = w * (1.0 - pt.t);
  const double wb = w * pt.t;
  p[0] += w;
  p[a] += wa;
  p[b] += wb;
  p[a * c + a] += wa * (1.0 - pt.t);
  p[a * c + b] += wa * pt.t;
  p[b * c + b] += wb * pt.t;
  double* v = p + c * c;
  v[0] += w * z;
  v[a] += wa * z;
  v[b] += wb * z;
  v[c] += w * z * z;
  v[c + 1] += w;
  v[c + 2] += 1.0;
}

GramBlock GramAccumulator::block(std::size_t bin) const { return range(bin, bin + 1); }

GramBlock GramAccumulator::range(std::size_t lo, std::size_t hi) const {
  GramBlock out(cols_);
  const std::size_t c = cols_;
  for (std::size_t bin = lo; bin < hi; ++bin) {
    const double* p = bin_ptr(bin);
    for (std::size_t r = 0; r < c; ++r) {
      for (std::size_t k = r; k < c; ++k) out.at(r, k) += p[r * c + k];
      out.xtwz[r] += p[c * c + r];
    }
    out.zwz += p[c * c + c];
    out.sum_w += p[c * c + c + 1];
    out.count += p[c * c + c + 2];
  }
  for (std::size_t r = 0; r < c; ++r)
    for (std::size_t k = 0; k < r; ++k) out.at(r, k) = out.at(k, r);
  return out;
}

namespace {

template <int C>
struct FixedGram {
  Eigen::Matrix<double, C, C> a = Eigen::Matrix<double, C, C>::Zero();
  Eigen::Matrix<double, C, 1> b = Eigen::Matrix<double, C, 1>::Zero();
  double zwz = 0.0;
  double sum_w = 0.0;
  double count = 0.0;

  FixedGram& operator+=(const FixedGram& o) {
    a += o.a;
    b += o.b;
    zwz += o.zwz;
    sum_w += o.sum_w;
    count += o.count;
    return *this;
  }
  FixedGram operator-(const FixedGram& o) const {
    FixedGram out;
    out.a = a - o.a;
    out.b = b - o.b;
    out.zwz = zwz - o.zwz;
    out.sum_w = sum_w - o.sum_w;
    out.count = count - o.count;
    return out;
  }
};

template <int C>
FixedGram<C> to_fixed(const GramBlock& g) {
  FixedGram<C> out;
  for (int r = 0; r < C; ++r) {
    for (int k = 0; k < C; ++k) out.a(r, k) = g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(k));
    out.b(r) = g.xtwz[static_cast<std::size_t>(r)];
  }
  out.zwz = g.zwz;
  out.sum_w = g.sum_w;
  out.count = g.count;
  return out;
}

template <int C>
struct RidgeChoice {
  Eigen::Matrix<double, C, 1> beta = Eigen::Matrix<double, C, 1>::Zero();
  double alpha = 0.0;
  double df = 0.0;
  double sse = 0.0;
  double gcv = 0.0;
};

double gcv_of(double sse, double df, double n) {
  const double resid_df = n - df;
  return resid_df > 0.0 ? n * sse / (resid_df * resid_df) : std::numeric_limits<double>::infinity();
}

// With the intercept unpenalized, the slope block of the ridge system reduces
// to the weighted-centered scatter S. One eigendecomposition S = V L V' then
// serves every alpha: slopes V (L + alpha)^-1 V's, df = 1 + sum l/(l + alpha).
template <int C>
RidgeChoice<C> select_ridge(const FixedGram<C>& g, std::span<const double> alpha_grid, double max_coef) {
  constexpr int S = C - 1;
  using Vec = Eigen::Matrix<double, S, 1>;
  using Mat = Eigen::Matrix<double, S, S>;
  const double n = g.count;
  const double sw = g.sum_w;

  RidgeChoice<C> fallback;
  fallback.alpha = *std::max_element(alpha_grid.begin(), alpha_grid.end());
  if (!(sw > 0.0)) {
    fallback.sse = std::max(g.zwz, 0.0);
    fallback.gcv = gcv_of(fallback.sse, 0.0, n);
    return fallback;
  }

  const double zbar = g.b(0) / sw;
  const Vec mean = g.a.template block<S, 1>(1, 0) / sw;
  const Mat sc = g.a.template bottomRightCorner<S, S>() - sw * mean * mean.transpose();
  const Vec sv = g.b.template tail<S>() - sw * zbar * mean;
  const double zc = g.zwz - sw * zbar * zbar;

  Vec lam;
  Mat vecs;
  if constexpr (S == 1) {
    lam(0) = sc(0, 0);
    vecs(0, 0) = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(sc);
    lam = es.eigenvalues();
    vecs = es.eigenvectors();
  }
  lam = lam.cwiseMax(0.0);
  const Vec u = vecs.transpose() * sv;
  Vec sd;
  for (int k = 0; k < S; ++k) sd(k) = std::sqrt(std::max(sc(k, k), 0.0) / sw);
  const double lam_min = lam.minCoeff();
  const double lam_max = lam.maxCoeff();

  std::optional<RidgeChoice<C>> best;
  std::optional<RidgeChoice<C>> heaviest;
  for (double alpha : alpha_grid) {
    if (!(lam_min + alpha >= kPivotTolerance * (lam_max + alpha)) || !(lam_max + alpha > 0.0)) continue;
    const Vec d = (lam.array() + alpha).inverse().matrix();
    const Vec slopes = vecs * d.cwiseProduct(u);
    if (!slopes.allFinite()) continue;
    RidgeChoice<C> fit;
    fit.alpha = alpha;
    fit.df = 1.0 + lam.cwiseProduct(d).sum();
    fit.sse = std::max(zc - (u.array().square() * d.array() * (2.0 - lam.array() * d.array())).sum(), 0.0);
    fit.gcv = gcv_of(fit.sse, fit.df, n);
    fit.beta(0) = zbar - mean.dot(slopes);
    fit.beta.template tail<S>() = slopes;

    bool violates = false;
    for (int k = 0; k < S; ++k)
      if (std::abs(slopes(k)) * sd(k) > max_coef) violates = true;
    if (!violates && (!best || fit.gcv < best->gcv)) best = fit;
    if (!heaviest || alpha >= heaviest->alpha) heaviest = fit;
  }
  if (best) return *best;
  if (heaviest) return *heaviest;

  fallback.beta(0) = zbar;
  fallback.sse = std::max(zc, 0.0);
  fallback.df = 1.0;
  fallback.gcv = gcv_of(fallback.sse, fallback.df, n);
  return fallback;
}

template <int C>
NodeModel to_node_model(const RidgeChoice<C>& c) {
  NodeModel m;
  m.coefficients.assign(c.beta.data(), c.beta.data() + C);
  m.alpha = c.alpha;
  m.df = c.df;
  m.gcv = c.gcv;
  m.sse = c.sse;
  return m;
}

// Calls f(std::integral_constant<int, C>) for the runtime column count c.
template <int C = 2, typename F>
void dispatch_cols(std::size_t c, F&& f) {
  if constexpr (C > static_cast<int>(kMaxDesignCols)) {
    throw_validation("design column count out of range");
  } else {
    if (c == static_cast<std::size_t>(C)) {
      f(std::integral_constant<int, C>{});
      return;
    }
    dispatch_cols<C + 1>(c, std::forward<F>(f));
  }
}

}  // namespace

NodeModel ridge_fit(const GramBlock& acc, std::span<const double> alpha_grid, double max_coef) {
  if (alpha_grid.empty()) throw_validation("alpha grid must be nonempty");
  if (acc.cols < 1) throw_validation("design column count out of range");
  if (acc.cols == 1) {
    NodeModel m;
    m.alpha = *std::max_element(alpha_grid.begin(), alpha_grid.end());
    if (acc.sum_w > 0.0) {
      m.coefficients = {acc.xtwz[0] / acc.sum_w};
      m.sse = std::max(acc.zwz - acc.xtwz[0] * acc.xtwz[0] / acc.sum_w, 0.0);
      m.df = 1.0;
    } else {
      m.coefficients = {0.0};
      m.sse = std::max(acc.zwz, 0.0);
    }
    m.gcv = gcv_of(m.sse, m.df, acc.count);
    return m;
  }
  NodeModel out;
  dispatch_cols(acc.cols, [&](auto cols) {
    constexpr int C = decltype(cols)::value;
    out = to_node_model(select_ridge<C>(to_fixed<C>(acc), alpha_grid, max_coef));
  });
  return out;
}

double gcv_score(const NodeModel& m, double n) {
  const double resid_df = n - m.df;
  if (!(resid_df > 0.0)) return std::numeric_limits<double>::infinity();
  const double inflate = n / resid_df;
  return m.sse * inflate * inflate;
}

double ModelBasedTree::eval_leaf(const NodeModel& m, double model_value) const {
  if (basis) {
    const SplinePoint p = basis->locate(model_value);
    return m.coefficients[0] + (1.0 - p.t) * m.coefficients[p.segment + 1] + p.t * m.coefficients[p.segment + 2];
  }
  return m.coefficients[0] + m.coefficients[1] * model_value;
}

double ModelBasedTree::predict_one(double model_value, double split_value) const {
  std::size_t idx = 0;
  while (!nodes[idx].is_leaf()) {
    const TreeNode& node = nodes[idx];
    idx = static_cast<std::size_t>(split_value <= node.threshold ? node.left : node.right);
  }
  return eval_leaf(nodes[idx].model, model_value);
}

std::vector<double> ModelBasedTree::predict(const Dataset& ds) const {
  if (model_var >= ds.cols() || split_var >= ds.cols()) throw_validation("tree variable outside dataset");
  const auto xm = ds.column(model_var);
  const auto xs = ds.column(split_var);
  std::vector<double> out(ds.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict_one(xm[i], xs[i]);
  return out;
}

std::size_t ModelBasedTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

GramAccumulator build_grams(const TreeData& data, std::span<const double> z, std::span<const double> w) {
  if (data.split_bins == nullptr) throw_validation("build_grams: split bins required");
  const BinIndex& bins = *data.split_bins;
  const std::size_t cols = data.basis ? data.basis->size() + 1 : 2;
  GramAccumulator acc(bins.bins(), cols);
  auto add_row = [&](std::size_t i) {
    const double wi = w[i];
    if (data.basis)
      acc.add_spline(bins.assignment[i], data.basis->locate(data.model_values[i]), z[i], wi);
    else
      acc.add_linear(bins.assignment[i], data.model_values[i], z[i], wi);
  };
  if (data.rows.empty()) {
    for (std::size_t i = 0; i < data.model_values.size(); ++i) add_row(i);
  } else {
    for (std::uint32_t i : data.rows) add_row(i);
  }
  return acc;
}

namespace {

template <int C>
class TreeGrower {
 public:
  TreeGrower(const GramAccumulator& acc, const BinIndex& bins, const TreeParams& params, ModelBasedTree& tree)
      : bins_(bins), params_(params), tree_(tree) {
    grams_.reserve(acc.bins());
    for (std::size_t b = 0; b < acc.bins(); ++b) grams_.push_back(to_fixed<C>(acc.block(b)));
  }

  double grow_root() {
    FixedGram<C> root;
    for (const auto& g : grams_) root += g;
    return grow(0, grams_.size(), 0, root, select(root));
  }

 private:
  RidgeChoice<C> select(const FixedGram<C>& g) const { return select_ridge<C>(g, params_.alpha_grid, params_.max_coef); }

  static double score(const RidgeChoice<C>& fit, double n) {
    const double resid_df = n - fit.df;
    if (!(resid_df > 0.0)) return std::numeric_limits<double>::infinity();
    const double inflate = n / resid_df;
    return fit.sse * inflate * inflate;
  }

  double grow(std::size_t lo, std::size_t hi, std::size_t depth, const FixedGram<C>& block, const RidgeChoice<C>& fit) {
    const auto idx = tree_.nodes.size();
    tree_.nodes.emplace_back();
    tree_.depth = std::max(tree_.depth, depth);

    if (depth < params_.max_depth && hi - lo >= 2) {
      const double parent_score = score(fit, block.count);
      double best_gain = 0.0;
      std::size_t best_cut = hi;
      RidgeChoice<C> best_left, best_right;
      FixedGram<C> best_left_block;
      FixedGram<C> left;
      for (std::size_t cut = lo; cut + 1 < hi; ++cut) {
        left += grams_[cut];
        if (left.count < static_cast<double>(params_.min_leaf) || left.sum_w <= kMinChildWeight) continue;
        const FixedGram<C> right = block - left;
        if (right.count < static_cast<double>(params_.min_leaf)) break;
        if (right.sum_w <= kMinChildWeight) continue;
        const RidgeChoice<C> lf = select(left);
        const RidgeChoice<C> rf = select(right);
        const double gain = parent_score - score(lf, left.count) - score(rf, right.count);
        if (gain > best_gain) {
          best_gain = gain;
          best_cut = cut;
          best_left = lf;
          best_right = rf;
          best_left_block = left;
        }
      }
      if (best_cut < hi) {
        const FixedGram<C> right_block = block - best_left_block;
        tree_.nodes[idx].threshold = bins_.edges[best_cut];
        const auto l = static_cast<std::int32_t>(tree_.nodes.size());
        const double sse_left = grow(lo, best_cut + 1, depth + 1, best_left_block, best_left);
        const auto r = static_cast<std::int32_t>(tree_.nodes.size());
        const double sse_right = grow(best_cut + 1, hi, depth + 1, right_block, best_right);
        tree_.nodes[idx].left = l;
        tree_.nodes[idx].right = r;
        return sse_left + sse_right;
      }
    }
    tree_.nodes[idx].model = to_node_model(fit);
    return fit.sse;
  }

  const BinIndex& bins_;
  const TreeParams& params_;
  ModelBasedTree& tree_;
  std::vector<FixedGram<C>> grams_;
};

}  // namespace

GrownTree grow_tree(const TreeSpec& spec, const TreeData& data, std::span<const double> z,
                    std::span<const double> w, const TreeParams& params) {
  if (data.split_bins == nullptr) throw_validation("grow_tree: split bins required");
  if (z.size() != data.model_values.size() || w.size() != z.size())
    throw_validation("grow_tree: z, w and model column lengths differ");
  if (spec.kind == TreeKind::Main && spec.model_var != spec.split_var)
    throw_validation("main-effect tree must split and model on the same variable");
  if (spec.kind == TreeKind::Interaction && spec.model_var == spec.split_var)
    throw_validation("interaction tree needs distinct split and model variables");
  if (data.basis && data.basis->size() > kMaxKnots) throw_validation("too many spline knots");

  GrownTree out;
  out.tree.kind = spec.kind;
  out.tree.model_var = spec.model_var;
  out.tree.split_var = spec.split_var;
  if (data.basis) out.tree.basis = *data.basis;

  if (params.alpha_grid.empty()) throw_validation("alpha grid must be nonempty");

  const GramAccumulator acc = build_grams(data, z, w);
  dispatch_cols(acc.cols(), [&](auto cols) {
    constexpr int C = decltype(cols)::value;
    TreeGrower<C> grower(acc, *data.split_bins, params, out.tree);
    out.sse = grower.grow_root();
  });
  return out;
}

GrownTree grow_tree(const TreeSpec& spec, const Dataset& ds, std::span<const double> z,
                    std::span<const double> w, const TreeParams& params, const SplineBasis* basis,
                    std::size_t max_bins) {
  if (spec.model_var >= ds.cols() || spec.split_var >= ds.cols()) throw_validation("tree variable outside dataset");
  const BinIndex bins = make_bins(ds.column(spec.split_var), max_bins);
  TreeData data{ds.column(spec.model_var), &bins, basis, {}};
  return grow_tree(spec, data, z, w, params);
}

TreeData FeatureFrame::main_data(std::size_t j, std::span<const std::uint32_t> rows) const {
  return TreeData{data->column(j), &bins[j], nullptr, rows};
}

TreeData FeatureFrame::interaction_data(Orientation o, std::span<const std::uint32_t> rows) const {
  return TreeData{data->column(o.model_var), &bins[o.split_var], interaction_basis(o.model_var), rows};
}

FeatureFrame make_frame(const Dataset& ds, std::size_t max_bins, std::size_t nknots) {
  if (nknots < 2 || nknots > kMaxKnots) throw_validation("nknots must lie in [2, " + std::to_string(kMaxKnots) + "]");
  FeatureFrame frame;
  frame.data = &ds;
  frame.nknots = nknots;
  frame.bins.reserve(ds.cols());
  frame.knots.reserve(ds.cols());
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    frame.bins.push_back(make_bins(ds.column(j), max_bins));
    frame.knots.push_back(quantile_knots(ds.column(j), nknots));
  }
  return frame;
}

}  // namespace gamitree
