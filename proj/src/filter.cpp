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

#include "gamitree/filter.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "gamitree/error.hpp"
#include "gamitree/format.hpp"
#include "gamitree/losses.hpp"

namespace gamitree {

std::vector<std::uint32_t> subsample_rows(std::size_t n, std::size_t cap, std::uint64_t seed) {
  if (cap == 0 || n <= cap) return {};
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t k = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(ids[i], ids[k]);
  }
  ids.resize(cap);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void rank_pairs(PairRanking& ranking, std::size_t q) {
  std::vector<PairScore> sorted = ranking.scores;
  std::stable_sort(sorted.begin(), sorted.end(), [](const PairScore& a, const PairScore& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  });
  sorted.resize(std::min(q, sorted.size()));
  ranking.top_pairs = sorted;
  ranking.combos.clear();
  for (const auto& p : sorted) ranking.combos.push_back({p.j, p.k});
  for (const auto& p : sorted) ranking.combos.push_back({p.k, p.j});
}

namespace {

std::vector<PairScore> all_pairs(std::size_t p) {
  std::vector<PairScore> out;
  out.reserve(p * (p - 1) / 2);
  for (std::size_t j = 0; j + 1 < p; ++j)
    for (std::size_t k = j + 1; k < p; ++k) out.push_back({j, k, 0.0, 0.0, 0.0});
  return out;
}

}  // namespace

PairRanking filter_interactions(const FeatureFrame& train, std::span<const double> g, std::size_t q,
                                const FilterParams& params) {
  if (q < 1) throw_validation("npairs must be at least 1");
  const std::size_t p = train.cols();
  if (p < 2) throw_validation("interaction filtering needs at least 2 predictors");
  const Dataset& ds = *train.data;
  const LossGrad lg = grad_hess(ds.target(), g, ds.task());
  const std::vector<std::uint32_t> rows = subsample_rows(ds.rows(), params.subsample, params.seed);

  PairRanking out;
  out.scores = all_pairs(p);
  const int threads = params.threads > 0 ? params.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t idx = 0; idx < out.scores.size(); ++idx) {
    PairScore& ps = out.scores[idx];
    const Orientation jk{ps.j, ps.k};
    const Orientation kj{ps.k, ps.j};
    ps.sse_jk = grow_tree(TreeSpec{TreeKind::Interaction, jk.model_var, jk.split_var}, train.interaction_data(jk, rows),
                          lg.z, lg.hess, params.tree).sse;
    ps.sse_kj = grow_tree(TreeSpec{TreeKind::Interaction, kj.model_var, kj.split_var}, train.interaction_data(kj, rows),
                          lg.z, lg.hess, params.tree).sse;
    ps.score = std::min(ps.sse_jk, ps.sse_kj);
  }
  rank_pairs(out, q);
  return out;
}

double fast_score(const BinIndex& bins_j, const BinIndex& bins_k, std::span<const double> z,
                  std::span<const double> w, std::span<const std::uint32_t> rows) {
  const std::size_t bj = bins_j.bins();
  const std::size_t bk = bins_k.bins();
  // Cell sums of w, wz and wz^2; then 2-D inclusive prefix sums.
  const std::size_t stride = bk + 1;
  std::vector<double> sw((bj + 1) * stride, 0.0), swz((bj + 1) * stride, 0.0);
  double total_wzz = 0.0;
  auto add = [&](std::size_t i) {
    const std::size_t cell = (bins_j.assignment[i] + 1) * stride + bins_k.assignment[i] + 1;
    sw[cell] += w[i];
    swz[cell] += w[i] * z[i];
    total_wzz += w[i] * z[i] * z[i];
  };
  if (rows.empty()) {
    for (std::size_t i = 0; i < z.size(); ++i) add(i);
  } else {
    for (std::uint32_t i : rows) add(i);
  }
  for (std::size_t a = 1; a <= bj; ++a) {
    for (std::size_t b = 1; b <= bk; ++b) {
      const std::size_t c = a * stride + b;
      sw[c] += sw[c - stride] + sw[c - 1] - sw[c - stride - 1];
      swz[c] += swz[c - stride] + swz[c - 1] - swz[c - stride - 1];
    }
  }
  auto explained = [](double w_sum, double wz_sum) { return w_sum > 0.0 ? wz_sum * wz_sum / w_sum : 0.0; };
  const double tw = sw[bj * stride + bk];
  const double twz = swz[bj * stride + bk];
  // Cut a in [0, bj] puts bins < a on the low side of x_j (a = 0 or bj means
  // no cut); likewise for b on x_k.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a <= bj; ++a) {
    const double rw = sw[a * stride + bk];
    const double rwz = swz[a * stride + bk];
    for (std::size_t b = 0; b <= bk; ++b) {
      const double llw = sw[a * stride + b];
      const double llz = swz[a * stride + b];
      const double cw = sw[bj * stride + b];
      const double cz = swz[bj * stride + b];
      const double lhw = rw - llw, lhz = rwz - llz;  // low j, high k
      const double hlw = cw - llw, hlz = cz - llz;   // high j, low k
      const double hhw = tw - rw - cw + llw, hhz = twz - rwz - cz + llz;
      const double sse = total_wzz - explained(llw, llz) - explained(lhw, lhz) - explained(hlw, hlz) -
                         explained(hhw, hhz);
      if (sse < best) best = sse;
    }
  }
  return std::max(best, 0.0);
}

PairRanking fast_filter(const FeatureFrame& train, std::span<const double> g, std::size_t q,
                        const FilterParams& params) {
  if (q < 1) throw_validation("npairs must be at least 1");
  const std::size_t p = train.cols();
  if (p < 2) throw_validation("interaction filtering needs at least 2 predictors");
  const Dataset& ds = *train.data;
  const LossGrad lg = grad_hess(ds.target(), g, ds.task());
  const std::vector<std::uint32_t> rows = subsample_rows(ds.rows(), params.subsample, params.seed);

  PairRanking out;
  out.scores = all_pairs(p);
  const int threads = params.threads > 0 ? params.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t idx = 0; idx < out.scores.size(); ++idx) {
    PairScore& ps = out.scores[idx];
    ps.score = fast_score(train.bins[ps.j], train.bins[ps.k], lg.z, lg.hess, rows);
    ps.sse_jk = ps.sse_kj = ps.score;
  }
  rank_pairs(out, q);
  return out;
}

void write_ranking_csv(const std::string& path, const PairRanking& ranking, const std::vector<std::string>& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write file: " + path);
  std::vector<PairScore> sorted = ranking.scores;
  std::stable_sort(sorted.begin(), sorted.end(), [](const PairScore& a, const PairScore& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  });
  std::string text = "pair_j,pair_k,sse,rank\n";
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    text += names.at(sorted[r].j) + "," + names.at(sorted[r].k) + ",";
    append_double(text, sorted[r].score);
    text += "," + std::to_string(r + 1) + "\n";
  }
  out << text;
  if (!out) throw_data("write failed: " + path);
}

}  // namespace gamitree
