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

#ifndef GAMITREE_FILTER_HPP
#define GAMITREE_FILTER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gamitree/dataset.hpp"
#include "gamitree/mbtree.hpp"

namespace gamitree {

struct PairScore {
  std::size_t j = 0;  // j < k
  std::size_t k = 0;
  double sse_jk = 0.0;  // model x_j, split x_k
  double sse_kj = 0.0;  // model x_k, split x_j
  double score = 0.0;   // min of the two (FAST: the quadrant SSE)
};

struct PairRanking {
  std::vector<PairScore> scores;  // every evaluated pair, j < k order
  std::vector<PairScore> top_pairs;  // best q, ascending score
  std::vector<Orientation> combos;   // top pairs, then their reversals
};

struct FilterParams {
  TreeParams tree{.max_depth = 2};
  std::size_t subsample = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 0;
};

// Scores every variable pair by the smaller weighted SSE of its two
// interaction-tree orientations fitted to the pseudo-response at `g`.
PairRanking filter_interactions(const FeatureFrame& train, std::span<const double> g, std::size_t q,
                                const FilterParams& params);

// Four-quadrant baseline: the best weighted SSE of per-quadrant constants over
// every pair of cut points taken from the two variables' bin edges.
double fast_score(const BinIndex& bins_j, const BinIndex& bins_k, std::span<const double> z,
                  std::span<const double> w, std::span<const std::uint32_t> rows = {});

// Same ranking layout as filter_interactions, scored by fast_score.
PairRanking fast_filter(const FeatureFrame& train, std::span<const double> g, std::size_t q,
                        const FilterParams& params);

// Orders pairs ascending by score (ties by (j, k)) and keeps the best q.
void rank_pairs(PairRanking& ranking, std::size_t q);

// Seeded sorted sample of min(n, cap) row ids; empty when no subsampling is
// needed.
std::vector<std::uint32_t> subsample_rows(std::size_t n, std::size_t cap, std::uint64_t seed);

void write_ranking_csv(const std::string& path, const PairRanking& ranking, const std::vector<std::string>& names);

}  // namespace gamitree

#endif  // GAMITREE_FILTER_HPP
