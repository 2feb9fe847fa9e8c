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

#ifndef GAMITREE_METRICS_HPP
#define GAMITREE_METRICS_HPP

#include <span>

namespace gamitree {

double mse(std::span<const double> y, std::span<const double> pred);

// Area under the ROC curve by the rank-sum formula with tie midranks.
// Returns 0.5 when only one class is present.
double auc(std::span<const double> y, std::span<const double> score);

// Population standard deviation.
double population_std(std::span<const double> v);

}  // namespace gamitree

#endif  // GAMITREE_METRICS_HPP
