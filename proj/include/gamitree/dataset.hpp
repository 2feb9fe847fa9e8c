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

#ifndef GAMITREE_DATASET_HPP
#define GAMITREE_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gamitree {

enum class Task { Continuous, Binary };

const char* task_name(Task task);
Task parse_task(const std::string& name);

// Column-major numeric table plus a target. Immutable once constructed.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
          std::vector<double> target, Task task);

  std::size_t rows() const { return target_.size(); }
  std::size_t cols() const { return columns_.size(); }
  Task task() const { return task_; }

  std::span<const double> column(std::size_t j) const { return columns_[j]; }
  std::span<const double> target() const { return target_; }
  const std::string& name(std::size_t j) const { return names_[j]; }
  const std::vector<std::string>& names() const { return names_; }

  // Index of the named column, or cols() when absent.
  std::size_t find(const std::string& name) const;

  Dataset take_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> target_;
  Task task_ = Task::Continuous;
};

// Reads a header-row CSV. Every cell must parse as a finite number.
Dataset load_csv(const std::string& path, const std::string& target_name, Task task);

// Parses CSV text already in memory; `source` labels error messages.
Dataset parse_csv(const std::string& text, const std::string& target_name, Task task,
                  const std::string& source = "<memory>");

void write_csv(const std::string& path, const Dataset& ds, const std::string& target_name);

// Seeded random partition; returns (train, valid) with round(n * valid_fraction)
// validation rows.
std::pair<Dataset, Dataset> split_train_valid(const Dataset& ds, double valid_fraction,
                                              std::uint64_t seed);

// Quantile binning of a splitting variable with right-closed intervals
// (-inf, e0], (e0, e1], ..., (e_{B-2}, +inf).
struct BinIndex {
  std::vector<double> edges;
  std::vector<std::uint16_t> assignment;

  std::size_t bins() const { return edges.size() + 1; }
  bool splittable() const { return !edges.empty(); }
  std::size_t bin_of(double x) const;
};

inline constexpr std::size_t kDefaultMaxBins = 256;
inline constexpr std::size_t kMaxBinsLimit = 65536;

BinIndex make_bins(std::span<const double> x, std::size_t max_bins = kDefaultMaxBins);

// Position of a point inside a linear B-spline basis: the point has weight
// (1 - t) on hat function `segment` and t on hat function `segment + 1`.
struct SplinePoint {
  std::size_t segment;
  double t;
};

// Linear (degree 1) B-spline basis over strictly ascending knots. Inputs
// outside the knot range are clamped to the boundary.
class SplineBasis {
 public:
  SplineBasis() = default;
  explicit SplineBasis(std::vector<double> knots);

  std::size_t size() const { return knots_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  static constexpr int degree() { return 1; }

  SplinePoint locate(double x) const;
  std::vector<double> eval(double x) const;

 private:
  std::vector<double> knots_;
};

SplineBasis quantile_knots(std::span<const double> x, std::size_t nknots);

inline std::vector<double> eval_basis(const SplineBasis& basis, double x) { return basis.eval(x); }

// Linear-interpolation empirical quantile of sorted data, p in [0, 1].
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace gamitree

#endif  // GAMITREE_DATASET_HPP
