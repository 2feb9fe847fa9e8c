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

#include "gamitree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gamitree/error.hpp"
#include "gamitree/format.hpp"

namespace gamitree {

const char* task_name(Task task) { return task == Task::Binary ? "binary" : "continuous"; }

Task parse_task(const std::string& name) {
  if (name == "continuous") return Task::Continuous;
  if (name == "binary") return Task::Binary;
  throw_validation("unknown task '" + name + "' (expected continuous or binary)");
}

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                 std::vector<double> target, Task task)
    : names_(std::move(names)), columns_(std::move(columns)), target_(std::move(target)), task_(task) {
  if (names_.size() != columns_.size()) throw_validation("column name count does not match column count");
  if (target_.empty()) throw_validation("dataset must have at least one row");
  std::set<std::string> seen;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (names_[j].empty()) throw_validation("column " + std::to_string(j) + " has an empty name");
    if (!seen.insert(names_[j]).second) throw_validation("duplicate column name '" + names_[j] + "'");
    if (columns_[j].size() != target_.size())
      throw_validation("column '" + names_[j] + "' has " + std::to_string(columns_[j].size()) +
                       " rows, target has " + std::to_string(target_.size()));
  }
  if (task_ == Task::Binary) {
    for (std::size_t i = 0; i < target_.size(); ++i)
      if (target_[i] != 0.0 && target_[i] != 1.0)
        throw_data("binary target must be 0 or 1 (row " + std::to_string(i + 1) + ")");
  }
}

std::size_t Dataset::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return static_cast<std::size_t>(it - names_.begin());
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t i : rows) cols[j].push_back(columns_[j][i]);
  }
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t i : rows) y.push_back(target_[i]);
  return Dataset(names_, std::move(cols), std::move(y), task_);
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& target_name, Task task,
                  const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw_data(source + ": empty file, header row expected");
  std::vector<std::string> header;
  for (auto cell : split_line(line)) header.emplace_back(trim(cell));

  // An empty target name reads features only; the target is then all zeros.
  const bool has_target = !target_name.empty();
  std::size_t target_col = header.size();
  if (has_target) {
    auto target_it = std::find(header.begin(), header.end(), target_name);
    if (target_it == header.end())
      throw_data(source + ": target column not found: '" + target_name + "'");
    target_col = static_cast<std::size_t>(target_it - header.begin());
  }

  std::vector<std::vector<double>> raw(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw_data(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                 " fields, header has " + std::to_string(header.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      auto cell = trim(cells[j]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
        throw_data(source + ": row " + std::to_string(row) + ", column '" + header[j] +
                   "': not a finite number: '" + std::string(cell) + "'");
      raw[j].push_back(v);
    }
  }
  if (row == 0) throw_data(source + ": no data rows");

  std::vector<double> target = has_target ? std::move(raw[target_col]) : std::vector<double>(row, 0.0);
  if (task == Task::Binary) {
    for (std::size_t i = 0; i < target.size(); ++i)
      if (target[i] != 0.0 && target[i] != 1.0)
        throw_data(source + ": row " + std::to_string(i + 1) + ", column '" + target_name +
                   "': binary target must be 0 or 1");
  }
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == target_col) continue;
    names.push_back(header[j]);
    cols.push_back(std::move(raw[j]));
  }
  return Dataset(std::move(names), std::move(cols), std::move(target), task);
}

Dataset load_csv(const std::string& path, const std::string& target_name, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), target_name, task, path);
}

void write_csv(const std::string& path, const Dataset& ds, const std::string& target_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write file: " + path);
  std::string line;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    line += ds.name(j);
    line += ',';
  }
  line += target_name;
  line += '\n';
  out << line;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      append_double(line, ds.column(j)[i]);
      line += ',';
    }
    append_double(line, ds.target()[i]);
    line += '\n';
    out << line;
  }
  if (!out) throw_data("write failed: " + path);
}

std::pair<Dataset, Dataset> split_train_valid(const Dataset& ds, double valid_fraction,
                                              std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
    throw_validation("validation fraction must lie in (0, 1)");
  const std::size_t n = ds.rows();
  if (n < 2) throw_validation("cannot split a dataset with fewer than 2 rows");
  const auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * valid_fraction));
  if (n_valid == 0 || n_valid >= n) throw_validation("split would leave an empty train or validation set");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t k = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[k]);
  }
  std::vector<std::size_t> valid_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_valid));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_valid), order.end());
  std::sort(valid_rows.begin(), valid_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  return {ds.take_rows(train_rows), ds.take_rows(valid_rows)};
}

std::size_t BinIndex::bin_of(double x) const {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
}

BinIndex make_bins(std::span<const double> x, std::size_t max_bins) {
  if (max_bins < 2) throw_validation("max_bins must be at least 2");
  if (max_bins > kMaxBinsLimit) throw_validation("max_bins exceeds " + std::to_string(kMaxBinsLimit));
  BinIndex out;
  if (x.empty()) return out;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  if (distinct.size() <= max_bins) {
    out.edges.assign(distinct.begin(), distinct.end() - 1);
  } else {
    const std::size_t n = sorted.size();
    const double top = sorted.back();
    for (std::size_t b = 1; b < max_bins; ++b) {
      // Upper edge of bin b-1 is the ceil(b*n/B)-th order statistic.
      const std::size_t pos = (b * n + max_bins - 1) / max_bins;
      const double e = sorted[pos - 1];
      if (e >= top) break;
      if (out.edges.empty() || e > out.edges.back()) out.edges.push_back(e);
    }
  }
  out.assignment.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.assignment[i] = static_cast<std::uint16_t>(out.bin_of(x[i]));
  return out;
}

SplineBasis::SplineBasis(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw_validation("spline basis needs at least 2 knots");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1])) throw_validation("spline knots must be strictly ascending");
}

SplinePoint SplineBasis::locate(double x) const {
  const std::size_t last = knots_.size() - 1;
  if (!(x > knots_.front())) return {0, 0.0};
  if (x >= knots_[last]) return {last - 1, 1.0};
  // First knot strictly greater than x; x lies in [knots[s], knots[s+1]).
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t s = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double t = (x - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return {s, t};
}

std::vector<double> SplineBasis::eval(double x) const {
  std::vector<double> out(knots_.size(), 0.0);
  const SplinePoint p = locate(x);
  out[p.segment] = 1.0 - p.t;
  out[p.segment + 1] += p.t;
  return out;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SplineBasis quantile_knots(std::span<const double> x, std::size_t nknots) {
  if (nknots < 2) throw_validation("nknots must be at least 2");
  if (x.empty()) throw_validation("cannot place knots on an empty column");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots;
  for (std::size_t i = 0; i < nknots; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(nknots - 1);
    const double q = i + 1 == nknots ? sorted.back() : sorted_quantile(sorted, p);
    if (knots.empty() || q > knots.back()) knots.push_back(q);
  }
  if (knots.size() < 2) knots = {sorted.front(), sorted.back() + 1.0};
  return SplineBasis(std::move(knots));
}

}  // namespace gamitree
