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

#include "gamitree/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gamitree/error.hpp"
#include "gamitree/losses.hpp"

namespace gamitree::sim {

namespace {

// Stream ids keep predictor, noise and label draws independent per row.
enum Stream : std::uint64_t { kPredictorStream = 0, kNoiseStream = 1, kLabelStream = 2 };

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 row_stream(std::uint64_t seed, std::size_t row, Stream stream) {
  return std::mt19937_64(mix64(mix64(seed) ^ mix64(static_cast<std::uint64_t>(row) * 4 + stream)));
}

double pos(double x) { return x > 0.0 ? x : 0.0; }
double ind(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

void SimScenario::validate() const {
  if (model_id < 1 || model_id > 4) throw_validation("unknown model id " + std::to_string(model_id));
  if (n < 1) throw_validation("n must be at least 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw_validation("rho must lie in [0, 1)");
  if (!(noise_sd >= 0.0)) throw_validation("noise_sd must be >= 0");
}

std::vector<std::vector<double>> gen_predictors(const SimScenario& s) {
  s.validate();
  std::vector<std::vector<double>> cols(kPredictors, std::vector<double>(s.n));
  const double a = std::sqrt(s.rho);
  const double b = std::sqrt(1.0 - s.rho);
  for (std::size_t i = 0; i < s.n; ++i) {
    auto rng = row_stream(s.seed, i, kPredictorStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double u1 = normal(rng);
    const double u2 = normal(rng);
    for (std::size_t j = 0; j < kPredictors; ++j) {
      const double u = j < kModelBlock ? u1 : u2;
      cols[j][i] = clip(a * u + b * normal(rng), -kTruncation, kTruncation);
    }
  }
  return cols;
}

double eval_model_form(int model_id, std::span<const double> x) {
  if (x.size() < 10) throw_validation("model forms need at least 10 predictors");
  constexpr double pi = std::numbers::pi;
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4];
  const double x6 = x[5], x7 = x[6], x8 = x[7], x9 = x[8], x10 = x[9];

  // Shared additive part of every model form.
  const double additive = x1 + x2 + x3 + x4 + x5 + 0.5 * (x6 * x6 + x7 * x7 + x8 * x8) + x9 * ind(x9 > 0) +
                          x10 * ind(x10 > 0);
  switch (model_id) {
    case 1: {
      double inter = 0.0;
      for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t k = j + 1; k < 10; ++k) inter += 0.2 * x[j] * x[k];
      return additive + inter;
    }
    case 2:
      return additive + 0.25 * x1 * x2 + 0.25 * x1 * x3 * x3 + 0.25 * x4 * x4 * x5 * x5 + std::exp(x4 * x6 / 3.0) +
             x5 * x6 * ind(x5 > 0) * ind(x6 > 0) + clip(x7 + x8, -1.0, 0.0) + clip(x7 * x9, -1.0, 1.0) +
             ind(x8 > 0) * ind(x9 > 0);
    case 3:
      return additive + 0.25 * x1 * x1 * x2 * x2 + 2.0 * pos(x3 - 0.5) * pos(x4 - 0.5) +
             0.5 * std::sin(pi * x5) * std::sin(pi * x6) + 0.5 * std::sin(pi * (x7 + x8));
    case 4:
      return additive + x1 * x2 + x1 * x3 + x2 * x3 + 0.5 * x1 * x2 * x3 + x4 * x5 + x4 * x6 + x5 * x6 +
             0.5 * ind(x4 > 0) * x5 * x6;
    default:
      throw_validation("unknown model id " + std::to_string(model_id));
  }
}

std::vector<double> eval_model_form(int model_id, const std::vector<std::vector<double>>& columns) {
  if (columns.size() < 10) throw_validation("model forms need at least 10 predictors");
  const std::size_t n = columns.front().size();
  std::vector<double> g(n);
  std::vector<double> row(columns.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) row[j] = columns[j][i];
    g[i] = eval_model_form(model_id, row);
  }
  return g;
}

double balance_intercept(std::span<const double> g) {
  auto mean_p = [&](double b0) {
    double s = 0.0;
    for (double v : g) s += sigmoid(b0 + v);
    return s / static_cast<double>(g.size());
  };
  double lo = -20.0, hi = 20.0;
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double m = mean_p(mid);
    if (std::abs(m - 0.5) <= 1e-9) break;
    if (m < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

SimResponse gen_response(std::span<const double> g, const SimScenario& s) {
  s.validate();
  SimResponse out;
  out.y.resize(g.size());
  if (s.task == Task::Continuous) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto rng = row_stream(s.seed, i, kNoiseStream);
      std::normal_distribution<double> normal(0.0, 1.0);
      out.y[i] = g[i] + s.noise_sd * normal(rng);
    }
    return out;
  }
  out.beta0 = balance_intercept(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto rng = row_stream(s.seed, i, kLabelStream);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    out.y[i] = unif(rng) < sigmoid(out.beta0 + g[i]) ? 1.0 : 0.0;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> true_pairs(int model_id) {
  switch (model_id) {
    case 1: {
      std::vector<std::pair<std::size_t, std::size_t>> out;
      for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t k = j + 1; k < 10; ++k) out.emplace_back(j, k);
      return out;
    }
    case 2:
      return {{0, 1}, {0, 2}, {3, 4}, {3, 5}, {4, 5}, {6, 7}, {6, 8}, {7, 8}};
    case 3:
      return {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
    case 4:
      return {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}};
    default:
      throw_validation("unknown model id " + std::to_string(model_id));
  }
}

SimData simulate(const SimScenario& s) {
  s.validate();
  std::vector<std::vector<double>> cols = gen_predictors(s);
  std::vector<double> g = eval_model_form(s.model_id, cols);
  SimResponse resp = gen_response(g, s);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < kPredictors; ++j) names.push_back("x" + std::to_string(j + 1));
  SimData out{Dataset(std::move(names), std::move(cols), std::move(resp.y), s.task), std::move(g), resp.beta0};
  return out;
}

SimSplit simulate_split(const SimScenario& s) {
  if (s.n < 4) throw_validation("n must be at least 4 for a train/validation/test split");
  SimData d = simulate(s);
  const std::size_t n_train = s.n / 2;
  const std::size_t n_valid = s.n / 4;
  auto rows = [](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> r;
    for (std::size_t i = lo; i < hi; ++i) r.push_back(i);
    return r;
  };
  const auto tr = rows(0, n_train);
  const auto va = rows(n_train, n_train + n_valid);
  const auto te = rows(n_train + n_valid, s.n);
  return SimSplit{d.data.take_rows(tr), d.data.take_rows(va), d.data.take_rows(te), d.beta0};
}

}  // namespace gamitree::sim
