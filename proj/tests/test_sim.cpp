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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gamitree/error.hpp"
#include "gamitree/losses.hpp"
#include "gamitree/metrics.hpp"
#include "gamitree/sim.hpp"

using namespace gamitree;
using namespace gamitree::sim;

namespace {

double corr(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Correlation of two equicorrelated standard normals after clipping to
// [-2.5, 2.5], by plain Monte Carlo with an unrelated generator.
double clipped_corr_oracle(double rho) {
  std::minstd_rand rng(12345);
  std::normal_distribution<double> nd;
  const std::size_t n = 400000;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = nd(rng);
    a[i] = std::clamp(std::sqrt(rho) * u + std::sqrt(1 - rho) * nd(rng), -2.5, 2.5);
    b[i] = std::clamp(std::sqrt(rho) * u + std::sqrt(1 - rho) * nd(rng), -2.5, 2.5);
  }
  return corr(a, b);
}

std::vector<double> zeros() { return std::vector<double>(kPredictors, 0.0); }

}  // namespace

TEST_CASE("scenario validation") {
  SimScenario s;
  CHECK_NOTHROW(s.validate());
  s.rho = 1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.rho = -0.1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = SimScenario{};
  s.model_id = 5;
  CHECK_THROWS_AS(s.validate(), Error);
  s = SimScenario{};
  s.n = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = SimScenario{};
  s.noise_sd = -1;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("independent predictors are uncorrelated and bounded") {
  SimScenario s;
  s.n = 20000;
  s.rho = 0.0;
  const auto cols = gen_predictors(s);
  REQUIRE(cols.size() == kPredictors);
  for (const auto& c : cols) {
    CHECK(c.size() == s.n);
    for (double v : c) {
      CHECK(v >= -kTruncation);
      CHECK(v <= kTruncation);
    }
  }
  for (std::size_t j = 0; j < kPredictors; ++j)
    for (std::size_t k = j + 1; k < kPredictors; ++k) CHECK(std::abs(corr(cols[j], cols[k])) <= 0.03);
  CHECK(std::abs(corr(cols[0], cols[1])) <= 0.015);
  CHECK(std::abs(corr(cols[3], cols[17])) <= 0.015);
}

TEST_CASE("correlated predictors match the clipped-normal oracle") {
  SimScenario s;
  s.n = 40000;
  s.rho = 0.5;
  const auto cols = gen_predictors(s);
  const double target = clipped_corr_oracle(0.5);
  CHECK(target < 0.5);
  CHECK(target > 0.48);
  for (auto [j, k] : std::vector<std::pair<int, int>>{{0, 1}, {2, 9}, {5, 19}, {20, 29}}) {
    CAPTURE(j);
    CAPTURE(k);
    CHECK(std::abs(corr(cols[j], cols[k]) - target) <= 0.015);
  }
  // Different blocks are independent.
  CHECK(std::abs(corr(cols[0], cols[25])) <= 0.015);
  // Clipping occurs at the expected rate: P(|Z| > 2.5) is about 1.24%.
  std::size_t clipped = 0;
  for (double v : cols[3]) clipped += std::abs(v) == kTruncation;
  CHECK(std::abs(static_cast<double>(clipped) / s.n - 0.0124) <= 0.003);
}

TEST_CASE("single-row scenarios work") {
  SimScenario s;
  s.n = 1;
  const SimData d = simulate(s);
  CHECK(d.data.rows() == 1);
  CHECK(d.data.cols() == kPredictors);
  CHECK(d.data.name(0) == "x1");
  CHECK(d.data.name(29) == "x30");
  s.n = 3;
  CHECK_THROWS_AS(simulate_split(s), Error);
}

TEST_CASE("model forms at reference points") {
  const auto x0 = zeros();
  CHECK(eval_model_form(1, x0) == 0.0);
  CHECK(eval_model_form(2, x0) == 1.0);  // exp(0)
  CHECK(eval_model_form(3, x0) == 0.0);
  CHECK(eval_model_form(4, x0) == 0.0);

  auto x = zeros();
  x[2] = 1.0;
  x[3] = 1.0;
  // Additive part 2, hinge product 2 * 0.5 * 0.5.
  CHECK(eval_model_form(3, x) == doctest::Approx(2.5).epsilon(1e-15));

  x = zeros();
  x[0] = 1.0;
  x[1] = 1.0;
  // Additive 2 plus 0.2 x1 x2.
  CHECK(eval_model_form(1, x) == doctest::Approx(2.2).epsilon(1e-15));

  x = zeros();
  x[5] = 2.0;
  CHECK(eval_model_form(1, x) == doctest::Approx(2.0).epsilon(1e-15));

  x = zeros();
  x[8] = -1.0;
  x[9] = 2.0;
  CHECK(eval_model_form(4, x) == doctest::Approx(2.0).epsilon(1e-15));

  x = zeros();
  x[3] = 1.0;
  x[4] = 1.0;
  x[5] = 1.0;
  // Additive 2 + 0.5, three products 3, gated triple 0.5.
  CHECK(eval_model_form(4, x) == doctest::Approx(6.0).epsilon(1e-15));

  CHECK_THROWS_AS(eval_model_form(2, std::vector<double>(9, 0.0)), Error);
  CHECK_THROWS_AS(eval_model_form(7, x0), Error);
}

TEST_CASE("model 2 clipped terms saturate") {
  auto x = zeros();
  x[6] = -3.0;
  x[7] = -3.0;
  // clip(x7 + x8, -1, 0) = -1; clip(x7 x9, -1, 1) = 0.
  const double additive = 0.5 * (9 + 9);
  CHECK(eval_model_form(2, x) == doctest::Approx(additive + 1.0 - 1.0).epsilon(1e-15));
  x[8] = 2.0;
  // x9 adds 2 (positive part), clip(x7 x9) = -1, indicator(x8>0) = 0.
  CHECK(eval_model_form(2, x) == doctest::Approx(additive + 2.0 + 1.0 - 1.0 - 1.0).epsilon(1e-15));
  CHECK(clip(2.0, -1.0, 1.0) == 1.0);
  CHECK(clip(-2.0, -1.0, 1.0) == -1.0);
  CHECK(clip(0.3, -1.0, 1.0) == 0.3);
}

TEST_CASE("vectorized model forms agree with the row form") {
  SimScenario s;
  s.n = 200;
  s.rho = 0.3;
  const auto cols = gen_predictors(s);
  for (int m = 1; m <= 4; ++m) {
    const auto g = eval_model_form(m, cols);
    for (std::size_t i = 0; i < s.n; ++i) {
      std::vector<double> row(kPredictors);
      for (std::size_t j = 0; j < kPredictors; ++j) row[j] = cols[j][i];
      CHECK(g[i] == eval_model_form(m, row));
    }
  }
}

TEST_CASE("continuous responses") {
  SimScenario s;
  s.n = 20000;
  s.model_id = 2;
  s.noise_sd = 0.0;
  SimData d = simulate(s);
  for (std::size_t i = 0; i < s.n; ++i) CHECK(d.data.target()[i] == d.g[i]);

  s.noise_sd = 0.5;
  d = simulate(s);
  std::vector<double> resid(s.n);
  for (std::size_t i = 0; i < s.n; ++i) resid[i] = d.data.target()[i] - d.g[i];
  CHECK(population_std(resid) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(mse(d.data.target(), d.g) == doctest::Approx(0.25).epsilon(0.04));
  CHECK(d.beta0 == 0.0);
}

TEST_CASE("binary responses are balanced") {
  for (int m = 1; m <= 4; ++m) {
    SimScenario s;
    s.n = 20000;
    s.model_id = m;
    s.rho = 0.5;
    s.task = Task::Binary;
    const SimData d = simulate(s);
    double mp = 0.0, my = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      mp += sigmoid(d.beta0 + d.g[i]);
      my += d.data.target()[i];
      CHECK((d.data.target()[i] == 0.0 || d.data.target()[i] == 1.0));
    }
    mp /= s.n;
    my /= s.n;
    CHECK(mp >= 0.499);
    CHECK(mp <= 0.501);
    // Bernoulli sampling noise around one half.
    CHECK(std::abs(my - 0.5) <= 4.0 * 0.5 / std::sqrt(static_cast<double>(s.n)));
    CHECK(d.beta0 == balance_intercept(d.g));
  }
}

TEST_CASE("balance intercept examples") {
  CHECK(std::abs(balance_intercept(std::vector<double>{0.0, 0.0})) <= 1e-6);
  CHECK(balance_intercept(std::vector<double>{3.0, 3.0}) == doctest::Approx(-3.0).epsilon(1e-6));
  // Symmetric scores need no shift.
  CHECK(std::abs(balance_intercept(std::vector<double>{-2.0, 1.0, 2.0, -1.0})) <= 1e-6);
}

TEST_CASE("simulation is deterministic and seed dependent") {
  SimScenario s;
  s.n = 500;
  s.rho = 0.5;
  s.model_id = 3;
  const SimData a = simulate(s);
  const SimData b = simulate(s);
  for (std::size_t j = 0; j < kPredictors; ++j) {
    const auto ca = a.data.column(j);
    const auto cb = b.data.column(j);
    CHECK(std::equal(ca.begin(), ca.end(), cb.begin()));
  }
  CHECK(std::equal(a.data.target().begin(), a.data.target().end(), b.data.target().begin()));

  // Rows do not depend on n: a longer run extends a shorter one.
  SimScenario longer = s;
  longer.n = 800;
  const SimData c = simulate(longer);
  for (std::size_t i = 0; i < s.n; ++i) CHECK(c.data.target()[i] == a.data.target()[i]);

  s.seed = 2;
  const SimData e = simulate(s);
  CHECK(e.data.column(0)[0] != a.data.column(0)[0]);
}

TEST_CASE("train, validation and test splits") {
  SimScenario s;
  s.n = 1001;
  const SimSplit sp = simulate_split(s);
  CHECK(sp.train.rows() == 500);
  CHECK(sp.valid.rows() == 250);
  CHECK(sp.test.rows() == 251);
  const SimData all = simulate(s);
  CHECK(sp.train.target()[0] == all.data.target()[0]);
  CHECK(sp.valid.target()[0] == all.data.target()[500]);
  CHECK(sp.test.target()[250] == all.data.target()[1000]);
}

TEST_CASE("true interaction pairs") {
  CHECK(true_pairs(1).size() == 45);
  CHECK(true_pairs(2).size() == 8);
  CHECK(true_pairs(3).size() == 4);
  CHECK(true_pairs(4).size() == 6);
  for (int m = 1; m <= 4; ++m) {
    for (auto [j, k] : true_pairs(m)) {
      CHECK(j < k);
      CHECK(k < 10);
    }
  }
  CHECK_THROWS_AS(true_pairs(0), Error);
}

TEST_CASE("true pairs carry interaction, others are additive") {
  // Mixed second difference g(a,b) - g(a,b') - g(a',b) + g(a',b') vanishes
  // exactly for additive pairs.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int m = 1; m <= 4; ++m) {
    const auto pairs = true_pairs(m);
    for (std::size_t j = 0; j < 10; ++j) {
      for (std::size_t k = j + 1; k < 10; ++k) {
        const bool truth = std::find(pairs.begin(), pairs.end(), std::pair(j, k)) != pairs.end();
        double worst = 0.0;
        for (int t = 0; t < 40; ++t) {
          std::vector<double> x(kPredictors);
          for (double& v : x) v = u(rng);
          const double a = x[j], b = x[k], a2 = u(rng), b2 = u(rng);
          auto g = [&](double xj, double xk) {
            x[j] = xj;
            x[k] = xk;
            return eval_model_form(m, x);
          };
          worst = std::max(worst, std::abs(g(a, b) - g(a, b2) - g(a2, b) + g(a2, b2)));
        }
        CAPTURE(m);
        CAPTURE(j);
        CAPTURE(k);
        if (truth)
          CHECK(worst > 1e-6);
        else
          CHECK(worst <= 1e-12);
      }
    }
  }
}
