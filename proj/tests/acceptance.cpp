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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gamitree/boost.hpp"
#include "gamitree/filter.hpp"
#include "gamitree/format.hpp"
#include "gamitree/gami.hpp"
#include "gamitree/losses.hpp"
#include "gamitree/mbtree.hpp"
#include "gamitree/metrics.hpp"
#include "gamitree/purify.hpp"
#include "gamitree/sim.hpp"
#include "oracle.hpp"

using namespace gamitree;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int g_failures = 0;
std::FILE* g_report = nullptr;  // copy of stdout, kept when ctest hides output

void emit(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  if (g_report) {
    std::fprintf(g_report, "%s\n", line.c_str());
    std::fflush(g_report);
  }
}

void report(int id, bool pass, const std::string& detail) {
  emit("criterion " + std::to_string(id) + ": " + (pass ? "PASS" : "FAIL") + "  " + detail);
  if (!pass) ++g_failures;
}

void info(const std::string& msg) { emit("info: " + msg); }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

sim::SimSplit simulate(int model, std::size_t n, double rho, Task task, std::uint64_t seed) {
  sim::SimScenario s;
  s.model_id = model;
  s.n = n;
  s.rho = rho;
  s.task = task;
  s.seed = seed;
  return sim::simulate_split(s);
}

double test_mse(const FittedModel& m, const Dataset& test) { return mse(test.target(), predict(m, test)); }

// ---- purification checks ---------------------------------------------------

struct PurifyStats {
  double conservation = 0.0;
  double orthogonality = 0.0;
  double main_mean = 0.0;
  double idempotence = 0.0;
  void merge(const PurifyStats& o) {
    conservation = std::max(conservation, o.conservation);
    orthogonality = std::max(orthogonality, o.orthogonality);
    main_mean = std::max(main_mean, o.main_mean);
    idempotence = std::max(idempotence, o.idempotence);
  }
};

// Uncentered R^2 of v on the hat functions of x. The hats sum to one, so
// their span already contains the constants.
double projection_r2(const std::vector<double>& v, std::span<const double> x, const SplineBasis& basis) {
  const auto k = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd xtv = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd row(k);
  double vv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto h = basis.eval(x[i]);
    for (Eigen::Index c = 0; c < k; ++c) row(c) = h[static_cast<std::size_t>(c)];
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
    xtv += v[i] * row;
    vv += v[i] * v[i];
  }
  xtx = xtx.selfadjointView<Eigen::Lower>();
  const Eigen::VectorXd b = xtx.ldlt().solve(xtv);
  return vv > 0.0 ? std::max(0.0, b.dot(xtv)) / vv : 0.0;
}

PurifyStats check_purification(const FittedModel& model, const Dataset& train) {
  PurifyStats st;
  const std::size_t n = train.rows();
  const EffectSet raw = assemble_raw_effects(model);
  const EffectSet pur = purify_effects(raw, train, model.config.nknots);
  const EffectSet twice = purify_effects(pur, train, model.config.nknots);

  std::vector<double> row(train.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < train.cols(); ++j) row[j] = train.column(j)[i];
    st.conservation = std::max(st.conservation, std::abs(raw.eval_row(row) - pur.eval_row(row)));
  }

  std::map<std::size_t, SplineBasis> bases;
  auto basis = [&](std::size_t j) -> const SplineBasis& {
    auto it = bases.find(j);
    if (it == bases.end()) it = bases.emplace(j, quantile_knots(train.column(j), model.config.nknots)).first;
    return it->second;
  };
  std::vector<double> v(n), v2(n);
  for (std::size_t p = 0; p < pur.pairs.size(); ++p) {
    const PairEffect& pe = pur.pairs[p];
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = pe.eval(train.column(pe.j)[i], train.column(pe.k)[i]);
      v2[i] = twice.pairs[p].eval(train.column(pe.j)[i], train.column(pe.k)[i]);
      st.idempotence = std::max(st.idempotence, std::abs(v[i] - v2[i]));
    }
    st.orthogonality = std::max(st.orthogonality, projection_r2(v, train.column(pe.j), basis(pe.j)));
    st.orthogonality = std::max(st.orthogonality, projection_r2(v, train.column(pe.k), basis(pe.k)));
  }
  for (std::size_t j = 0; j < pur.mains.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = pur.mains[j].eval(train.column(j)[i]);
      st.idempotence = std::max(st.idempotence, std::abs(v[i] - twice.mains[j].eval(train.column(j)[i])));
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    st.main_mean = std::max(st.main_mean, std::abs(mean) / std::max(1.0, population_std(v)));
  }
  st.idempotence = std::max(st.idempotence, std::abs(pur.intercept - twice.intercept));
  return st;
}

PurifyStats g_purify;
std::size_t g_purify_models = 0;

void record_purification(const FittedModel& m, const Dataset& train) {
  g_purify.merge(check_purification(m, train));
  ++g_purify_models;
}

std::vector<ImportanceEntry> importances_of(const FittedModel& m, const Dataset& train) {
  return importance(purify_effects(assemble_raw_effects(m), train, m.config.nknots), train);
}

std::set<std::pair<std::size_t, std::size_t>> top_interactions(const std::vector<ImportanceEntry>& imp, std::size_t count) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : imp) {
    if (!e.interaction) continue;
    if (out.size() == count) break;
    out.insert({e.j, e.k});
  }
  return out;
}

// ---- criteria 1-3 ------------------------------------------------------------

void model2_criteria() {
  const auto truth = sim::true_pairs(2);
  const std::set<std::pair<std::size_t, std::size_t>> truth_set(truth.begin(), truth.end());
  int recovered = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    const sim::SimSplit d = simulate(2, 50000, 0.5, Task::Continuous, seed);
    GamiConfig cfg = default_config(Task::Continuous);
    cfg.seed = seed;
    const FittedModel full = fit_gami(d.train, d.valid, cfg);
    const double fit_sec = seconds_since(t0);
    const auto imp = importances_of(full, d.train);
    const bool ok = top_interactions(imp, truth.size()) == truth_set;
    recovered += ok;
    per_seed += (per_seed.empty() ? "" : " ") + std::string(ok ? "Y" : "N");
    record_purification(full, d.train);

    if (seed == 1) {
      const double mse_full = test_mse(full, d.test);
      report(1, mse_full <= 0.30,
             "Model 2 n=50K rho=0.5 test MSE " + num(mse_full) + " (<= 0.30), rounds " +
                 std::to_string(full.rounds.size()) + ", trees " + std::to_string(full.tree_count()) + ", " +
                 num(fit_sec) + " s");

      GamiConfig one = cfg;
      one.rounds = 1;
      const FittedModel first = fit_gami(d.train, d.valid, one);
      record_purification(first, d.train);
      const double mse_one = test_mse(first, d.test);
      const bool same = predict(truncate_rounds(full, 1), d.test) == predict(first, d.test);
      report(2, mse_one >= 0.32 && mse_one - mse_full >= 0.04,
             "rounds=1 test MSE " + num(mse_one) + " (>= 0.32), gap " + num(mse_one - mse_full) +
                 " (>= 0.04); equals first round of full fit: " + (same ? "yes" : "no"));

      // Pairs the first-round filter missed but later rounds picked up.
      std::set<std::pair<std::size_t, std::size_t>> first_round, later;
      for (std::size_t r = 0; r < full.rounds.size(); ++r)
        for (const auto& p : full.rounds[r].ranking.top_pairs)
          if (truth_set.count({p.j, p.k})) (r == 0 ? first_round : later).insert({p.j, p.k});
      std::size_t recovered_later = 0;
      for (const auto& p : later) recovered_later += first_round.count(p) == 0;
      info("Model 2 seed 1: round-1 filter selected " + std::to_string(first_round.size()) + "/8 true pairs; " +
           std::to_string(recovered_later) + " more selected in later rounds");
    }
  }
  report(3, recovered >= 4, "Model 2 true pairs are the top 8 by importance in " + std::to_string(recovered) +
                                "/5 seeds (>= 4) [" + per_seed + "]");
}

// ---- criterion 4 -------------------------------------------------------------

void sine_filter_criterion() {
  int ok_seeds = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const sim::SimSplit d = simulate(3, 50000, 0.5, Task::Continuous, seed);
    const GamiConfig cfg = default_config(Task::Continuous);
    const FeatureFrame frame = make_frame(d.train, cfg.max_bins, cfg.nknots);
    const double offset = init_offset(d.train.target(), Task::Continuous);
    Predictions g{std::vector<double>(d.train.rows(), offset), std::vector<double>(d.valid.rows(), offset)};
    fit_main_stage(frame, d.valid, g, cfg.boost_params());
    FilterParams fp = cfg.filter_params();
    fp.seed = seed;
    const PairRanking mbt = filter_interactions(frame, g.train, 10, fp);
    const PairRanking fast = fast_filter(frame, g.train, 10, fp);
    auto has = [](const PairRanking& r, std::size_t j, std::size_t k) {
      return std::any_of(r.top_pairs.begin(), r.top_pairs.end(), [&](const PairScore& p) { return p.j == j && p.k == k; });
    };
    const bool mbt_ok = has(mbt, 4, 5) && has(mbt, 6, 7);
    const bool fast_miss = !has(fast, 4, 5) || !has(fast, 6, 7);
    ok_seeds += mbt_ok && fast_miss;
    detail += " seed" + std::to_string(seed) + ":mbt=" + (mbt_ok ? "both" : "miss") + ",fast=" +
              (fast_miss ? "miss" : "both");
  }
  report(4, ok_seeds >= 4, "Model 3 sine pairs in MBT top 10 and not both in FAST top 10 in " +
                               std::to_string(ok_seeds) + "/5 seeds (>= 4);" + detail);
}

// ---- criterion 5 -------------------------------------------------------------

double redundancy_ratio(const std::vector<ImportanceEntry>& imp) {
  double max_redundant = 0.0, min_true = 1e300;
  for (const auto& e : imp) {
    if (e.interaction) continue;
    if (e.j < 10)
      min_true = std::min(min_true, e.importance);
    else
      max_redundant = std::max(max_redundant, e.importance);
  }
  return max_redundant / min_true;
}

void redundancy_criterion() {
  const sim::SimSplit d = simulate(4, 50000, 0.5, Task::Continuous, 1);
  GamiConfig cfg = default_config(Task::Continuous);
  cfg.seed = 1;
  const FittedModel full = fit_gami(d.train, d.valid, cfg);
  record_purification(full, d.train);
  const FittedModel first = truncate_rounds(full, 1);
  record_purification(first, d.train);
  const double r_full = redundancy_ratio(importances_of(full, d.train));
  const double r_one = redundancy_ratio(importances_of(first, d.train));
  report(5, r_full <= 0.25 && r_full <= 0.5 * r_one,
         "Model 4 max I(x11..x30)/min I(x1..x10) = " + num(r_full) + " after " + std::to_string(full.rounds.size()) +
             " rounds (<= 0.25), round-1 ratio " + num(r_one) + " (full <= 0.5x)");
}

// ---- criterion 6 -------------------------------------------------------------

void binary_criterion() {
  const auto t0 = Clock::now();
  const sim::SimSplit d = simulate(2, 50000, 0.0, Task::Binary, 1);
  GamiConfig cfg = default_config(Task::Binary);
  cfg.seed = 1;
  const FittedModel m = fit_gami(d.train, d.valid, cfg);
  const double a = auc(d.test.target(), predict(m, d.test));
  const double sec = seconds_since(t0);
  record_purification(m, d.train);
  report(6, a >= 0.905 && sec <= 600.0,
         "binary Model 2 n=50K rho=0 test AUC " + num(a) + " (>= 0.905), " + num(sec) + " s (<= 600)");
}

// ---- criterion 7 -------------------------------------------------------------

void purification_criterion() {
  const PurifyStats& s = g_purify;
  report(7,
         g_purify_models > 0 && s.conservation <= 1e-8 && s.orthogonality <= 1e-10 && s.main_mean <= 1e-10 &&
             s.idempotence <= 1e-8,
         std::to_string(g_purify_models) + " models: conservation " + num(s.conservation) + " (<= 1e-8), R^2 " +
             num(s.orthogonality) + " (<= 1e-10), main mean " + num(s.main_mean) + " (<= 1e-10), idempotence " +
             num(s.idempotence) + " (<= 1e-8)");
}

// ---- criterion 8 -------------------------------------------------------------

double ridge_oracle_gap(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> uw(0.1, 2.0);
  std::uniform_int_distribution<std::size_t> un(30, 400);
  const std::size_t n = un(rng);
  const bool spline = seed % 2 == 0;
  std::vector<double> x(n), z(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    z[i] = 0.8 * x[i] + std::sin(2 * x[i]) + 0.4 * nd(rng);
    w[i] = uw(rng);
  }
  std::optional<SplineBasis> basis;
  if (spline) basis = quantile_knots(x, 3 + seed % 6);
  GramAccumulator acc(1, spline ? basis->size() + 1 : 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (spline)
      acc.add_spline(0, basis->locate(x[i]), z[i], w[i]);
    else
      acc.add_linear(0, x[i], z[i], w[i]);
  }
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  const Eigen::MatrixXd design = oracle::design(x, rows, basis ? &*basis : nullptr);
  const Eigen::VectorXd zv = oracle::gather(z, rows), wv = oracle::gather(w, rows);
  double gap = 0.0;
  for (double alpha : default_alpha_grid()) {
    const std::vector<double> grid{alpha};
    const NodeModel m = ridge_fit(acc.total(), grid, std::numeric_limits<double>::infinity());
    const oracle::DenseFit f = oracle::dense_ridge(design, zv, wv, alpha);
    if (!f.ok) return std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.coefficients.size(); ++k)
      gap = std::max(gap, std::abs(m.coefficients[k] - f.beta(static_cast<Eigen::Index>(k))) /
                              std::max(1.0, std::abs(f.beta(static_cast<Eigen::Index>(k)))));
    gap = std::max(gap, std::abs(m.df - f.df) / std::max(1.0, f.df));
    gap = std::max(gap, std::abs(m.sse - f.sse) / std::max(1.0, f.sse));
  }
  return gap;
}

void oracle_criterion() {
  int same = 0;
  double worst_sse = 0.0, worst_coef = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const oracle::Equivalence e = oracle::binned_vs_exhaustive(1000 + seed);
    same += e.same_structure;
    worst_sse = std::max(worst_sse, e.sse_rel);
    worst_coef = std::max(worst_coef, e.max_coef_diff);
  }
  const bool a = same == 20 && worst_sse <= 1e-8;

  double ridge_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) ridge_gap = std::max(ridge_gap, ridge_oracle_gap(seed));
  const bool b = ridge_gap <= 1e-8;

  const oracle::FdCheck fc = oracle::finite_difference_check(Task::Continuous, 77, 100);
  const oracle::FdCheck fb = oracle::finite_difference_check(Task::Binary, 78, 100);
  const bool c = fc.max_grad_rel <= 1e-5 && fc.max_hess_rel <= 1e-4 && fb.max_grad_rel <= 1e-5 && fb.max_hess_rel <= 1e-4;

  report(8, a && b && c,
         "(a) identical trees " + std::to_string(same) + "/20, SSE rel " + num(worst_sse) + ", coef " + num(worst_coef) +
             "; (b) ridge vs dense max rel gap " + num(ridge_gap) + "; (c) FD grad " +
             num(std::max(fc.max_grad_rel, fb.max_grad_rel)) + " hess " + num(std::max(fc.max_hess_rel, fb.max_hess_rel)));
}

// ---- criterion 9 -------------------------------------------------------------

std::string prediction_csv(const std::vector<double>& g) {
  std::string out = "link\n";
  for (double v : g) {
    append_double(out, v);
    out += '\n';
  }
  return out;
}

void determinism_criterion() {
  const sim::SimSplit d = simulate(2, 20000, 0.5, Task::Continuous, 9);
  GamiConfig cfg = default_config(Task::Continuous);
  cfg.seed = 9;
  cfg.rounds = 2;
  const FittedModel a = fit_gami(d.train, d.valid, cfg);
  const FittedModel b = fit_gami(d.train, d.valid, cfg);
  const bool same_model = model_to_json(a) == model_to_json(b);
  const bool same_pred = prediction_csv(predict(a, d.test)) == prediction_csv(predict(b, d.test));

  const fs::path path = fs::temp_directory_path() / ("gamitree_acceptance_" + std::to_string(::getpid()) + ".json");
  save_model(a, path.string());
  const FittedModel loaded = load_model(path.string());
  fs::remove(path);
  const bool same_loaded = predict(loaded, d.train) == predict(a, d.train);
  report(9, same_model && same_pred && same_loaded && d.train.rows() == 10000,
         std::string("identical model files: ") + (same_model ? "yes" : "no") +
             ", identical prediction CSVs: " + (same_pred ? "yes" : "no") +
             ", save/load predictions identical on " + std::to_string(d.train.rows()) + " rows: " +
             (same_loaded ? "yes" : "no"));
}

// ---- criterion 10 ------------------------------------------------------------

void performance_criterion() {
  sim::SimScenario s;
  s.model_id = 2;
  s.n = 125000;
  s.rho = 0.5;
  s.seed = 10;
  const Dataset all = sim::simulate(s).data;
  std::vector<std::size_t> tr(100000), va(25000);
  for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = i;
  for (std::size_t i = 0; i < va.size(); ++i) va[i] = tr.size() + i;
  const Dataset train = all.take_rows(tr), valid = all.take_rows(va);

  GamiConfig cfg = default_config(Task::Continuous);
  cfg.max_iterations = 100;
  cfg.patience = 1000;
  auto t0 = Clock::now();
  const FeatureFrame frame = make_frame(train, cfg.max_bins, cfg.nknots);
  const double offset = init_offset(train.target(), Task::Continuous);
  Predictions g{std::vector<double>(train.rows(), offset), std::vector<double>(valid.rows(), offset)};
  const StageResult stage = fit_main_stage(frame, valid, g, cfg.boost_params());
  const double fit_sec = seconds_since(t0);

  t0 = Clock::now();
  const FeatureFrame frame2 = make_frame(train, cfg.max_bins, cfg.nknots);
  const PairRanking ranking = filter_interactions(frame2, g.train, cfg.npairs, cfg.filter_params());
  const double filter_sec = seconds_since(t0);

  report(10, stage.iterations_run == 100 && fit_sec <= 120.0 && ranking.scores.size() == 435 && filter_sec <= 60.0,
         std::to_string(stage.iterations_run) + " main trees on 100K x 30 in " + num(fit_sec) + " s (<= 120); " +
             std::to_string(ranking.scores.size()) + "-pair filter at 100K rows in " + num(filter_sec) +
             " s (<= 60)");
}

}  // namespace

int main() {
  g_report = std::fopen("acceptance_report.txt", "w");
  struct Step {
    const char* name;
    std::function<void()> run;
  };
  const std::vector<Step> steps{{"model 2", model2_criteria},        {"sine filter", sine_filter_criterion},
                                {"redundancy", redundancy_criterion}, {"binary", binary_criterion},
                                {"purification", purification_criterion}, {"oracles", oracle_criterion},
                                {"determinism", determinism_criterion}, {"performance", performance_criterion}};
  for (const Step& s : steps) {
    try {
      s.run();
    } catch (const std::exception& e) {
      emit(std::string("error in ") + s.name + ": " + e.what());
      ++g_failures;
    }
  }
  emit(std::string(g_failures == 0 ? "ALL PASS" : "SOME FAIL") + ": " + std::to_string(g_failures) + " failing");
  if (g_report) std::fclose(g_report);
  return g_failures == 0 ? 0 : 1;
}
