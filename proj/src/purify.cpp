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

#include "gamitree/purify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "gamitree/error.hpp"
#include "gamitree/format.hpp"
#include "gamitree/metrics.hpp"
#include "json.hpp"

namespace gamitree {

namespace {

double tree_sum(const std::vector<ScaledTree>& trees, std::size_t var_a, double xa, double xb) {
  double s = 0.0;
  for (const auto& st : trees) {
    if (st.tree.model_var == var_a)
      s += st.scale * st.tree.predict_one(xa, xb);
    else
      s += st.scale * st.tree.predict_one(xb, xa);
  }
  return s;
}

std::vector<std::size_t> resolve_names(const std::vector<std::string>& names, const Dataset& ds) {
  std::vector<std::size_t> cols(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    cols[j] = ds.find(names[j]);
    if (cols[j] >= ds.cols()) throw_validation("missing feature column '" + names[j] + "'");
  }
  return cols;
}

}  // namespace

double AdditiveSpline::eval(double x) const {
  const SplinePoint p = basis.locate(x);
  return (1.0 - p.t) * coef[p.segment] + p.t * coef[p.segment + 1];
}

double MainEffect::eval(double x) const {
  double s = 0.0;
  for (const auto& st : trees) s += st.scale * st.tree.predict_one(x, x);
  for (const auto& sp : splines) s += sp.eval(x);
  return s + shift;
}

double PairEffect::eval(double xj, double xk) const {
  if (additive) return 0.0;
  double s = tree_sum(trees, j, xj, xk);
  for (const auto& sp : removed_j) s -= sp.eval(xj);
  for (const auto& sp : removed_k) s -= sp.eval(xk);
  return s + shift;
}

double EffectSet::eval_row(std::span<const double> x) const {
  double s = intercept;
  for (const auto& m : mains) s += m.eval(x[m.var]);
  for (const auto& p : pairs) s += p.eval(x[p.j], x[p.k]);
  return s;
}

EffectSet assemble_raw_effects(const FittedModel& model) {
  EffectSet out;
  out.intercept = model.offset;
  for (const auto& f : model.features) out.names.push_back(f.name);
  out.mains.resize(model.features.size());
  for (std::size_t j = 0; j < out.mains.size(); ++j) out.mains[j].var = j;
  std::map<std::pair<std::size_t, std::size_t>, PairEffect> pairs;
  model.for_each_tree([&](std::size_t, bool, const ScaledTree& st) {
    if (st.tree.kind == TreeKind::Main) {
      out.mains[st.tree.model_var].trees.push_back(st);
      return;
    }
    const std::size_t a = std::min(st.tree.model_var, st.tree.split_var);
    const std::size_t b = std::max(st.tree.model_var, st.tree.split_var);
    PairEffect& pe = pairs[{a, b}];
    pe.j = a;
    pe.k = b;
    pe.trees.push_back(st);
  });
  for (auto& [key, pe] : pairs) out.pairs.push_back(std::move(pe));
  return out;
}

EffectSet purify_effects(const EffectSet& raw, const Dataset& train, std::size_t nknots) {
  const std::vector<std::size_t> cols = resolve_names(raw.names, train);
  const std::size_t n = train.rows();
  EffectSet out = raw;
  std::map<std::size_t, SplineBasis> bases;
  auto basis_for = [&](std::size_t var) -> const SplineBasis& {
    auto it = bases.find(var);
    if (it == bases.end()) it = bases.emplace(var, quantile_knots(train.column(cols[var]), nknots)).first;
    return it->second;
  };

  for (PairEffect& pe : out.pairs) {
    const auto xj = train.column(cols[pe.j]);
    const auto xk = train.column(cols[pe.k]);
    const SplineBasis& bj = basis_for(pe.j);
    const SplineBasis& bk = basis_for(pe.k);
    // Design: intercept, B_2..B_K of x_j, B_2..B_K of x_k. Dropping the first
    // hat function of each block removes the partition-of-unity collinearity
    // without changing the spanned space.
    const auto kj = static_cast<Eigen::Index>(bj.size()) - 1;
    const auto kk = static_cast<Eigen::Index>(bk.size()) - 1;
    const Eigen::Index m = 1 + kj + kk;
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
    Eigen::VectorXd values(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      values(r) = pe.eval(xj[i], xk[i]);
      design(r, 0) = 1.0;
      const SplinePoint pj = bj.locate(xj[i]);
      if (pj.segment >= 1) design(r, static_cast<Eigen::Index>(pj.segment)) += 1.0 - pj.t;
      design(r, static_cast<Eigen::Index>(pj.segment) + 1) += pj.t;
      const SplinePoint pk = bk.locate(xk[i]);
      if (pk.segment >= 1) design(r, kj + static_cast<Eigen::Index>(pk.segment)) += 1.0 - pk.t;
      design(r, kj + static_cast<Eigen::Index>(pk.segment) + 1) += pk.t;
    }

    Eigen::VectorXd beta;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == m) {
      beta = qr.solve(values);
      // One step of iterative refinement.
      const Eigen::VectorXd resid = values - design * beta;
      beta += qr.solve(resid);
    } else {
      Eigen::MatrixXd gram = design.transpose() * design;
      for (Eigen::Index c = 1; c < m; ++c) gram(c, c) += 1e-8;
      beta = gram.ldlt().solve(design.transpose() * values);
    }
    // A residual at rounding level carries no interaction.
    const double resid_ss = (values - design * beta).squaredNorm();
    const bool additive = resid_ss <= 1e-24 * values.squaredNorm();

    AdditiveSpline hj{bj, std::vector<double>(bj.size(), 0.0)};
    AdditiveSpline hk{bk, std::vector<double>(bk.size(), 0.0)};
    for (Eigen::Index c = 0; c < kj; ++c) hj.coef[static_cast<std::size_t>(c) + 1] = beta(1 + c);
    for (Eigen::Index c = 0; c < kk; ++c) hk.coef[static_cast<std::size_t>(c) + 1] = beta(1 + kj + c);
    pe.shift -= beta(0);
    out.intercept += beta(0);
    pe.removed_j.push_back(hj);
    pe.removed_k.push_back(hk);
    pe.additive = pe.additive || additive;
    out.mains[pe.j].splines.push_back(std::move(hj));
    out.mains[pe.k].splines.push_back(std::move(hk));
  }

  for (MainEffect& me : out.mains) {
    const auto x = train.column(cols[me.var]);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += me.eval(x[i]);
    mean /= static_cast<double>(n);
    me.shift -= mean;
    out.intercept += mean;
  }
  out.purified = true;
  return out;
}

std::vector<ImportanceEntry> importance(const EffectSet& effects, const Dataset& train) {
  const std::vector<std::size_t> cols = resolve_names(effects.names, train);
  const std::size_t n = train.rows();
  std::vector<ImportanceEntry> out;
  std::vector<double> v(n);
  for (const auto& me : effects.mains) {
    const auto x = train.column(cols[me.var]);
    for (std::size_t i = 0; i < n; ++i) v[i] = me.eval(x[i]);
    out.push_back({effects.names[me.var], false, me.var, me.var, population_std(v)});
  }
  for (const auto& pe : effects.pairs) {
    const auto xj = train.column(cols[pe.j]);
    const auto xk = train.column(cols[pe.k]);
    for (std::size_t i = 0; i < n; ++i) v[i] = pe.eval(xj[i], xk[i]);
    out.push_back({effects.names[pe.j] + ":" + effects.names[pe.k], true, pe.j, pe.k, population_std(v)});
  }
  std::stable_sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.component < b.component;
  });
  return out;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = i + 1 == count ? hi : lo + t * (hi - lo);
  }
  return out;
}

std::pair<double, double> range_of(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return {*lo, *hi};
}

std::string file_token(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write file: " + path.string());
  out << text;
  if (!out) throw_data("write failed: " + path.string());
}

}  // namespace

EffectGrids export_effect_grids(const EffectSet& effects, const Dataset& train, std::size_t grid_size,
                                const std::vector<double>& slice_quantiles) {
  if (grid_size < 1) throw_validation("grid size must be at least 1");
  const std::vector<std::size_t> cols = resolve_names(effects.names, train);
  EffectGrids out;
  out.intercept = effects.intercept;
  out.names = effects.names;
  for (const auto& me : effects.mains) {
    const auto [lo, hi] = range_of(train.column(cols[me.var]));
    MainGrid g;
    g.var = me.var;
    g.x = linspace(lo, hi, grid_size);
    for (double x : g.x) g.value.push_back(me.eval(x));
    out.mains.push_back(std::move(g));
  }
  for (const auto& pe : effects.pairs) {
    const auto colj = train.column(cols[pe.j]);
    const auto colk = train.column(cols[pe.k]);
    const auto [lj, hj] = range_of(colj);
    const auto [lk, hk] = range_of(colk);
    PairGrid g;
    g.j = pe.j;
    g.k = pe.k;
    g.xj = linspace(lj, hj, grid_size);
    g.xk = linspace(lk, hk, grid_size);
    for (double a : g.xj)
      for (double b : g.xk) g.value.push_back(pe.eval(a, b));
    std::vector<double> sorted_k(colk.begin(), colk.end());
    std::sort(sorted_k.begin(), sorted_k.end());
    for (double q : slice_quantiles) {
      PairSlice s;
      s.quantile = q;
      s.xk = sorted_quantile(sorted_k, q);
      for (double a : g.xj) s.value.push_back(pe.eval(a, s.xk));
      g.slices.push_back(std::move(s));
    }
    out.pairs.push_back(std::move(g));
  }
  return out;
}

void write_importance_csv(const std::string& path, const std::vector<ImportanceEntry>& importances) {
  std::string text = "component,kind,importance\n";
  for (const auto& e : importances) {
    text += e.component + "," + (e.interaction ? "interaction" : "main") + ",";
    append_double(text, e.importance);
    text += "\n";
  }
  write_text(path, text);
}

void write_effect_exports(const std::string& dir, const EffectGrids& grids,
                          const std::vector<ImportanceEntry>& importances) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_data("cannot create directory " + dir + ": " + ec.message());
  const fs::path root(dir);

  std::map<std::string, double> imp;
  for (const auto& e : importances) imp[e.component] = e.importance;

  nlohmann::json mains = nlohmann::json::array();
  for (const auto& g : grids.mains) {
    const std::string& name = grids.names[g.var];
    const std::string file = "main_" + file_token(name) + ".csv";
    std::string text = "x,value\n";
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      append_double(text, g.x[i]);
      text += ',';
      append_double(text, g.value[i]);
      text += '\n';
    }
    write_text(root / file, text);
    mains.push_back({{"name", name}, {"file", file}, {"importance", imp.count(name) ? imp[name] : 0.0}});
  }

  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& g : grids.pairs) {
    const std::string& nj = grids.names[g.j];
    const std::string& nk = grids.names[g.k];
    const std::string stem = file_token(nj) + "__" + file_token(nk);
    const std::string file = "pair_" + stem + ".csv";
    const std::string slices_file = "slices_" + stem + ".csv";
    std::string text = "x_j,x_k,value\n";
    for (std::size_t a = 0; a < g.xj.size(); ++a) {
      for (std::size_t b = 0; b < g.xk.size(); ++b) {
        append_double(text, g.xj[a]);
        text += ',';
        append_double(text, g.xk[b]);
        text += ',';
        append_double(text, g.value[a * g.xk.size() + b]);
        text += '\n';
      }
    }
    write_text(root / file, text);
    std::string slices = "quantile,x_k,x_j,value\n";
    nlohmann::json quantiles = nlohmann::json::array();
    for (const auto& s : g.slices) {
      quantiles.push_back(s.quantile);
      for (std::size_t a = 0; a < g.xj.size(); ++a) {
        append_double(slices, s.quantile);
        slices += ',';
        append_double(slices, s.xk);
        slices += ',';
        append_double(slices, g.xj[a]);
        slices += ',';
        append_double(slices, s.value[a]);
        slices += '\n';
      }
    }
    write_text(root / slices_file, slices);
    const std::string component = nj + ":" + nk;
    pairs.push_back({{"name_j", nj},
                     {"name_k", nk},
                     {"file", file},
                     {"slices_file", slices_file},
                     {"slice_quantiles", quantiles},
                     {"importance", imp.count(component) ? imp[component] : 0.0}});
  }

  write_importance_csv((root / "importance.csv").string(), importances);
  const nlohmann::json index{{"intercept", grids.intercept},
                             {"mains", mains},
                             {"pairs", pairs},
                             {"importance_file", "importance.csv"}};
  write_text(root / "index.json", index.dump(1) + "\n");
}

}  // namespace gamitree
