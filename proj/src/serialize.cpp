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
#include <fstream>
#include <limits>
#include <sstream>

#include "gamitree/error.hpp"
#include "gamitree/gami.hpp"
#include "json.hpp"

namespace gamitree {

using nlohmann::json;

namespace {

// JSON has no infinity; an unbounded max_coef is written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double read_unbounded(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

json config_to_json(const GamiConfig& c) {
  return json{{"max_iterations", c.max_iterations},
              {"max_depth", c.max_depth},
              {"learning_rate", c.learning_rate},
              {"nknots", c.nknots},
              {"rounds", c.rounds},
              {"npairs", c.npairs},
              {"alpha_grid", c.alpha_grid},
              {"max_coef", finite_or_null(c.max_coef)},
              {"patience", c.patience},
              {"min_leaf", c.min_leaf},
              {"max_bins", c.max_bins},
              {"filter_subsample", c.filter_subsample},
              {"seed", c.seed},
              {"threads", c.threads}};
}

GamiConfig config_from_json(const json& j) {
  GamiConfig c;
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.max_depth = j.at("max_depth").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.nknots = j.at("nknots").get<std::size_t>();
  c.rounds = j.at("rounds").get<std::size_t>();
  c.npairs = j.at("npairs").get<std::size_t>();
  c.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  c.max_coef = read_unbounded(j.at("max_coef"));
  c.patience = j.at("patience").get<std::size_t>();
  c.min_leaf = j.at("min_leaf").get<std::size_t>();
  c.max_bins = j.at("max_bins").get<std::size_t>();
  c.filter_subsample = j.at("filter_subsample").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  return c;
}

json tree_to_json(std::size_t round, bool interaction, const ScaledTree& st) {
  const ModelBasedTree& t = st.tree;
  json nodes = json::array();
  for (const TreeNode& n : t.nodes) {
    if (n.is_leaf())
      nodes.push_back({{"leaf", {{"alpha", n.model.alpha}, {"coefficients", n.model.coefficients}, {"df", n.model.df}}}});
    else
      nodes.push_back({{"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
  }
  json out{{"round", round + 1},
           {"stage", interaction ? "interaction" : "main"},
           {"kind", t.kind == TreeKind::Main ? "main" : "interaction"},
           {"model_var", t.model_var},
           {"split_var", t.split_var},
           {"depth", t.depth},
           {"scale", st.scale},
           {"nodes", std::move(nodes)}};
  out["basis_knots"] = t.basis ? json(t.basis->knots()) : json(nullptr);
  return out;
}

ScaledTree tree_from_json(const json& j, std::size_t n_features) {
  ScaledTree st;
  ModelBasedTree& t = st.tree;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "main" && kind != "interaction") throw_data("model file: unknown tree kind '" + kind + "'");
  t.kind = kind == "main" ? TreeKind::Main : TreeKind::Interaction;
  t.model_var = j.at("model_var").get<std::size_t>();
  t.split_var = j.at("split_var").get<std::size_t>();
  if (t.model_var >= n_features || t.split_var >= n_features) throw_data("model file: tree variable out of range");
  t.depth = j.at("depth").get<std::size_t>();
  st.scale = j.at("scale").get<double>();
  if (!j.at("basis_knots").is_null()) t.basis = SplineBasis(j.at("basis_knots").get<std::vector<double>>());
  const std::size_t cols = t.basis ? t.basis->size() + 1 : 2;
  const json& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) throw_data("model file: tree has no nodes");
  for (const json& jn : nodes) {
    TreeNode n;
    if (jn.contains("leaf")) {
      const json& leaf = jn.at("leaf");
      n.model.alpha = leaf.at("alpha").get<double>();
      n.model.coefficients = leaf.at("coefficients").get<std::vector<double>>();
      n.model.df = leaf.at("df").get<double>();
      if (n.model.coefficients.size() != cols) throw_data("model file: leaf coefficient count mismatch");
    } else {
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::int32_t>();
      n.right = jn.at("right").get<std::int32_t>();
    }
    t.nodes.push_back(std::move(n));
  }
  const auto count = static_cast<std::int32_t>(t.nodes.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count))
      throw_data("model file: invalid child index");
  }
  return st;
}

json stage_summary(const StageResult& s) {
  return json{{"stop_iterations", s.stop_iterations},
              {"iterations_run", s.iterations_run},
              {"validation_curve", s.validation_curve}};
}

void read_stage_summary(const json& j, StageResult& s) {
  s.iterations_run = j.at("iterations_run").get<std::size_t>();
  s.validation_curve = j.at("validation_curve").get<std::vector<double>>();
  const auto stop = j.at("stop_iterations").get<std::size_t>();
  if (stop != s.trees.size()) throw_data("model file: stop count does not match tree count");
  s.stop_iterations = stop;
}

}  // namespace

std::string model_to_json(const FittedModel& model) {
  json features = json::array();
  for (const auto& f : model.features)
    features.push_back({{"name", f.name}, {"bin_edges", f.bin_edges}, {"knots", f.knots}});

  json rounds = json::array();
  for (const auto& r : model.rounds) {
    json pairs = json::array();
    for (const auto& p : r.ranking.top_pairs)
      pairs.push_back({{"j", p.j}, {"k", p.k}, {"score", p.score}, {"sse_jk", p.sse_jk}, {"sse_kj", p.sse_kj}});
    rounds.push_back({{"main", stage_summary(r.main)}, {"interaction", stage_summary(r.interaction)}, {"top_pairs", pairs}});
  }

  json trees = json::array();
  model.for_each_tree([&](std::size_t round, bool interaction, const ScaledTree& st) {
    trees.push_back(tree_to_json(round, interaction, st));
  });

  json doc{{"schema_version", kModelSchemaVersion},
           {"task", task_name(model.task)},
           {"offset", model.offset},
           {"config", config_to_json(model.config)},
           {"features", std::move(features)},
           {"rounds", std::move(rounds)},
           {"trees", std::move(trees)}};
  return doc.dump(1) + "\n";
}

FittedModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_data("malformed model file at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw_data("model file schema version " + std::to_string(version) + " is not supported (expected " +
                 std::to_string(kModelSchemaVersion) + ")");
    FittedModel model;
    model.task = parse_task(doc.at("task").get<std::string>());
    model.offset = doc.at("offset").get<double>();
    model.config = config_from_json(doc.at("config"));
    for (const json& f : doc.at("features")) {
      model.features.push_back({f.at("name").get<std::string>(), f.at("bin_edges").get<std::vector<double>>(),
                                f.at("knots").get<std::vector<double>>()});
    }
    const json& rounds = doc.at("rounds");
    model.rounds.resize(rounds.size());
    for (const json& jt : doc.at("trees")) {
      const auto r = jt.at("round").get<std::size_t>();
      if (r < 1 || r > model.rounds.size()) throw_data("model file: tree round out of range");
      const std::string stage = jt.at("stage").get<std::string>();
      ScaledTree st = tree_from_json(jt, model.features.size());
      if (stage == "main")
        model.rounds[r - 1].main.trees.push_back(std::move(st));
      else if (stage == "interaction")
        model.rounds[r - 1].interaction.trees.push_back(std::move(st));
      else
        throw_data("model file: unknown stage '" + stage + "'");
    }
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      read_stage_summary(rounds[r].at("main"), model.rounds[r].main);
      read_stage_summary(rounds[r].at("interaction"), model.rounds[r].interaction);
      for (const json& p : rounds[r].at("top_pairs")) {
        PairScore ps{p.at("j").get<std::size_t>(), p.at("k").get<std::size_t>(), p.at("sse_jk").get<double>(),
                     p.at("sse_kj").get<double>(), p.at("score").get<double>()};
        model.rounds[r].ranking.top_pairs.push_back(ps);
      }
      for (const auto& p : model.rounds[r].ranking.top_pairs) model.rounds[r].ranking.combos.push_back({p.j, p.k});
      for (const auto& p : model.rounds[r].ranking.top_pairs) model.rounds[r].ranking.combos.push_back({p.k, p.j});
    }
    return model;
  } catch (const json::exception& e) {
    throw_data(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write model file: " + path);
  out << model_to_json(model);
  if (!out) throw_data("write failed: " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace gamitree
