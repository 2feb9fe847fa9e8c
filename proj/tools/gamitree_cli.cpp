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

// Command-line front end over the C API.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gamitree/gamitree.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Carries a C API status out of a command.
struct Failure {
  gt_status status;
  std::string message;
};

void check(gt_status status) {
  if (status != GT_OK) throw Failure{status, gt_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) { throw Failure{GT_ERR_USAGE, message}; }

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using DatasetHandle = Handle<gt_dataset, gt_dataset_free>;
using ModelHandle = Handle<gt_model, gt_model_free>;
using RankingHandle = Handle<gt_ranking, gt_ranking_free>;
using EffectsHandle = Handle<gt_effects, gt_effects_free>;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{GT_ERR_DATA, "cannot open " + path};
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string task_string(gt_task task) { return task == GT_TASK_BINARY ? "binary" : "continuous"; }

gt_task parse_task(const std::string& s) {
  if (s == "continuous") return GT_TASK_CONTINUOUS;
  if (s == "binary") return GT_TASK_BINARY;
  usage_error("unknown task '" + s + "'");
}

json config_json(const gt_config& c) {
  json j;
  j["max_iterations"] = c.max_iterations;
  j["max_depth"] = c.max_depth;
  j["learning_rate"] = c.learning_rate;
  j["nknots"] = c.nknots;
  j["rounds"] = c.rounds;
  j["npairs"] = c.npairs;
  j["max_coef"] = c.max_coef < 0 ? json(nullptr) : json(c.max_coef);
  j["patience"] = c.patience;
  j["min_leaf"] = c.min_leaf;
  j["max_bins"] = c.max_bins;
  j["filter_subsample"] = c.filter_subsample;
  j["seed"] = c.seed;
  return j;
}

class Manifest {
 public:
  explicit Manifest(std::string command) { doc_["command"] = std::move(command); doc_["version"] = gt_version(); }

  json& operator[](const char* key) { return doc_[key]; }

  void input(const std::string& role, const std::string& path) {
    doc_["inputs"][role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  void output(const std::string& role, const std::string& path) {
    json entry{{"path", path}};
    if (fs::is_regular_file(path)) entry["sha256"] = sha256_file(path);
    doc_["outputs"][role] = entry;
  }

  template <typename Fn>
  void timed(const char* stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    doc_["timings_sec"][stage] = dt.count();
  }

  void write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << doc_.dump(2) << "\n";
    if (!out) throw Failure{GT_ERR_DATA, "cannot write " + path};
  }

 private:
  json doc_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{GT_ERR_DATA, "cannot create directory " + dir + ": " + ec.message()};
}

std::string manifest_path(const std::string& explicit_path, const std::string& fallback) {
  return explicit_path.empty() ? fallback : explicit_path;
}

// Header check so predict can run on files without the target column.
bool csv_has_column(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Failure{GT_ERR_DATA, "cannot open " + path};
  std::string line;
  std::getline(in, line);
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    if (b != std::string::npos && cell.substr(b, e - b + 1) == name) return true;
  }
  return false;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void log_line(const char* message, void*) { std::cout << message << "\n" << std::flush; }

std::vector<double> target_of(const gt_dataset* ds) {
  std::vector<double> y(gt_dataset_rows(ds));
  check(gt_dataset_target(ds, y.data(), y.size()));
  return y;
}

// Flags shared by fit and filter.
struct ConfigFlags {
  std::optional<size_t> max_iterations, max_depth, nknots, rounds, npairs, patience, min_leaf, max_bins, subsample;
  std::optional<double> learning_rate, max_coef;
  uint64_t seed = 1;
  int threads = 0;

  void add(CLI::App* app) {
    app->add_option("--max-iterations", max_iterations, "Trees per stage (M)");
    app->add_option("--max-depth", max_depth, "Tree depth");
    app->add_option("--learning-rate", learning_rate, "Shrinkage");
    app->add_option("--nknots", nknots, "Spline knots for interaction trees");
    app->add_option("--rounds", rounds, "Main/interaction rounds (R)");
    app->add_option("--npairs", npairs, "Interaction pairs kept by the filter (q)");
    app->add_option("--max-coef", max_coef, "Coefficient bound; negative = unbounded");
    app->add_option("--patience", patience, "Early stopping window (d)");
    app->add_option("--min-leaf", min_leaf, "Minimum rows per leaf");
    app->add_option("--max-bins", max_bins, "Histogram bins per feature");
    app->add_option("--filter-subsample", subsample, "Row cap for the interaction filter");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  gt_config resolve(gt_task task) const {
    gt_config c;
    check(gt_config_default(task, &c));
    if (max_iterations) c.max_iterations = *max_iterations;
    if (max_depth) c.max_depth = *max_depth;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (nknots) c.nknots = *nknots;
    if (rounds) c.rounds = *rounds;
    if (npairs) c.npairs = *npairs;
    if (max_coef) c.max_coef = *max_coef;
    if (patience) c.patience = *patience;
    if (min_leaf) c.min_leaf = *min_leaf;
    if (max_bins) c.max_bins = *max_bins;
    if (subsample) c.filter_subsample = *subsample;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  int model = 2;
  size_t n = 50000;
  double rho = 0.5;
  std::string task = "continuous";
  double noise_sd = 0.5;
  uint64_t seed = 1;
  std::string out_dir;
};

void cmd_simulate(const SimulateArgs& a) {
  const gt_task task = parse_task(a.task);
  Manifest m("simulate");
  m["seed"] = a.seed;
  m["scenario"] = {{"model", a.model}, {"n", a.n}, {"rho", a.rho}, {"task", a.task}, {"noise_sd", a.noise_sd}};
  double beta0 = 0.0;
  m.timed("simulate", [&] { check(gt_simulate(a.model, a.n, a.rho, task, a.noise_sd, a.seed, a.out_dir.c_str(), &beta0)); });
  m["beta0"] = beta0;
  size_t count = 0;
  check(gt_sim_true_pairs(a.model, nullptr, 0, &count));
  std::vector<size_t> pairs(2 * count);
  check(gt_sim_true_pairs(a.model, pairs.data(), count, &count));
  json tp = json::array();
  for (size_t i = 0; i < count; ++i) tp.push_back({pairs[2 * i], pairs[2 * i + 1]});
  m["true_pairs"] = tp;
  for (const char* part : {"train", "valid", "test"}) {
    const std::string path = (fs::path(a.out_dir) / (std::string(part) + ".csv")).string();
    m.output(part, path);
  }
  const std::string mpath = (fs::path(a.out_dir) / "manifest.json").string();
  m.write(mpath);
  std::cout << "wrote " << a.out_dir << " (beta0 " << fmt(beta0) << ")\n";
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string train, valid, target = "y", task = "continuous", out_dir;
  size_t grid_size = 100;
  ConfigFlags config;
};

void cmd_fit(const FitArgs& a) {
  const gt_task task = parse_task(a.task);
  const gt_config config = a.config.resolve(task);
  Manifest m("fit");
  m["seed"] = config.seed;
  m["task"] = a.task;
  m["target"] = a.target;
  m["config"] = config_json(config);
  m.input("train", a.train);
  m.input("valid", a.valid);

  DatasetHandle train, valid;
  m.timed("load", [&] {
    check(gt_dataset_load_csv(a.train.c_str(), a.target.c_str(), task, train.out()));
    check(gt_dataset_load_csv(a.valid.c_str(), a.target.c_str(), task, valid.out()));
  });
  ensure_dir(a.out_dir);

  ModelHandle model;
  m.timed("fit", [&] { check(gt_fit(train.get(), valid.get(), &config, log_line, nullptr, model.out())); });

  json rounds = json::array();
  double final_loss = 0.0;
  for (size_t r = 0; r < gt_model_round_count(model.get()); ++r) {
    size_t mains = 0, ints = 0;
    double loss = 0.0;
    check(gt_model_round_info(model.get(), r, &mains, &ints, &loss));
    rounds.push_back({{"round", r + 1}, {"main_trees", mains}, {"interaction_trees", ints}, {"validation_loss", loss}});
    final_loss = loss;
  }
  m["rounds"] = rounds;
  m["tree_count"] = gt_model_tree_count(model.get());

  std::vector<double> link(gt_dataset_rows(train.get()));
  check(gt_model_predict(model.get(), train.get(), link.data(), nullptr, link.size()));
  const auto y = target_of(train.get());
  double train_loss = 0.0;
  check(gt_metric_mean_loss(y.data(), link.data(), y.size(), task, &train_loss));
  m["metrics"] = {{"train_loss", train_loss}, {"validation_loss", final_loss}};
  std::cout << "final validation loss " << fmt(final_loss) << "\n";
  std::cout << "train loss " << fmt(train_loss) << "\n";

  const std::string model_path = (fs::path(a.out_dir) / "model.json").string();
  const std::string effects_dir = (fs::path(a.out_dir) / "effects").string();
  const std::string importance_path = (fs::path(a.out_dir) / "importance.csv").string();
  check(gt_model_save(model.get(), model_path.c_str()));
  m.output("model", model_path);

  EffectsHandle effects;
  m.timed("purify", [&] { check(gt_effects_compute(model.get(), train.get(), effects.out())); });
  m.timed("export", [&] {
    check(gt_effects_write_importance_csv(effects.get(), importance_path.c_str()));
    check(gt_effects_export(effects.get(), a.grid_size, effects_dir.c_str()));
  });
  m.output("importance", importance_path);
  m.output("effects", effects_dir);
  m.write((fs::path(a.out_dir) / "manifest.json").string());
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string model_file, data, target = "y", out, manifest;
};

void cmd_predict(const PredictArgs& a) {
  Manifest m("predict");
  m.input("model", a.model_file);
  m.input("data", a.data);
  ModelHandle model;
  check(gt_model_load(a.model_file.c_str(), model.out()));
  const gt_task task = gt_model_task(model.get());
  gt_config config;
  check(gt_model_config(model.get(), &config));
  m["seed"] = config.seed;
  m["task"] = task_string(task);

  const bool labelled = csv_has_column(a.data, a.target);
  DatasetHandle data;
  check(gt_dataset_load_csv(a.data.c_str(), labelled ? a.target.c_str() : nullptr, task, data.out()));
  const size_t n = gt_dataset_rows(data.get());
  std::vector<double> link(n), prob(n);
  const bool binary = task == GT_TASK_BINARY;
  m.timed("predict", [&] { check(gt_model_predict(model.get(), data.get(), link.data(), binary ? prob.data() : nullptr, n)); });

  std::string text = binary ? "link,prob\n" : "link\n";
  for (size_t i = 0; i < n; ++i) {
    text += fmt(link[i]);
    if (binary) text += "," + fmt(prob[i]);
    text += "\n";
  }
  std::ofstream out(a.out, std::ios::binary);
  out << text;
  if (!out) throw Failure{GT_ERR_DATA, "cannot write " + a.out};
  out.close();
  m.output("predictions", a.out);

  if (labelled) {
    const auto y = target_of(data.get());
    json metrics;
    if (binary) {
      double ll = 0.0, auc = 0.0;
      check(gt_metric_mean_loss(y.data(), link.data(), n, task, &ll));
      check(gt_metric_auc(y.data(), link.data(), n, &auc));
      metrics = {{"log_loss", ll}, {"auc", auc}};
      std::cout << "log_loss " << fmt(ll) << "\nauc " << fmt(auc) << "\n";
    } else {
      double mse = 0.0;
      check(gt_metric_mse(y.data(), link.data(), n, &mse));
      metrics = {{"mse", mse}};
      std::cout << "mse " << fmt(mse) << "\n";
    }
    m["metrics"] = metrics;
  }
  m.write(manifest_path(a.manifest, a.out + ".manifest.json"));
}

// ---- filter ----------------------------------------------------------------

struct FilterArgs {
  std::string data, target = "y", task = "continuous", out, manifest, model_file;
  size_t q = 10;
  bool fast = false, fit_main = false;
  ConfigFlags config;
};

void cmd_filter(const FilterArgs& a) {
  gt_task task = parse_task(a.task);
  Manifest m("filter");
  ModelHandle base;
  if (!a.model_file.empty()) {
    m.input("model", a.model_file);
    check(gt_model_load(a.model_file.c_str(), base.out()));
    task = gt_model_task(base.get());
  }
  gt_config config = a.config.resolve(task);
  config.npairs = a.q;
  m["seed"] = config.seed;
  m["task"] = task_string(task);
  m["scorer"] = a.fast ? "fast" : "model-based";
  m["fit_main"] = a.fit_main;
  m["config"] = config_json(config);
  m.input("data", a.data);

  DatasetHandle data;
  check(gt_dataset_load_csv(a.data.c_str(), a.target.c_str(), task, data.out()));
  RankingHandle ranking;
  m.timed("filter", [&] {
    check(gt_filter(data.get(), base.get(), &config, a.q, a.fast ? 1 : 0, a.fit_main ? 1 : 0, ranking.out()));
  });
  check(gt_ranking_write_csv(ranking.get(), a.out.c_str()));
  m.output("ranking", a.out);

  json top = json::array();
  for (size_t i = 0; i < gt_ranking_top_count(ranking.get()); ++i) {
    size_t j = 0, k = 0;
    double score = 0.0;
    check(gt_ranking_top(ranking.get(), i, &j, &k, &score));
    top.push_back({{"j", gt_dataset_column_name(data.get(), j - 1)}, {"k", gt_dataset_column_name(data.get(), k - 1)}});
    std::cout << i + 1 << " " << gt_dataset_column_name(data.get(), j - 1) << ":"
              << gt_dataset_column_name(data.get(), k - 1) << " " << fmt(score) << "\n";
  }
  m["top_pairs"] = top;
  m.write(manifest_path(a.manifest, a.out + ".manifest.json"));
}

// ---- importance / export-effects --------------------------------------------

struct EffectsArgs {
  std::string model_file, train, target = "y", out, manifest;
  size_t grid_size = 100;
};

void compute_effects(Manifest& m, const EffectsArgs& a, ModelHandle& model, DatasetHandle& train,
                     EffectsHandle& effects) {
  m.input("model", a.model_file);
  m.input("train", a.train);
  check(gt_model_load(a.model_file.c_str(), model.out()));
  gt_config config;
  check(gt_model_config(model.get(), &config));
  m["seed"] = config.seed;
  check(gt_dataset_load_csv(a.train.c_str(), a.target.c_str(), gt_model_task(model.get()), train.out()));
  m.timed("purify", [&] { check(gt_effects_compute(model.get(), train.get(), effects.out())); });
}

void cmd_importance(const EffectsArgs& a) {
  Manifest m("importance");
  ModelHandle model;
  DatasetHandle train;
  EffectsHandle effects;
  compute_effects(m, a, model, train, effects);
  check(gt_effects_write_importance_csv(effects.get(), a.out.c_str()));
  m.output("importance", a.out);
  for (size_t i = 0; i < gt_effects_count(effects.get()); ++i) {
    const char* name = nullptr;
    double imp = 0.0;
    check(gt_effects_component(effects.get(), i, &name, nullptr, &imp));
    std::cout << name << " " << fmt(imp) << "\n";
  }
  m.write(manifest_path(a.manifest, a.out + ".manifest.json"));
}

void cmd_export(const EffectsArgs& a) {
  Manifest m("export-effects");
  ModelHandle model;
  DatasetHandle train;
  EffectsHandle effects;
  compute_effects(m, a, model, train, effects);
  m.timed("export", [&] { check(gt_effects_export(effects.get(), a.grid_size, a.out.c_str())); });
  m.output("effects", a.out);
  m.write(manifest_path(a.manifest, (fs::path(a.out) / "manifest.json").string()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boosted model-based trees for GA2M models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gt_version());

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a simulated train/valid/test split");
  s->add_option("--model", sim.model, "Model form 1-4")->required();
  s->add_option("--n", sim.n, "Total rows");
  s->add_option("--rho", sim.rho, "Within-block correlation");
  s->add_option("--task", sim.task, "continuous or binary");
  s->add_option("--noise-sd", sim.noise_sd, "Noise standard deviation (continuous)");
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--out-dir", sim.out_dir, "Output directory")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit a model and export its purified effects");
  f->add_option("--train", fit.train, "Training CSV")->required();
  f->add_option("--valid", fit.valid, "Validation CSV")->required();
  f->add_option("--target", fit.target, "Target column");
  f->add_option("--task", fit.task, "continuous or binary");
  f->add_option("--out-dir", fit.out_dir, "Output directory")->required();
  f->add_option("--grid-size", fit.grid_size, "Points per effect grid axis");
  fit.config.add(f);

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Score a CSV with a saved model");
  p->add_option("--model-file", pred.model_file, "Model file")->required();
  p->add_option("--data", pred.data, "Input CSV")->required();
  p->add_option("--target", pred.target, "Target column, used when present");
  p->add_option("--out", pred.out, "Predictions CSV")->required();
  p->add_option("--manifest", pred.manifest, "Manifest path");

  FilterArgs filt;
  auto* fl = app.add_subcommand("filter", "Rank candidate interaction pairs");
  fl->add_option("--data", filt.data, "Input CSV")->required();
  fl->add_option("--target", filt.target, "Target column");
  fl->add_option("--task", filt.task, "continuous or binary");
  fl->add_option("--q", filt.q, "Pairs to keep");
  fl->add_option("--out", filt.out, "Ranking CSV")->required();
  fl->add_option("--manifest", filt.manifest, "Manifest path");
  fl->add_option("--model-file", filt.model_file, "Score residuals of this model");
  fl->add_flag("--fast", filt.fast, "Use the four-quadrant baseline scorer");
  fl->add_flag("--fit-main", filt.fit_main, "Fit main effects before screening");
  filt.config.add(fl);

  EffectsArgs imp;
  auto* im = app.add_subcommand("importance", "Write component importances of a saved model");
  im->add_option("--model-file", imp.model_file, "Model file")->required();
  im->add_option("--train", imp.train, "Training CSV")->required();
  im->add_option("--target", imp.target, "Target column");
  im->add_option("--out", imp.out, "Importance CSV")->required();
  im->add_option("--manifest", imp.manifest, "Manifest path");

  EffectsArgs exp;
  auto* ex = app.add_subcommand("export-effects", "Export purified effect grids of a saved model");
  ex->add_option("--model-file", exp.model_file, "Model file")->required();
  ex->add_option("--train", exp.train, "Training CSV")->required();
  ex->add_option("--target", exp.target, "Target column");
  ex->add_option("--out-dir", exp.out, "Output directory")->required();
  ex->add_option("--grid-size", exp.grid_size, "Points per effect grid axis");
  ex->add_option("--manifest", exp.manifest, "Manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : GT_ERR_USAGE;
  }

  try {
    if (s->parsed()) cmd_simulate(sim);
    if (f->parsed()) cmd_fit(fit);
    if (p->parsed()) cmd_predict(pred);
    if (fl->parsed()) cmd_filter(filt);
    if (im->parsed()) cmd_importance(imp);
    if (ex->parsed()) cmd_export(exp);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.message << "\n";
    return static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return GT_ERR_INTERNAL;
  }
  return 0;
}
