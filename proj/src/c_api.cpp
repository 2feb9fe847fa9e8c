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

#include "gamitree/gamitree.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <new>
#include <string>

#include "gamitree/boost.hpp"
#include "gamitree/dataset.hpp"
#include "gamitree/error.hpp"
#include "gamitree/filter.hpp"
#include "gamitree/gami.hpp"
#include "gamitree/losses.hpp"
#include "gamitree/metrics.hpp"
#include "gamitree/purify.hpp"
#include "gamitree/sim.hpp"

struct gt_dataset {
  gamitree::Dataset data;
  bool has_target = true;
};

struct gt_model {
  gamitree::FittedModel model;
};

struct gt_ranking {
  gamitree::PairRanking ranking;
  std::vector<std::string> names;
};

struct gt_effects {
  gamitree::EffectSet effects;
  std::vector<gamitree::ImportanceEntry> importances;
  gamitree::Dataset train;
};

namespace {

using gamitree::Error;
using gamitree::ErrorKind;

thread_local std::string g_last_error;

gt_status fail(gt_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
gt_status guarded(Fn&& fn) {
  try {
    fn();
    return GT_OK;
  } catch (const Error& e) {
    return fail(static_cast<gt_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GT_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorKind::Usage, std::string(what) + " must not be null");
}

gamitree::Task to_task(gt_task task) {
  switch (task) {
    case GT_TASK_CONTINUOUS:
      return gamitree::Task::Continuous;
    case GT_TASK_BINARY:
      return gamitree::Task::Binary;
  }
  throw Error(ErrorKind::Usage, "unknown task value");
}

gt_task from_task(gamitree::Task task) { return task == gamitree::Task::Binary ? GT_TASK_BINARY : GT_TASK_CONTINUOUS; }

gamitree::GamiConfig to_config(const gt_config& c) {
  gamitree::GamiConfig out;
  out.max_iterations = c.max_iterations;
  out.max_depth = c.max_depth;
  out.learning_rate = c.learning_rate;
  out.nknots = c.nknots;
  out.rounds = c.rounds;
  out.npairs = c.npairs;
  out.max_coef = c.max_coef < 0.0 ? std::numeric_limits<double>::infinity() : c.max_coef;
  out.patience = c.patience;
  out.min_leaf = c.min_leaf;
  out.max_bins = c.max_bins;
  out.filter_subsample = c.filter_subsample;
  out.seed = c.seed;
  out.threads = c.threads;
  return out;
}

gt_config from_config(const gamitree::GamiConfig& c) {
  gt_config out{};
  out.max_iterations = c.max_iterations;
  out.max_depth = c.max_depth;
  out.learning_rate = c.learning_rate;
  out.nknots = c.nknots;
  out.rounds = c.rounds;
  out.npairs = c.npairs;
  out.max_coef = std::isfinite(c.max_coef) ? c.max_coef : -1.0;
  out.patience = c.patience;
  out.min_leaf = c.min_leaf;
  out.max_bins = c.max_bins;
  out.filter_subsample = c.filter_subsample;
  out.seed = c.seed;
  out.threads = c.threads;
  return out;
}

}  // namespace

extern "C" {

const char* gt_last_error(void) { return g_last_error.c_str(); }

const char* gt_version(void) { return "1.0.0"; }

gt_status gt_config_default(gt_task task, gt_config* out) {
  return guarded([&] {
    require(out, "out");
    *out = from_config(gamitree::default_config(to_task(task)));
  });
}

gt_status gt_dataset_load_csv(const char* path, const char* target, gt_task task, gt_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const std::string name = target ? target : "";
    *out = new gt_dataset{gamitree::load_csv(path, name, to_task(task)), !name.empty()};
  });
}

void gt_dataset_free(gt_dataset* ds) { delete ds; }

int gt_dataset_has_target(const gt_dataset* ds) { return ds && ds->has_target ? 1 : 0; }

size_t gt_dataset_rows(const gt_dataset* ds) { return ds ? ds->data.rows() : 0; }

size_t gt_dataset_cols(const gt_dataset* ds) { return ds ? ds->data.cols() : 0; }

const char* gt_dataset_column_name(const gt_dataset* ds, size_t j) {
  if (ds == nullptr || j >= ds->data.cols()) return nullptr;
  return ds->data.name(j).c_str();
}

gt_status gt_dataset_target(const gt_dataset* ds, double* out, size_t len) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (len != ds->data.rows()) throw Error(ErrorKind::Usage, "output length does not match row count");
    const auto y = ds->data.target();
    std::copy(y.begin(), y.end(), out);
  });
}

gt_status gt_simulate(int model_id, size_t n, double rho, gt_task task, double noise_sd, uint64_t seed,
                      const char* out_dir, double* beta0_out) {
  return guarded([&] {
    require(out_dir, "out_dir");
    gamitree::sim::SimScenario s;
    s.model_id = model_id;
    s.n = n;
    s.rho = rho;
    s.task = to_task(task);
    s.noise_sd = noise_sd;
    s.seed = seed;
    s.validate();
    const auto split = gamitree::sim::simulate_split(s);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) gamitree::throw_data(std::string("cannot create directory ") + out_dir + ": " + ec.message());
    const std::filesystem::path dir(out_dir);
    gamitree::write_csv((dir / "train.csv").string(), split.train, "y");
    gamitree::write_csv((dir / "valid.csv").string(), split.valid, "y");
    gamitree::write_csv((dir / "test.csv").string(), split.test, "y");
    if (beta0_out) *beta0_out = split.beta0;
  });
}

gt_status gt_sim_true_pairs(int model_id, size_t* pairs_out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(count, "count");
    const auto pairs = gamitree::sim::true_pairs(model_id);
    *count = pairs.size();
    if (pairs_out == nullptr) return;
    for (size_t i = 0; i < pairs.size() && i < capacity; ++i) {
      pairs_out[2 * i] = pairs[i].first + 1;
      pairs_out[2 * i + 1] = pairs[i].second + 1;
    }
  });
}

gt_status gt_fit(const gt_dataset* train, const gt_dataset* valid, const gt_config* config, gt_log_fn log, void* user,
                 gt_model** out) {
  return guarded([&] {
    require(train, "train");
    require(valid, "valid");
    require(config, "config");
    if (!train->has_target || !valid->has_target) throw Error(ErrorKind::Usage, "fitting requires a target column");
    require(out, "out");
    gamitree::FitLogger logger;
    if (log) logger = [log, user](const std::string& msg) { log(msg.c_str(), user); };
    *out = new gt_model{gamitree::fit_gami(train->data, valid->data, to_config(*config), logger)};
  });
}

void gt_model_free(gt_model* model) { delete model; }

gt_status gt_model_save(const gt_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    gamitree::save_model(model->model, path);
  });
}

gt_status gt_model_load(const char* path, gt_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gt_model{gamitree::load_model(path)};
  });
}

gt_status gt_model_truncate(const gt_model* model, size_t rounds, gt_model** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    if (rounds < 1) throw Error(ErrorKind::Validation, "rounds must be at least 1");
    *out = new gt_model{gamitree::truncate_rounds(model->model, rounds)};
  });
}

gt_status gt_model_config(const gt_model* model, gt_config* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = from_config(model->model.config);
  });
}

gt_task gt_model_task(const gt_model* model) { return model ? from_task(model->model.task) : GT_TASK_CONTINUOUS; }

size_t gt_model_round_count(const gt_model* model) { return model ? model->model.rounds.size() : 0; }

size_t gt_model_tree_count(const gt_model* model) { return model ? model->model.tree_count() : 0; }

gt_status gt_model_round_info(const gt_model* model, size_t round, size_t* main_trees, size_t* interaction_trees,
                              double* validation_loss) {
  return guarded([&] {
    require(model, "model");
    if (round >= model->model.rounds.size()) throw Error(ErrorKind::Usage, "round index out of range");
    const auto& r = model->model.rounds[round];
    if (main_trees) *main_trees = r.main.stop_iterations;
    if (interaction_trees) *interaction_trees = r.interaction.stop_iterations;
    if (validation_loss) {
      const auto& curve = r.interaction.validation_curve;
      *validation_loss = r.interaction.stop_iterations < curve.size() ? curve[r.interaction.stop_iterations]
                                                                      : std::numeric_limits<double>::quiet_NaN();
    }
  });
}

gt_status gt_model_predict(const gt_model* model, const gt_dataset* ds, double* link_out, double* prob_out, size_t len) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    require(link_out, "link_out");
    if (len != ds->data.rows()) throw Error(ErrorKind::Usage, "output length does not match row count");
    const auto g = gamitree::predict(model->model, ds->data);
    std::copy(g.begin(), g.end(), link_out);
    if (prob_out)
      for (size_t i = 0; i < len; ++i) prob_out[i] = gamitree::sigmoid(g[i]);
  });
}

gt_status gt_metric_mse(const double* y, const double* pred, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(y, "y");
      require(pred, "pred");
    }
    *out = gamitree::mse({y, n}, {pred, n});
  });
}

gt_status gt_metric_auc(const double* y, const double* score, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(y, "y");
      require(score, "score");
    }
    *out = gamitree::auc({y, n}, {score, n});
  });
}

gt_status gt_metric_mean_loss(const double* y, const double* link, size_t n, gt_task task, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(y, "y");
      require(link, "link");
    }
    *out = gamitree::mean_loss({y, n}, {link, n}, to_task(task));
  });
}

gt_status gt_filter(const gt_dataset* data, const gt_model* base, const gt_config* config, size_t q, int fast,
                    int fit_main, gt_ranking** out) {
  return guarded([&] {
    require(data, "data");
    require(config, "config");
    require(out, "out");
    if (!data->has_target) throw Error(ErrorKind::Usage, "filtering requires a target column");
    const gamitree::GamiConfig cfg = to_config(*config);
    cfg.validate();
    if (q < 1) throw Error(ErrorKind::Validation, "npairs must be at least 1");

    gamitree::Dataset screen = data->data;
    std::vector<double> g;
    if (base) {
      g = gamitree::predict(base->model, screen);
    } else {
      g.assign(screen.rows(), gamitree::init_offset(screen.target(), screen.task()));
    }
    if (fit_main) {
      auto [train, valid] = gamitree::split_train_valid(screen, 0.25, cfg.seed);
      const gamitree::FeatureFrame frame = gamitree::make_frame(train, cfg.max_bins, cfg.nknots);
      gamitree::Predictions pred;
      if (base) {
        pred.train = gamitree::predict(base->model, train);
        pred.valid = gamitree::predict(base->model, valid);
      } else {
        const double offset = gamitree::init_offset(train.target(), train.task());
        pred.train.assign(train.rows(), offset);
        pred.valid.assign(valid.rows(), offset);
      }
      gamitree::fit_main_stage(frame, valid, pred, cfg.boost_params());
      screen = std::move(train);
      g = std::move(pred.train);
    }
    const gamitree::FeatureFrame frame = gamitree::make_frame(screen, cfg.max_bins, cfg.nknots);
    auto ranking = fast ? gamitree::fast_filter(frame, g, q, cfg.filter_params())
                        : gamitree::filter_interactions(frame, g, q, cfg.filter_params());
    *out = new gt_ranking{std::move(ranking), screen.names()};
  });
}

void gt_ranking_free(gt_ranking* ranking) { delete ranking; }

size_t gt_ranking_top_count(const gt_ranking* ranking) { return ranking ? ranking->ranking.top_pairs.size() : 0; }

gt_status gt_ranking_top(const gt_ranking* ranking, size_t idx, size_t* j, size_t* k, double* score) {
  return guarded([&] {
    require(ranking, "ranking");
    if (idx >= ranking->ranking.top_pairs.size()) throw Error(ErrorKind::Usage, "ranking index out of range");
    const auto& p = ranking->ranking.top_pairs[idx];
    if (j) *j = p.j + 1;
    if (k) *k = p.k + 1;
    if (score) *score = p.score;
  });
}

gt_status gt_ranking_write_csv(const gt_ranking* ranking, const char* path) {
  return guarded([&] {
    require(ranking, "ranking");
    require(path, "path");
    gamitree::write_ranking_csv(path, ranking->ranking, ranking->names);
  });
}

gt_status gt_effects_compute(const gt_model* model, const gt_dataset* train, gt_effects** out) {
  return guarded([&] {
    require(model, "model");
    require(train, "train");
    require(out, "out");
    const auto raw = gamitree::assemble_raw_effects(model->model);
    auto purified = gamitree::purify_effects(raw, train->data, model->model.config.nknots);
    auto imp = gamitree::importance(purified, train->data);
    *out = new gt_effects{std::move(purified), std::move(imp), train->data};
  });
}

void gt_effects_free(gt_effects* effects) { delete effects; }

size_t gt_effects_count(const gt_effects* effects) { return effects ? effects->importances.size() : 0; }

gt_status gt_effects_component(const gt_effects* effects, size_t idx, const char** name, int* is_pair,
                               double* importance) {
  return guarded([&] {
    require(effects, "effects");
    if (idx >= effects->importances.size()) throw Error(ErrorKind::Usage, "component index out of range");
    const auto& e = effects->importances[idx];
    if (name) *name = e.component.c_str();
    if (is_pair) *is_pair = e.interaction ? 1 : 0;
    if (importance) *importance = e.importance;
  });
}

gt_status gt_effects_write_importance_csv(const gt_effects* effects, const char* path) {
  return guarded([&] {
    require(effects, "effects");
    require(path, "path");
    gamitree::write_importance_csv(path, effects->importances);
  });
}

gt_status gt_effects_export(const gt_effects* effects, size_t grid_size, const char* dir) {
  return guarded([&] {
    require(effects, "effects");
    require(dir, "dir");
    const auto grids = gamitree::export_effect_grids(effects->effects, effects->train, grid_size);
    gamitree::write_effect_exports(dir, grids, effects->importances);
  });
}

}  // extern "C"
