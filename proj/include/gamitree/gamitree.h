/*
 * Copyright 2026 The gamitree Authors. All Rights Reserved.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the gamitree library. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every fallible
 * call returns a gt_status; on failure gt_last_error() describes the problem
 * (the message is thread-local and valid until the next failing call on the
 * same thread).
 */

#ifndef GAMITREE_GAMITREE_H
#define GAMITREE_GAMITREE_H

#include <stddef.h>
#include <stdint.h>

#if defined(GAMITREE_BUILDING_LIBRARY)
#define GT_API __attribute__((visibility("default")))
#else
#define GT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gt_status {
  GT_OK = 0,
  GT_ERR_USAGE = 1,
  GT_ERR_VALIDATION = 2,
  GT_ERR_DATA = 3,
  GT_ERR_INTERNAL = 4
} gt_status;

typedef enum gt_task { GT_TASK_CONTINUOUS = 0, GT_TASK_BINARY = 1 } gt_task;

typedef struct gt_dataset gt_dataset;
typedef struct gt_model gt_model;
typedef struct gt_ranking gt_ranking;
typedef struct gt_effects gt_effects;

/* Fit configuration. Start from gt_config_default(); the ridge penalty grid is
 * always {e^-8, ..., e^0}. A negative max_coef means unbounded. */
typedef struct gt_config {
  size_t max_iterations;
  size_t max_depth;
  double learning_rate;
  size_t nknots;
  size_t rounds;
  size_t npairs;
  double max_coef;
  size_t patience;
  size_t min_leaf;
  size_t max_bins;
  size_t filter_subsample;
  uint64_t seed;
  int threads;
} gt_config;

typedef void (*gt_log_fn)(const char* message, void* user);

GT_API const char* gt_last_error(void);
GT_API const char* gt_version(void);

GT_API gt_status gt_config_default(gt_task task, gt_config* out);

/* ---- datasets ---------------------------------------------------------- */

/* A NULL or empty target loads features only; gt_dataset_has_target then
 * reports 0 and the target reads as zeros. */
GT_API gt_status gt_dataset_load_csv(const char* path, const char* target, gt_task task, gt_dataset** out);
GT_API void gt_dataset_free(gt_dataset* ds);
GT_API int gt_dataset_has_target(const gt_dataset* ds);
GT_API size_t gt_dataset_rows(const gt_dataset* ds);
GT_API size_t gt_dataset_cols(const gt_dataset* ds);
GT_API const char* gt_dataset_column_name(const gt_dataset* ds, size_t j);
/* Copies the target column into out[0..len). len must equal the row count. */
GT_API gt_status gt_dataset_target(const gt_dataset* ds, double* out, size_t len);

/* ---- simulation -------------------------------------------------------- */

/* Writes train.csv / valid.csv / test.csv (50/25/25 by row order) into
 * out_dir. beta0_out (nullable) receives the balancing intercept of the
 * binary task, 0 otherwise. */
GT_API gt_status gt_simulate(int model_id, size_t n, double rho, gt_task task, double noise_sd, uint64_t seed,
                             const char* out_dir, double* beta0_out);
/* 1-based variable pairs of the model form; writes up to `capacity` pairs as
 * (j, k) into pairs_out[2*i], pairs_out[2*i+1]. */
GT_API gt_status gt_sim_true_pairs(int model_id, size_t* pairs_out, size_t capacity, size_t* count);

/* ---- fitting and prediction ------------------------------------------- */

GT_API gt_status gt_fit(const gt_dataset* train, const gt_dataset* valid, const gt_config* config, gt_log_fn log,
                        void* user, gt_model** out);
GT_API void gt_model_free(gt_model* model);
GT_API gt_status gt_model_save(const gt_model* model, const char* path);
GT_API gt_status gt_model_load(const char* path, gt_model** out);
GT_API gt_status gt_model_truncate(const gt_model* model, size_t rounds, gt_model** out);
GT_API gt_status gt_model_config(const gt_model* model, gt_config* out);
GT_API gt_task gt_model_task(const gt_model* model);
GT_API size_t gt_model_round_count(const gt_model* model);
GT_API size_t gt_model_tree_count(const gt_model* model);
GT_API gt_status gt_model_round_info(const gt_model* model, size_t round, size_t* main_trees,
                                     size_t* interaction_trees, double* validation_loss);
/* link_out and prob_out (nullable) must hold len == row count values. */
GT_API gt_status gt_model_predict(const gt_model* model, const gt_dataset* ds, double* link_out, double* prob_out,
                                  size_t len);

GT_API gt_status gt_metric_mse(const double* y, const double* pred, size_t n, double* out);
GT_API gt_status gt_metric_auc(const double* y, const double* score, size_t n, double* out);
GT_API gt_status gt_metric_mean_loss(const double* y, const double* link, size_t n, gt_task task, double* out);

/* ---- interaction screening -------------------------------------------- */

/* Ranks every pair of predictors against `base` (nullable: offset-only
 * model). With fit_main != 0 a main-effect stage is first fitted on a seeded
 * 75/25 split of `data` and the screen runs on its 75% part. fast != 0 uses
 * the four-quadrant baseline scorer. */
GT_API gt_status gt_filter(const gt_dataset* data, const gt_model* base, const gt_config* config, size_t q, int fast,
                           int fit_main, gt_ranking** out);
GT_API void gt_ranking_free(gt_ranking* ranking);
GT_API size_t gt_ranking_top_count(const gt_ranking* ranking);
/* 1-based variable indices of the idx-th best pair. */
GT_API gt_status gt_ranking_top(const gt_ranking* ranking, size_t idx, size_t* j, size_t* k, double* score);
GT_API gt_status gt_ranking_write_csv(const gt_ranking* ranking, const char* path);

/* ---- purified effects -------------------------------------------------- */

GT_API gt_status gt_effects_compute(const gt_model* model, const gt_dataset* train, gt_effects** out);
GT_API void gt_effects_free(gt_effects* effects);
GT_API size_t gt_effects_count(const gt_effects* effects);
/* Components in descending importance. *name stays valid while the handle lives. */
GT_API gt_status gt_effects_component(const gt_effects* effects, size_t idx, const char** name, int* is_pair,
                                      double* importance);
GT_API gt_status gt_effects_write_importance_csv(const gt_effects* effects, const char* path);
GT_API gt_status gt_effects_export(const gt_effects* effects, size_t grid_size, const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* GAMITREE_GAMITREE_H */
