/* Copyright 2026 The DTM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DTM_DTM_H_
#define DTM_DTM_H_

/* C interface to the token morphing library. Every object is an opaque handle
 * released with its matching *_free function. Functions return a dtm_status;
 * on failure dtm_last_error() describes the most recent error on the calling
 * thread. Output pointers are written only on success. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DTM_BUILDING_LIBRARY)
#define DTM_API __declspec(dllexport)
#else
#define DTM_API __declspec(dllimport)
#endif
#else
#define DTM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Bumped on any incompatible change to this header. */
#define DTM_ABI_VERSION 1

typedef enum dtm_status {
  DTM_OK = 0,
  DTM_ERR_INVALID_ARGUMENT = 1,
  DTM_ERR_EMPTY_MATRIX = 2,
  DTM_ERR_NON_FINITE = 3,
  DTM_ERR_INVALID_RANGE = 4,
  DTM_ERR_DIMENSION_MISMATCH = 5,
  DTM_ERR_TOO_FEW_TOKENS = 6,
  DTM_ERR_SCHEDULE_MISMATCH = 7,
  DTM_ERR_INDIVISIBLE_GRID = 8,
  DTM_ERR_DEGENERATE_NORM = 9,
  DTM_ERR_BAD_MAGIC = 10,
  DTM_ERR_BAD_VERSION = 11,
  DTM_ERR_TRUNCATED_PAYLOAD = 12,
  DTM_ERR_UNSUPPORTED_DTYPE = 13,
  DTM_ERR_UNSUPPORTED_RANK = 14,
  DTM_ERR_TRAILING_DATA = 15,
  DTM_ERR_GRID_MISMATCH = 16,
  DTM_ERR_IO = 17,
  DTM_ERR_INTERNAL = 18
} dtm_status;

typedef enum dtm_split { DTM_SPLIT_RANDOM = 0, DTM_SPLIT_ALTERNATING = 1 } dtm_split;

typedef enum dtm_mean_mode {
  DTM_MEAN_SIZE_WEIGHTED = 0,
  DTM_MEAN_PAPER_LITERAL = 1
} dtm_mean_mode;

typedef enum dtm_bench_variant {
  DTM_BENCH_BIPARTITE = 0,
  DTM_BENCH_KMEANS = 1,
  DTM_BENCH_DOWNSAMPLE = 2
} dtm_bench_variant;

typedef struct dtm_tensor dtm_tensor;
typedef struct dtm_morphing dtm_morphing;
typedef struct dtm_loss_result dtm_loss_result;
typedef struct dtm_report dtm_report;

typedef struct dtm_scheduler_config {
  size_t n_min;    /* minimum final token count, default 1 */
  size_t k_max;    /* maximum morphing iterations, default 14 */
  size_t n_losses; /* schedules per objective, default 2 */
  size_t n_final;  /* 0 samples the final count; otherwise pins it */
} dtm_scheduler_config;

typedef struct dtm_bench_result {
  double median_us;
  double p90_us;
  size_t reps;
} dtm_bench_result;

DTM_API int dtm_abi_version(void);
DTM_API const char* dtm_status_name(dtm_status status);
DTM_API const char* dtm_last_error(void);
DTM_API void dtm_scheduler_config_init(dtm_scheduler_config* cfg);

/* Tensors: row-major float32, rows x cols. Data is copied in. */
DTM_API dtm_status dtm_tensor_create(size_t rows, size_t cols,
                                     const float* data, dtm_tensor** out);
DTM_API dtm_status dtm_tensor_read(const char* path, dtm_tensor** out);
DTM_API dtm_status dtm_tensor_write(const dtm_tensor* t, const char* path);
DTM_API size_t dtm_tensor_rows(const dtm_tensor* t);
DTM_API size_t dtm_tensor_cols(const dtm_tensor* t);
DTM_API const float* dtm_tensor_data(const dtm_tensor* t);
DTM_API void dtm_tensor_free(dtm_tensor* t);

/* Samples a schedule from `seed` and morphs `targets`. */
DTM_API dtm_status dtm_morph(const dtm_tensor* targets, uint64_t seed,
                             const dtm_scheduler_config* cfg, dtm_split split,
                             dtm_mean_mode mode, dtm_morphing** out);
/* Wraps an existing assignment (dense, nonempty group ids). */
DTM_API dtm_status dtm_morphing_from_assignment(const uint32_t* assignment,
                                                size_t n_tokens,
                                                dtm_morphing** out);
DTM_API size_t dtm_morphing_n_tokens(const dtm_morphing* m);
DTM_API size_t dtm_morphing_n_groups(const dtm_morphing* m);
DTM_API const uint32_t* dtm_morphing_assignment(const dtm_morphing* m);
DTM_API const uint32_t* dtm_morphing_weights(const dtm_morphing* m);
/* Schedule that produced the matrix; zero steps for wrapped assignments. */
DTM_API size_t dtm_morphing_schedule_n_final(const dtm_morphing* m);
DTM_API size_t dtm_morphing_schedule_steps(const dtm_morphing* m);
DTM_API const uint64_t* dtm_morphing_schedule_counts(const dtm_morphing* m);
DTM_API dtm_status dtm_morphing_apply(const dtm_morphing* m,
                                      const dtm_tensor* tokens,
                                      dtm_tensor** out);
DTM_API dtm_status dtm_morphing_expand(const dtm_morphing* m,
                                       const dtm_tensor* morphed,
                                       dtm_tensor** out);
DTM_API dtm_status dtm_render_group_map(const dtm_morphing* m, size_t grid_h,
                                        size_t grid_w, const char* path);
DTM_API void dtm_morphing_free(dtm_morphing* m);

/* Multi-schedule objective: summed loss, gradient w.r.t. online tokens and
 * one report per schedule. */
DTM_API dtm_status dtm_objective(const dtm_tensor* online,
                                 const dtm_tensor* targets, uint64_t seed,
                                 const dtm_scheduler_config* cfg,
                                 dtm_split split, dtm_mean_mode mode,
                                 dtm_loss_result** out);
DTM_API double dtm_loss_total(const dtm_loss_result* r);
DTM_API size_t dtm_loss_n_schedules(const dtm_loss_result* r);
DTM_API double dtm_loss_schedule_total(const dtm_loss_result* r, size_t i);
DTM_API size_t dtm_loss_schedule_n_final(const dtm_loss_result* r, size_t i);
DTM_API size_t dtm_loss_schedule_steps(const dtm_loss_result* r, size_t i);
/* Borrowed; valid until the result is freed. */
DTM_API const dtm_tensor* dtm_loss_gradient(const dtm_loss_result* r);
DTM_API void dtm_loss_free(dtm_loss_result* r);

/* Spatial-consistency report. `m` and `reference` may be NULL; truth < 0
 * disables agreement counting. */
DTM_API dtm_status dtm_analyze(const dtm_tensor* tokens,
                               const dtm_tensor* classes,
                               const dtm_morphing* m, int64_t truth,
                               const dtm_tensor* reference, dtm_report** out);
DTM_API size_t dtm_report_n_tokens(const dtm_report* r);
DTM_API const uint32_t* dtm_report_labels(const dtm_report* r);
DTM_API uint32_t dtm_report_ensemble_label(const dtm_report* r);
/* -1 when no truth was given. */
DTM_API int64_t dtm_report_agreement(const dtm_report* r);
/* 0 when no reference was given. */
DTM_API int dtm_report_has_reference(const dtm_report* r);
DTM_API double dtm_report_mean_ref_cosine(const dtm_report* r);
DTM_API void dtm_report_free(dtm_report* r);

/* Times grouping + apply at n_tokens x dim. The bipartite variant uses
 * n_final = n_tokens / 2 with `steps` iterations; k-means uses n_tokens / 2
 * groups. */
DTM_API dtm_status dtm_bench(dtm_bench_variant variant, size_t n_tokens,
                             size_t dim, size_t steps, size_t reps,
                             uint64_t seed, dtm_bench_result* out);

#ifdef __cplusplus
}
#endif

#endif /* DTM_DTM_H_ */
