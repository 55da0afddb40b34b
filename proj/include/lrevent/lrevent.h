// Copyright 2026 The lrevent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// C interface to lrevent. Every function returns an lrev_status; on failure
// lrev_last_error() describes the problem for the calling thread. Objects
// are opaque handles released with their matching *_free function, which
// accepts NULL.

#ifndef LREVENT_LREVENT_H_
#define LREVENT_LREVENT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(LREV_BUILDING_LIBRARY)
#define LREV_API __attribute__((visibility("default")))
#else
#define LREV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrev_status {
  LREV_OK = 0,
  LREV_INVALID_ARGUMENT = 1,
  LREV_OUT_OF_RANGE = 2,
  LREV_IO = 3,
  LREV_FORMAT = 4,
  LREV_NUMERICAL = 5,
  LREV_INTERNAL = 6
} lrev_status;

typedef struct lrev_matrix lrev_matrix;
typedef struct lrev_model lrev_model;
typedef struct lrev_trace lrev_trace;
typedef struct lrev_report lrev_report;
typedef struct lrev_dataset lrev_dataset;

LREV_API const char* lrev_version(void);
LREV_API const char* lrev_last_error(void);
LREV_API const char* lrev_status_name(lrev_status status);

/* Observation matrices. */

// Reads "sensor,day,period,value" records; zero dimensions are inferred as
// one past the largest index seen. `duplicates` may be NULL.
LREV_API lrev_status lrev_matrix_read_records_csv(const char* path, size_t days, size_t periods,
                                                  size_t sensors, int zeros_as_missing,
                                                  lrev_matrix** out, size_t* duplicates);
LREV_API lrev_status lrev_matrix_write_records_csv(const lrev_matrix* matrix, const char* path,
                                                   size_t periods, size_t sensors);
LREV_API lrev_status lrev_matrix_load(const char* path, lrev_matrix** out);
LREV_API lrev_status lrev_matrix_save(const lrev_matrix* matrix, const char* path);
// Builds a matrix of exact entries from a row-major array; NaN marks a missing cell.
LREV_API lrev_status lrev_matrix_from_dense(const double* values, size_t rows, size_t cols,
                                            lrev_matrix** out);
// Turns every exact entry into the interval [x - delta, x + delta].
LREV_API lrev_status lrev_matrix_widen(const lrev_matrix* matrix, double delta, lrev_matrix** out);
LREV_API size_t lrev_matrix_rows(const lrev_matrix* matrix);
LREV_API size_t lrev_matrix_cols(const lrev_matrix* matrix);
LREV_API size_t lrev_matrix_size(const lrev_matrix* matrix);
// Writes row `row` as `cols` values with NaN for missing cells.
LREV_API lrev_status lrev_matrix_dense_row(const lrev_matrix* matrix, size_t row, double* out,
                                           size_t cols);
LREV_API void lrev_matrix_free(lrev_matrix* matrix);

/* Completion. */

typedef struct lrev_fit_config {
  size_t rank;
  double mu;
  double row_fraction;
  double column_fraction;
  size_t max_epochs;
  double tolerance;  // stop when the epoch improves the objective by less than this fraction
  uint64_t seed;
  double init_scale;  // 0 picks a scale from the data
  unsigned threads;   // 0 uses every hardware thread
} lrev_fit_config;

LREV_API void lrev_fit_config_default(lrev_fit_config* config);
// `trace` may be NULL.
LREV_API lrev_status lrev_fit(const lrev_matrix* matrix, const lrev_fit_config* config,
                              lrev_model** model, lrev_trace** trace);

LREV_API size_t lrev_trace_epochs(const lrev_trace* trace);
LREV_API double lrev_trace_initial_objective(const lrev_trace* trace);
LREV_API lrev_status lrev_trace_get(const lrev_trace* trace, size_t epoch, double* objective,
                                    double* rmse, double* seconds);
LREV_API void lrev_trace_free(lrev_trace* trace);

LREV_API lrev_status lrev_model_load(const char* path, lrev_model** out);
LREV_API lrev_status lrev_model_save(const lrev_model* model, const char* path);
LREV_API size_t lrev_model_rows(const lrev_model* model);
LREV_API size_t lrev_model_cols(const lrev_model* model);
LREV_API size_t lrev_model_rank(const lrev_model* model);
LREV_API lrev_status lrev_model_objective(const lrev_model* model, const lrev_matrix* matrix,
                                          double* out);
LREV_API lrev_status lrev_model_rmse(const lrev_model* model, const lrev_matrix* matrix,
                                     double* out);
LREV_API void lrev_model_free(lrev_model* model);

/* Membership queries against the row space of the model. */

typedef struct lrev_query_config {
  double delta;
  double epsilon;
  double failure_probability;
  double constant;
  size_t sample_size;  // 0 derives it from rank, epsilon and failure_probability
  uint64_t seed;
} lrev_query_config;

typedef struct lrev_query_result {
  int inside;
  double distance;
  size_t sampled;  // coordinates tested
} lrev_query_result;

LREV_API void lrev_query_config_default(lrev_query_config* config);
LREV_API lrev_status lrev_sample_size(size_t rank, double epsilon, double failure_probability,
                                      double constant, size_t* out);
// `x` has lrev_model_cols(model) values; NaN marks a missing coordinate.
LREV_API lrev_status lrev_membership(const lrev_model* model, const double* x, size_t n,
                                     const lrev_query_config* config, lrev_query_result* out);
LREV_API lrev_status lrev_exact_membership(const lrev_model* model, const double* x, size_t n,
                                           double delta, lrev_query_result* out);

/* Detection. */

typedef enum lrev_label { LREV_NONEVENT = 0, LREV_EVENT = 1 } lrev_label;

// Largest exact distance from a holdout row to the model's row space.
LREV_API lrev_status lrev_calibrate_delta(const lrev_model* model, const lrev_matrix* holdout,
                                          unsigned threads, double* out);
// Uses config->delta as the threshold and `seed` for the coordinate sample.
LREV_API lrev_status lrev_classify(const lrev_model* model, const lrev_query_config* config,
                                   int exact, const double* x, size_t n, uint64_t seed,
                                   lrev_label* label, double* distance);
LREV_API uint64_t lrev_evaluation_seed(uint64_t seed, size_t repetition, size_t index);

LREV_API lrev_status lrev_labels_read_csv(const char* path, uint8_t** labels, size_t* count);
LREV_API lrev_status lrev_labels_write_csv(const char* path, const uint8_t* labels, size_t count);
// Releases buffers returned by the library.
LREV_API void lrev_buffer_free(void* buffer);

typedef struct lrev_eval_row {
  double delta;
  double tp, fp, fn, tn;
  double precision, recall, f1;
} lrev_eval_row;

LREV_API lrev_status lrev_evaluate(const lrev_model* model, const lrev_query_config* config,
                                   int exact, const lrev_matrix* samples, const uint8_t* labels,
                                   size_t label_count, const double* grid, size_t grid_count,
                                   size_t repetitions, uint64_t seed, unsigned threads,
                                   lrev_report** out);
LREV_API size_t lrev_report_rows(const lrev_report* report);
LREV_API lrev_status lrev_report_get(const lrev_report* report, size_t index, lrev_eval_row* out);
LREV_API size_t lrev_report_sample_size(const lrev_report* report);
LREV_API size_t lrev_report_repetitions(const lrev_report* report);
LREV_API lrev_status lrev_report_write_csv(const lrev_report* report, const char* path);
LREV_API void lrev_report_free(lrev_report* report);

/* Synthetic data. */

#define LREV_MAX_EVENT_MEANS 16

typedef enum lrev_base_shape { LREV_BASE_UNIFORM = 0, LREV_BASE_TRAFFIC = 1 } lrev_base_shape;

typedef struct lrev_synth_config {
  lrev_base_shape base_shape;
  size_t base_rows;
  size_t periods;
  size_t sensors;
  size_t base_rank;
  double value_scale;
  double density;
  size_t rows_out;
  size_t train_rows;
  double scalar_min;
  double scalar_max;
  double noise_delta;
  double noise_fraction;
  double event_means[LREV_MAX_EVENT_MEANS];
  size_t event_mean_count;
  double event_sigma;
  size_t event_rows;
  uint64_t seed;
} lrev_synth_config;

LREV_API void lrev_synth_config_default(lrev_synth_config* config);
LREV_API lrev_status lrev_synth_generate(const lrev_synth_config* config, lrev_dataset** out);
// Every non-event row, in generation order.
LREV_API lrev_status lrev_dataset_nonevents(const lrev_dataset* dataset, lrev_matrix** out);
LREV_API lrev_status lrev_dataset_train(const lrev_dataset* dataset, lrev_matrix** out);
LREV_API size_t lrev_dataset_variants(const lrev_dataset* dataset);
LREV_API double lrev_dataset_event_mean(const lrev_dataset* dataset, size_t variant);
LREV_API lrev_status lrev_dataset_events(const lrev_dataset* dataset, size_t variant,
                                         lrev_matrix** out);
// Held-out non-event rows followed by the variant's event rows.
LREV_API lrev_status lrev_dataset_eval(const lrev_dataset* dataset, size_t variant,
                                       lrev_matrix** out);
LREV_API lrev_status lrev_dataset_eval_labels(const lrev_dataset* dataset, size_t variant,
                                              uint8_t** labels, size_t* count);
LREV_API void lrev_dataset_free(lrev_dataset* dataset);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // LREVENT_LREVENT_H_
