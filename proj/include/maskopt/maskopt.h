// Copyright 2026 The maskopt Authors.
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

/* maskopt: wrapper feature selection over fused feature matrices.
 *
 * All functions return an mo_status. On failure a message is available from
 * mo_last_error() on the calling thread until the next failing call. Strings
 * handed out by the library are released with mo_string_free().
 */
#ifndef MASKOPT_MASKOPT_H
#define MASKOPT_MASKOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MO_API __declspec(dllexport)
#else
#define MO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mo_status {
  MO_OK = 0,
  MO_ERR_INVALID_ARGUMENT = 1,
  MO_ERR_CONFIG = 2,
  MO_ERR_DATA = 3,
  MO_ERR_NUMERIC = 4, /* non-convergence; outputs are still written */
  MO_ERR_INTERNAL = 5
} mo_status;

typedef struct mo_dataset mo_dataset;
typedef struct mo_model mo_model;

MO_API const char* mo_version(void);
MO_API const char* mo_last_error(void);
MO_API void mo_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* label_column may be NULL. Paths ending in .bin use the binary sidecar. */
MO_API mo_status mo_dataset_load(const char* path, const char* label_column, mo_dataset** out);
MO_API mo_status mo_dataset_save(const mo_dataset* ds, const char* path);
/* Horizontal concatenation; labels come from the first dataset that has them. */
MO_API mo_status mo_dataset_fuse(const mo_dataset* const* parts, size_t n, mo_dataset** out);
/* Dense row-major copy; labels may be NULL. */
MO_API mo_status mo_dataset_from_values(const double* values, size_t rows, size_t cols, const int32_t* labels,
                                        mo_dataset** out);
MO_API size_t mo_dataset_rows(const mo_dataset* ds);
MO_API size_t mo_dataset_cols(const mo_dataset* ds);
/* 0 when the dataset has no labels. */
MO_API int mo_dataset_num_classes(const mo_dataset* ds);
/* Copies column `col` into out[rows]. */
MO_API mo_status mo_dataset_column(const mo_dataset* ds, size_t col, double* out);
/* Provenance of column `col` as "<source>:<index>". */
MO_API mo_status mo_dataset_column_name(const mo_dataset* ds, size_t col, char** out);
MO_API mo_status mo_dataset_labels(const mo_dataset* ds, int32_t* out);
MO_API void mo_dataset_free(mo_dataset* ds);

/* ---- splitting and metrics -------------------------------------------- */

MO_API mo_status mo_stratified_test_counts(const size_t* class_counts, size_t k, double test_fraction,
                                           size_t* out);

typedef struct mo_metrics {
  double accuracy;
  double precision_weighted;
  double recall_weighted;
  double f1_weighted;
  double kappa;
} mo_metrics;

/* counts is a k x k row-major matrix, rows = true class. */
MO_API mo_status mo_metrics_compute(const int64_t* counts, int k, mo_metrics* out);
MO_API mo_status mo_metrics_json(const int64_t* counts, int k, char** out);

/* ---- synthetic benchmark ---------------------------------------------- */

typedef struct mo_synth_spec {
  size_t n_samples;
  int num_classes;
  size_t n_informative;
  size_t n_noise;
  double class_sep;
  uint64_t seed;
} mo_synth_spec;

MO_API void mo_synth_spec_default(mo_synth_spec* spec);
/* ground_truth receives n_informative + n_noise bytes of 0/1; may be NULL. */
MO_API mo_status mo_synth_generate(const mo_synth_spec* spec, mo_dataset** out, uint8_t* ground_truth);
/* Writes features.csv, labels.csv, ground_truth_mask.txt (and features.bin). */
MO_API mo_status mo_synth_write(const mo_synth_spec* spec, const char* out_dir, int binary);

/* ---- SVM --------------------------------------------------------------- */

/* svm_json: {"kernel","gamma","degree","coef0","C","tol","max_iterations"};
 * NULL or "{}" takes the defaults. Returns MO_ERR_NUMERIC with a valid model
 * when a machine stopped at max_iterations. */
MO_API mo_status mo_model_train(const mo_dataset* train, const char* svm_json, int threads, mo_model** out);
MO_API mo_status mo_model_predict(const mo_model* m, const mo_dataset* ds, int32_t* out);
MO_API mo_status mo_model_evaluate(const mo_model* m, const mo_dataset* ds, int64_t* confusion, mo_metrics* out);
MO_API int mo_model_num_classes(const mo_model* m);
MO_API mo_status mo_model_to_json(const mo_model* m, char** out);
MO_API mo_status mo_model_from_json(const char* json, mo_model** out);
MO_API void mo_model_free(mo_model* m);

/* ---- experiment runner -------------------------------------------------- */

/* Resolves a config document (may be NULL) plus "key.path=value" overrides
 * into the full experiment document. */
MO_API mo_status mo_config_resolve(const char* config_json, const char* const* overrides, size_t n_overrides,
                                   char** out);
/* Both write into the configured output directory; report_json may be NULL. */
MO_API mo_status mo_run_baseline(const char* resolved_json, char** report_json);
MO_API mo_status mo_run_select(const char* resolved_json, char** report_json);
/* Comparison table over every report.json below dir. Also writes
 * comparison.csv and comparison.txt into dir. warnings may be NULL. */
MO_API mo_status mo_run_report(const char* dir, char** text, char** csv, char** warnings);
MO_API mo_status mo_fuse_files(const char* const* inputs, size_t n, const char* output, const char* label_column);

#ifdef __cplusplus
}
#endif

#endif
