/* C interface to the adabag library. All handles are opaque; every call that
 * can fail returns an adabag_status and leaves a message for
 * adabag_last_error() on the calling thread. */
#ifndef ADABAG_H
#define ADABAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ADABAG_API __declspec(dllexport)
#else
#define ADABAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum adabag_status {
    ADABAG_OK = 0,
    ADABAG_ERR_CONFIG = 1,
    ADABAG_ERR_DATA = 2,
    ADABAG_ERR_NUMERIC = 3,
    ADABAG_ERR_IO = 4,
    ADABAG_ERR_INVALID_ARGUMENT = 5,
    ADABAG_ERR_INTERNAL = 6
} adabag_status;

typedef struct adabag_dataset adabag_dataset;
typedef struct adabag_config adabag_config;
typedef struct adabag_result adabag_result;
typedef struct adabag_pca_result adabag_pca_result;

ADABAG_API const char* adabag_version(void);
/* Message of the last failed call on this thread ("" if none). */
ADABAG_API const char* adabag_last_error(void);
ADABAG_API const char* adabag_status_name(adabag_status status);
/* 0 trace, 1 debug, 2 info, 3 warn, 4 error, 5 critical, 6 off. Logs go to stderr. */
ADABAG_API void adabag_set_log_level(int level);
/* Frees strings returned through char** out-parameters. */
ADABAG_API void adabag_string_free(char* s);

/* ---- datasets ---- */

typedef struct adabag_dataset_info {
    size_t n_rows;
    size_t n_features;
    size_t n_groups;
    size_t nnz;
    double lower;
    double upper;
    int has_split;
    size_t n_core;
    size_t n_validation;
    size_t n_test;
} adabag_dataset_info;

/* thresholds: NULL to read them from dataset.json, else {lower, upper}. */
ADABAG_API adabag_status adabag_dataset_load(const char* dir, const double* thresholds, adabag_dataset** out);
ADABAG_API adabag_status adabag_dataset_save(const adabag_dataset* ds, const char* dir);
ADABAG_API void adabag_dataset_free(adabag_dataset* ds);
ADABAG_API adabag_status adabag_dataset_get_info(const adabag_dataset* ds, adabag_dataset_info* out);
/* The returned pointer lives as long as the dataset. */
ADABAG_API adabag_status adabag_dataset_group_name(const adabag_dataset* ds, size_t group, const char** out);
/* Replaces any stored split with a stratified 2:1:1 split. */
ADABAG_API adabag_status adabag_dataset_split(adabag_dataset* ds, uint64_t seed);

/* variant: "structured" or "equal". The result carries its own split. */
ADABAG_API adabag_status adabag_simulate(uint64_t seed, const char* variant, adabag_dataset** out);

typedef struct adabag_ingest_options {
    size_t min_reviews;        /* 0 means the default (5) */
    const char* genres;        /* comma-separated priority list, NULL for drama,comedy,horror */
    const char* polarity_file; /* NULL for none */
    size_t jobs;               /* 0 means 1 */
} adabag_ingest_options;

ADABAG_API adabag_status adabag_ingest_raw(const char* dir, const adabag_ingest_options* options, adabag_dataset** out);
ADABAG_API adabag_status adabag_ingest_prebuilt(const char* dir,
                                                const adabag_ingest_options* options,
                                                adabag_dataset** out);

/* ---- configuration ---- */

ADABAG_API adabag_status adabag_config_create(adabag_config** out);
/* Every problem in the document is reported in one message. */
ADABAG_API adabag_status adabag_config_from_json(const char* json, adabag_config** out);
ADABAG_API adabag_status adabag_config_to_json(const adabag_config* config, char** out);
ADABAG_API void adabag_config_free(adabag_config* config);
/* ws1..ws6 or custom */
ADABAG_API adabag_status adabag_config_set_scheme(adabag_config* config, const char* scheme);
ADABAG_API adabag_status adabag_config_set_custom_weights(adabag_config* config, const double* weights, size_t n);
ADABAG_API adabag_status adabag_config_set_replicates(adabag_config* config, size_t replicates);
ADABAG_API adabag_status adabag_config_set_grid(adabag_config* config, size_t size, double eps);
ADABAG_API adabag_status adabag_config_set_tolerance(adabag_config* config, double relative_tol, size_t max_iter);
ADABAG_API adabag_status adabag_config_set_standardize(adabag_config* config, int standardize);
ADABAG_API adabag_status adabag_config_set_seed(adabag_config* config, uint64_t seed);
ADABAG_API adabag_status adabag_config_set_jobs(adabag_config* config, size_t jobs);

/* ---- pipeline ---- */

typedef struct adabag_summary {
    size_t c_star;
    size_t model_size;
    double test_me;
    double validation_me;
    size_t replicates;
    size_t retried;
    size_t flagged;
    double base_lambda;
    double base_validation_me;
} adabag_summary;

typedef struct adabag_group_summary {
    size_t core_rows;
    double sharing_weight;
    size_t test_rows;
    double test_me;
} adabag_group_summary;

typedef struct adabag_cutoff_row {
    size_t cutoff;
    size_t size;
    double validation_me;
    double validation_me_smoothed;
    double test_me;
} adabag_cutoff_row;

/* Uses the dataset's stored split, or a stratified split from the config seed. */
ADABAG_API adabag_status adabag_run(const adabag_dataset* ds, const adabag_config* config, adabag_result** out);
ADABAG_API void adabag_result_free(adabag_result* result);
/* Writes bfd.tsv, lambda_sweep.tsv, cutoff_sweep.tsv, report.json, wordcloud.tsv, predictions.tsv. */
ADABAG_API adabag_status adabag_result_write(const adabag_result* result, const char* dir);
ADABAG_API adabag_status adabag_result_summary(const adabag_result* result, adabag_summary* out);
ADABAG_API adabag_status adabag_result_group(const adabag_result* result, size_t group, adabag_group_summary* out);
/* Copies min(n, n_features) frequencies. */
ADABAG_API adabag_status adabag_result_bfd(const adabag_result* result, uint32_t* out, size_t n);
/* Support of the selected model; *len receives its size even when cap is too small. */
ADABAG_API adabag_status adabag_result_support(const adabag_result* result, uint32_t* out, size_t cap, size_t* len);
/* cutoff in 1..B */
ADABAG_API adabag_status adabag_result_cutoff(const adabag_result* result, size_t cutoff, adabag_cutoff_row* out);
ADABAG_API adabag_status adabag_result_report_json(const adabag_result* result, char** out);

/* Solver diagnostics for the core-set lambda path, as TSV. */
ADABAG_API adabag_status adabag_dump_path(const adabag_dataset* ds, const adabag_config* config, const char* file);

/* ---- PCA + LDA baseline ---- */

typedef enum adabag_pc_ordering {
    ADABAG_PC_VARIANCE = 0,
    ADABAG_PC_ENTROPY = 1
} adabag_pc_ordering;

typedef struct adabag_pca_outcome {
    size_t t;
    double explained;
    double test_me;
    size_t test_rows;
} adabag_pca_outcome;

/* Trains on core+validation, tests on the test rows; pooled and, with more
 * than one group, per group. */
ADABAG_API adabag_status adabag_pca_lda(const adabag_dataset* ds,
                                        double target_variance,
                                        uint64_t seed,
                                        adabag_pca_result** out);
ADABAG_API void adabag_pca_result_free(adabag_pca_result* result);
ADABAG_API adabag_status adabag_pca_result_get(const adabag_pca_result* result,
                                               adabag_pc_ordering ordering,
                                               adabag_pca_outcome* out);
ADABAG_API adabag_status adabag_pca_result_json(const adabag_pca_result* result, char** out);
ADABAG_API adabag_status adabag_pca_result_write(const adabag_pca_result* result, const char* file);

#ifdef __cplusplus
}
#endif

#endif
