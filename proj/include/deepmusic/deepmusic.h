#ifndef DEEPMUSIC_DEEPMUSIC_H
#define DEEPMUSIC_DEEPMUSIC_H

/*
 * C interface to the DeepMUSIC library. Objects are opaque handles created
 * and destroyed through this API. Every fallible call returns a dm_status;
 * on failure dm_last_error() holds a one-line message for the calling
 * thread. Strings returned by the library stay valid until the owning
 * handle is modified or destroyed.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DM_API __attribute__((visibility("default")))
#else
#define DM_API
#endif

typedef enum dm_status {
  DM_OK = 0,
  DM_ERR_INVALID_ARGUMENT = 1,
  DM_ERR_IO = 2,
  DM_ERR_FORMAT = 3,
  DM_ERR_TRUNCATED = 4,
  DM_ERR_VERSION = 5,
  DM_ERR_CONFIG = 6,
  DM_ERR_INTERNAL = 7
} dm_status;

typedef struct dm_config dm_config;
typedef struct dm_dataset dm_dataset;
typedef struct dm_model dm_model;
typedef struct dm_table dm_table;

DM_API const char* dm_version(void);
DM_API const char* dm_status_name(dm_status status);
DM_API const char* dm_last_error(void);

/* ---- configuration ---- */

DM_API dm_status dm_config_create(dm_config** out);
DM_API void dm_config_destroy(dm_config* cfg);
DM_API dm_status dm_config_load_file(dm_config* cfg, const char* path);
DM_API dm_status dm_config_set(dm_config* cfg, const char* key, const char* value);
/* "key=value" */
DM_API dm_status dm_config_set_assignment(dm_config* cfg, const char* assignment);
/* Applies DEEPMUSIC_* entries of a null-terminated environment block. */
DM_API dm_status dm_config_apply_env(dm_config* cfg, char** envp);
DM_API dm_status dm_config_get(const dm_config* cfg, const char* key, const char** value);
/* Number of recognized keys, and the name, default and help of key i. */
DM_API size_t dm_config_key_count(void);
DM_API dm_status dm_config_key_info(size_t index, const char** name, const char** default_value, const char** help);

/* ---- datasets ---- */

typedef struct dm_dataset_info {
  uint32_t num_elements;
  uint32_t num_points;
  uint32_t num_regions;
  uint32_t region_len;
  uint32_t num_sources;
  uint32_t num_samples;
  uint32_t num_snapshots;
  uint64_t seed;
} dm_dataset_info;

DM_API dm_status dm_dataset_generate(const dm_config* cfg, dm_dataset** out);
DM_API dm_status dm_dataset_load(const char* path, dm_dataset** out);
DM_API dm_status dm_dataset_save(const dm_dataset* data, const char* path);
DM_API dm_status dm_dataset_get_info(const dm_dataset* data, dm_dataset_info* info);
DM_API void dm_dataset_destroy(dm_dataset* data);

/* ---- models ---- */

typedef void (*dm_epoch_callback)(void* user, int region, uint32_t epoch, double train_loss, double val_loss,
                                  double learning_rate);

typedef struct dm_train_summary {
  uint32_t epochs;
  uint32_t best_epoch;
  double first_val_loss;
  double best_val_loss;
} dm_train_summary;

/* Splits the dataset by train.train_fraction and trains one network per
 * region. The callback may be null. */
DM_API dm_status dm_model_train(const dm_config* cfg, const dm_dataset* data, dm_epoch_callback callback,
                                void* user, dm_model** out);
DM_API dm_status dm_model_load(const char* path, dm_model** out);
DM_API dm_status dm_model_save(const dm_model* model, const char* path);
DM_API dm_status dm_model_num_regions(const dm_model* model, int* regions);
DM_API dm_status dm_model_train_summary(const dm_model* model, int region, dm_train_summary* summary);
/* Covariance as row-major M x M real and imaginary parts. angles receives
 * num_sources values in ascending order. */
DM_API dm_status dm_model_estimate(dm_model* model, const double* cov_re, const double* cov_im, int m,
                                   int num_sources, double* angles, int* degraded);
/* Full predicted spectrum (N values). */
DM_API dm_status dm_model_spectrum(dm_model* model, const double* cov_re, const double* cov_im, int m,
                                   double* spectrum, size_t length);
DM_API void dm_model_destroy(dm_model* model);

/* ---- experiments ---- */

typedef struct dm_row {
  const char* method;
  double sweep_value;
  double rmse_deg;
  double crb_deg;
  double runtime_s;
  double runtime_std_s;
  int trials;
  uint64_t seed;
} dm_row;

/* The model may be null when eval.methods does not include deepmusic. */
DM_API dm_status dm_bench_snr(const dm_config* cfg, dm_model* model, dm_table** out);
DM_API dm_status dm_bench_corr(const dm_config* cfg, dm_model* model, dm_table** out);
DM_API dm_status dm_bench_time(const dm_config* cfg, dm_model* model, dm_table** out);
/* RMSE versus SNR with deepmusic always included. */
DM_API dm_status dm_eval(const dm_config* cfg, dm_model* model, dm_table** out);
/* Spectrum plot data (CSV) for the first evaluation trial at each SNR. */
DM_API dm_status dm_emit_spectra(const dm_config* cfg, dm_model* model, const char* path);

DM_API size_t dm_table_rows(const dm_table* table);
DM_API dm_status dm_table_row(const dm_table* table, size_t index, dm_row* row);
DM_API dm_status dm_table_csv(dm_table* table, int with_timing, const char** csv);
DM_API dm_status dm_table_write(const dm_table* table, int with_timing, const char* path);
DM_API void dm_table_destroy(dm_table* table);

#ifdef __cplusplus
}
#endif

#endif
