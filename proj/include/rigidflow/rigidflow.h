//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

/*
 * C interface to the RigidFlow library.
 *
 * Objects are opaque handles created by rf_* functions and released with the
 * matching rf_*_free. Every fallible call returns an rf_status; on failure
 * rf_last_error_message() describes the error for the calling thread until
 * its next failing call. Strings returned through char ** are owned by the
 * caller and released with rf_string_free. Handles are not synchronised:
 * share one between threads only for concurrent reads.
 */

#ifndef RIGIDFLOW_H_
#define RIGIDFLOW_H_

#include <stdint.h>

#if defined(_WIN32)
#  if defined(RIGIDFLOW_BUILDING)
#    define RF_API __declspec(dllexport)
#  else
#    define RF_API __declspec(dllimport)
#  endif
#else
#  define RF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_INVALID_ARGUMENT = 1,
  RF_PARSE_ERROR = 2,
  RF_ANGLE_NEAR_PI = 3,
  RF_DISCONNECTED = 4,
  RF_DEGENERATE = 5,
  RF_NOT_A_GROUP = 6,
  RF_NO_VALID_AUTOMORPHISM = 7,
  RF_FRAME_UNLOCKABLE = 8,
  RF_PRUNING_DIVERGED = 9,
  RF_SHAPE_MISMATCH = 10,
  RF_ZERO_SUPPORT = 11,
  RF_MASKED_TOKEN = 12,
  RF_MISSING_TABLE_ENTRY = 13,
  RF_IO_ERROR = 14,
  RF_FORMAT_ERROR = 15,
  RF_OUT_OF_MEMORY = 98,
  RF_INTERNAL = 99
} rf_status;

typedef struct rf_dataset rf_dataset;
typedef struct rf_fragments rf_fragments;
typedef struct rf_vocab_build rf_vocab_build;
typedef struct rf_vocab rf_vocab;
typedef struct rf_frames rf_frames;
typedef struct rf_model rf_model;
typedef struct rf_tables rf_tables;

RF_API const char *rf_version(void);
RF_API const char *rf_status_name(rf_status status);
RF_API const char *rf_last_error_message(void);
RF_API void rf_string_free(char *s);

RF_API rf_status rf_sha256_file(const char *path, char **hex_out);

/* Molecule sets ----------------------------------------------------------- */

/* `elements_path` may be NULL for the full periodic table. */
RF_API rf_status rf_dataset_read_sdf(const char *path, const char *elements_path,
                                     rf_dataset **out);
RF_API rf_status rf_dataset_size(const rf_dataset *ds, int *out);
/* SHA-256 of the SDF text the set was read from (or written as). */
RF_API rf_status rf_dataset_digest(const rf_dataset *ds, char **hex_out);
RF_API rf_status rf_dataset_write_sdf(const rf_dataset *ds, const char *path);
RF_API void rf_dataset_free(rf_dataset *ds);

/* Fragmentation ----------------------------------------------------------- */

typedef enum rf_strategy { RF_NO_RINGS = 0, RF_PLANAR_RINGS = 1 } rf_strategy;

typedef struct rf_frag_config {
  double alpha; /* percent of the dataset size */
  rf_strategy strategy;
  double planarity_tol;
  double dummy_bond_len;
  int max_ring_size;
  int count_by_molecule;
} rf_frag_config;

RF_API void rf_frag_config_init(rf_frag_config *cfg);

RF_API rf_status rf_fragment(const rf_dataset *ds, const rf_frag_config *cfg,
                             rf_fragments **out);
/* Reload a store written by rf_fragments_save; `ds` must be the same input. */
RF_API rf_status rf_fragments_load(const char *path, const rf_dataset *ds,
                                   rf_fragments **out);
RF_API rf_status rf_fragments_save(const rf_fragments *fr, const char *path);
RF_API rf_status rf_fragments_config(const rf_fragments *fr, rf_frag_config *out);
RF_API rf_status rf_fragments_report(const rf_fragments *fr, char **text_out);
RF_API void rf_fragments_free(rf_fragments *fr);

/* Vocabulary -------------------------------------------------------------- */

RF_API rf_status rf_build_vocabulary(const rf_fragments *fr, double rmsd_tol,
                                     rf_vocab_build **out);
RF_API rf_status rf_vocab_build_report(const rf_vocab_build *b, char **text_out);
RF_API rf_status rf_vocab_build_vocab(const rf_vocab_build *b, rf_vocab **out);
RF_API rf_status rf_vocab_build_frames(const rf_vocab_build *b, rf_frames **out);
RF_API void rf_vocab_build_free(rf_vocab_build *b);

RF_API rf_status rf_vocab_load(const char *path, rf_vocab **out);
RF_API rf_status rf_vocab_save(const rf_vocab *v, const char *path);
RF_API rf_status rf_vocab_size(const rf_vocab *v, int *out);
/* Largest symmetry group of any class. */
RF_API rf_status rf_vocab_max_sym(const rf_vocab *v, int *out);
RF_API void rf_vocab_free(rf_vocab *v);

RF_API rf_status rf_frames_load(const char *path, rf_frames **out);
RF_API rf_status rf_frames_save(const rf_frames *f, const char *path);
RF_API rf_status rf_frames_size(const rf_frames *f, int *out);
RF_API void rf_frames_free(rf_frames *f);

/* Toy denoiser ------------------------------------------------------------ */

typedef struct rf_train_config {
  int epochs;
  int batch;
  double lr;
  int adam;
  int augment;
  int time_weighting;
  int self_conditioning;
  double self_cond_prob;
  int width1;
  int width2;
  int uniform_prior;
} rf_train_config;

RF_API void rf_train_config_init(rf_train_config *cfg);

/* `loss_csv_out` (may be NULL) receives "epoch,loss" lines. */
RF_API rf_status rf_train(const rf_frames *data, const rf_vocab *v,
                          const rf_train_config *cfg, uint64_t seed, rf_model **out,
                          char **loss_csv_out);
RF_API rf_status rf_model_load(const char *path, rf_model **out);
RF_API rf_status rf_model_save(const rf_model *m, const char *path);
RF_API void rf_model_free(rf_model *m);

/* Sampling ---------------------------------------------------------------- */

typedef struct rf_sample_config {
  int count;
  int steps;
  double temp_lo;
  double temp_hi;
  double eta;
  int uniform_prior;
  int exp_schedule;
  double schedule_c;
  uint64_t seed;
  int threads;
  /* Oracle only: translation kernel width in Angstrom. */
  double bandwidth;
} rf_sample_config;

RF_API void rf_sample_config_init(rf_sample_config *cfg);

RF_API rf_status rf_tables_load(const char *bond_table_path, const char *valency_path,
                                rf_tables **out);
RF_API void rf_tables_free(rf_tables *t);

/*
 * Generate molecules. `model` NULL selects the exact oracle over `training`.
 * The motif count of each molecule is drawn from the training histogram.
 * `log_out` (may be NULL) receives one JSON line per molecule.
 */
RF_API rf_status rf_sample(const rf_vocab *v, const rf_frames *training,
                           const rf_model *model, const rf_tables *tables,
                           const rf_sample_config *cfg, rf_dataset **out, char **log_out);

/* Evaluation -------------------------------------------------------------- */

/*
 * Metrics CSV of `sampled` against `reference`. `v` may be NULL, which skips
 * the motif statistics; `frag` (may be NULL for defaults) gives the
 * fragmentation rules and alpha for the common/uncommon split.
 */
RF_API rf_status rf_evaluate(const rf_dataset *sampled, const rf_dataset *reference,
                             const rf_tables *tables, const rf_vocab *v,
                             const rf_frag_config *frag, char **csv_out);

/* Fragmentation statistics for each configuration, as CSV. */
RF_API rf_status rf_stats(const rf_dataset *ds, const rf_frag_config *cfgs, int count,
                          char **csv_out);

#ifdef __cplusplus
}
#endif

#endif /* RIGIDFLOW_H_ */
