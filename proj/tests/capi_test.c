//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

// Exercises the C interface end to end from plain C.

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rigidflow/rigidflow.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

#define OK(call)                                                              \
  do {                                                                        \
    rf_status s_ = (call);                                                    \
    if (s_ != RF_OK) {                                                        \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,      \
              rf_status_name(s_), rf_last_error_message());                   \
      ++failures;                                                             \
      return;                                                                 \
    }                                                                         \
  } while (0)

static const char *tmp_path(const char *name) {
  static char buf[8][512];
  static int slot = 0;
  char *p = buf[slot++ % 8];
  snprintf(p, 512, "%s/%s", RIGIDFLOW_TEST_TMP_DIR, name);
  return p;
}

static void test_errors(void) {
  rf_dataset *ds = NULL;
  EXPECT(rf_dataset_read_sdf(NULL, NULL, &ds) == RF_INVALID_ARGUMENT);
  EXPECT(strlen(rf_last_error_message()) > 0);
  EXPECT(rf_dataset_read_sdf("/nonexistent/file.sdf", NULL, &ds) == RF_IO_ERROR);
  EXPECT(ds == NULL);
  EXPECT(strcmp(rf_status_name(RF_OK), "ok") == 0);
  EXPECT(strlen(rf_status_name(RF_MASKED_TOKEN)) > 0);
  EXPECT(strlen(rf_version()) > 0);
  rf_vocab *v = NULL;
  EXPECT(rf_vocab_load("/nonexistent/v.json", &v) == RF_IO_ERROR);
  // Freeing NULL is a no-op.
  rf_dataset_free(NULL);
  rf_vocab_free(NULL);
  rf_string_free(NULL);
}

static void test_pipeline(void) {
  rf_dataset *ds = NULL, *again = NULL, *s1 = NULL, *s3 = NULL, *sm = NULL;
  rf_fragments *fr = NULL, *fr2 = NULL;
  rf_vocab_build *vb = NULL;
  rf_vocab *v = NULL, *v2 = NULL;
  rf_frames *fs = NULL, *fs2 = NULL;
  rf_tables *tables = NULL;
  rf_model *model = NULL;
  char *text = NULL, *digest = NULL, *d1 = NULL, *d3 = NULL, *csv = NULL, *log = NULL;
  int n = 0;

  OK(rf_dataset_read_sdf(RIGIDFLOW_TEST_DATA_DIR "/corpus50.sdf",
                         RIGIDFLOW_DATA_DIR "/elements.txt", &ds));
  OK(rf_dataset_size(ds, &n));
  EXPECT(n == 50);
  OK(rf_dataset_digest(ds, &digest));
  EXPECT(strlen(digest) == 64);

  rf_frag_config cfg;
  rf_frag_config_init(&cfg);
  EXPECT(cfg.strategy == RF_PLANAR_RINGS);
  OK(rf_fragment(ds, &cfg, &fr));
  OK(rf_fragments_save(fr, tmp_path("capi_fragments.json")));
  OK(rf_fragments_load(tmp_path("capi_fragments.json"), ds, &fr2));
  OK(rf_fragments_report(fr2, &text));
  EXPECT(strstr(text, "molecules: 50") != NULL);
  rf_string_free(text);

  OK(rf_build_vocabulary(fr2, 0.25, &vb));
  OK(rf_vocab_build_report(vb, &text));
  EXPECT(strstr(text, "vocabulary_size:") != NULL);
  rf_string_free(text);
  OK(rf_vocab_build_vocab(vb, &v));
  OK(rf_vocab_build_frames(vb, &fs));
  OK(rf_vocab_save(v, tmp_path("capi_vocab.json")));
  OK(rf_vocab_load(tmp_path("capi_vocab.json"), &v2));
  int nv = 0, nv2 = 0, ms = 0;
  OK(rf_vocab_size(v, &nv));
  OK(rf_vocab_size(v2, &nv2));
  OK(rf_vocab_max_sym(v2, &ms));
  EXPECT(nv > 0 && nv == nv2);
  EXPECT(ms >= 1 && ms <= 12);
  OK(rf_frames_save(fs, tmp_path("capi_frames.json")));
  OK(rf_frames_load(tmp_path("capi_frames.json"), &fs2));
  OK(rf_frames_size(fs2, &n));
  EXPECT(n == 49);

  OK(rf_tables_load(RIGIDFLOW_DATA_DIR "/bond_table.json",
                    RIGIDFLOW_DATA_DIR "/valency_table.json", &tables));

  // Oracle sampling is independent of the thread count.
  rf_sample_config sc;
  rf_sample_config_init(&sc);
  sc.count = 6;
  sc.steps = 20;
  sc.seed = 42;
  sc.threads = 1;
  OK(rf_sample(v2, fs2, NULL, tables, &sc, &s1, &log));
  EXPECT(strstr(log, "\"seed\"") != NULL);
  rf_string_free(log);
  sc.threads = 3;
  OK(rf_sample(v2, fs2, NULL, tables, &sc, &s3, NULL));
  OK(rf_dataset_write_sdf(s1, tmp_path("capi_s1.sdf")));
  OK(rf_dataset_write_sdf(s3, tmp_path("capi_s3.sdf")));
  OK(rf_sha256_file(tmp_path("capi_s1.sdf"), &d1));
  OK(rf_sha256_file(tmp_path("capi_s3.sdf"), &d3));
  EXPECT(strcmp(d1, d3) == 0);
  OK(rf_dataset_read_sdf(tmp_path("capi_s1.sdf"), NULL, &again));
  OK(rf_dataset_size(again, &n));
  EXPECT(n == 6);

  OK(rf_evaluate(ds, ds, tables, v2, &cfg, &csv));
  EXPECT(strstr(csv, "tv_atoms,0\n") != NULL);
  rf_string_free(csv);
  OK(rf_evaluate(again, ds, tables, NULL, NULL, &csv));
  EXPECT(strstr(csv, "molecules,6\n") != NULL);
  rf_string_free(csv);

  rf_frag_config sweep[2];
  rf_frag_config_init(&sweep[0]);
  rf_frag_config_init(&sweep[1]);
  sweep[0].strategy = RF_NO_RINGS;
  OK(rf_stats(ds, sweep, 2, &csv));
  EXPECT(strstr(csv, "\nno_rings,") != NULL);
  EXPECT(strstr(csv, "\nplanar_rings 0.1%,") != NULL);
  rf_string_free(csv);

  // A tiny trained model runs through the same sampler.
  rf_train_config tc;
  rf_train_config_init(&tc);
  tc.epochs = 2;
  tc.width1 = 8;
  tc.width2 = 8;
  OK(rf_train(fs2, v2, &tc, 7, &model, &csv));
  EXPECT(strncmp(csv, "epoch,loss\n1,", 13) == 0);
  rf_string_free(csv);
  OK(rf_model_save(model, tmp_path("capi_model.json")));
  rf_model_free(model);
  model = NULL;
  OK(rf_model_load(tmp_path("capi_model.json"), &model));
  sc.count = 2;
  OK(rf_sample(v2, fs2, model, tables, &sc, &sm, NULL));

  // Mismatched store and dataset.
  rf_fragments *bad = NULL;
  EXPECT(rf_fragments_load(tmp_path("capi_fragments.json"), sm, &bad) == RF_FORMAT_ERROR);

  rf_string_free(digest);
  rf_string_free(d1);
  rf_string_free(d3);
  rf_dataset_free(ds);
  rf_dataset_free(again);
  rf_dataset_free(s1);
  rf_dataset_free(s3);
  rf_dataset_free(sm);
  rf_fragments_free(fr);
  rf_fragments_free(fr2);
  rf_vocab_build_free(vb);
  rf_vocab_free(v);
  rf_vocab_free(v2);
  rf_frames_free(fs);
  rf_frames_free(fs2);
  rf_tables_free(tables);
  rf_model_free(model);
}

int main(void) {
  test_errors();
  test_pipeline();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi_test: all checks passed\n");
  return 0;
}
