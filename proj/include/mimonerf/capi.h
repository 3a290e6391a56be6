/* Copyright Contributors to the mimonerf Project
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the mimonerf engine. All functions return mn_status; on failure
 * mn_last_error() describes the problem (thread-local storage). The only
 * handle type is the opaque run configuration.
 */

#ifndef MIMONERF_CAPI_H
#define MIMONERF_CAPI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mn_status {
  MN_OK = 0,
  MN_ERR_USAGE = 2,   /* bad arguments, bad config, contract violations */
  MN_ERR_IO = 3,      /* missing/corrupt files, write failures */
  MN_ERR_NUMERIC = 4  /* divergence or violated numeric invariants */
} mn_status;

typedef struct mn_config mn_config;

/* Configuration handles. Keys and defaults follow the key=value config file
 * schema; unknown keys are rejected. */
mn_config* mn_config_create(void);
void mn_config_destroy(mn_config* cfg);
mn_status mn_config_load_file(mn_config* cfg, const char* path);
mn_status mn_config_set(mn_config* cfg, const char* key, const char* value);
/* Canonical key=value text. Owned by the handle; valid until the next call
 * on the same handle. */
const char* mn_config_text(mn_config* cfg);

/* Thread-local message for the most recent failure. */
const char* mn_last_error(void);
/* Comma-separated list of built-in procedural scenes. */
const char* mn_scene_list(void);
const char* mn_version(void);

/* Renders a posed-image dataset from a procedural scene into out_dir
 * (manifest.txt + PPM images). camera_mode: "orbit" or "forward";
 * background: "white", "black", "gray" or "r,g,b". */
mn_status mn_gen_data(const char* scene, int views, int resolution, uint64_t seed,
                      const char* camera_mode, const char* background, const char* out_dir,
                      int threads);

/* Trains per the config; writes out_dir/model.ckpt and out_dir/metrics.csv.
 * threads <= 0 selects machine parallelism; 1 is bit-deterministic. */
mn_status mn_train(const mn_config* cfg, const char* out_dir, int threads);

/* Renders dataset pose `pose_index` (when >= 0) or `orbit` frames on a
 * circular path (when orbit > 0) into out_dir as PPM (and PNG when
 * write_png). data_dir may be NULL: the dataset is resolved from the
 * checkpoint's config snapshot. */
mn_status mn_render(const char* checkpoint, const char* data_dir, int pose_index, int orbit,
                    const char* out_dir, int write_png, int threads);

/* Scores the checkpoint on a dataset split ("test" or "train"): prints an
 * aligned table to stdout and, when out_csv is non-NULL, writes the same
 * numbers as CSV. */
mn_status mn_eval(const char* checkpoint, const char* data_dir, const char* split,
                  const char* out_csv, int threads);

/* Renders the test split with each checkpoint (one per n_p entry) and
 * prints PSNR / run-count / wall-clock rows. Missing checkpoint files fail
 * with MN_ERR_IO listing the absentees. */
mn_status mn_bench(const char* const* checkpoints, const int* n_p, int count,
                   const char* data_dir, const char* out_csv, int threads);

#ifdef __cplusplus
}
#endif

#endif /* MIMONERF_CAPI_H */
