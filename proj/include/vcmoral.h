/* Copyright (C) 2026 The vcmoral Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the vcmoral shared library: a pipeline that judges the commonsense
 * immorality of images and prompts with a zero-shot joint-embedding
 * classifier, localizes the words and pixels responsible through randomized
 * masking, and manipulates immoral images into moral alternatives.
 *
 * Usage: create a pipeline from a config JSON document (NULL for defaults),
 * optionally apply key overrides, then run commands. Commands write their
 * artifacts (PNGs, head files, logs, report files) under the configured
 * output directory and hand back the report document as a heap-allocated
 * JSON string that the caller releases with vcm_string_free().
 *
 * Every function returns VCM_STATUS_OK on success; on failure,
 * vcm_pipeline_last_error() yields a message (pass NULL for the pipeline to
 * read errors from a failed vcm_pipeline_create call). A pipeline handle is
 * not thread-safe; distinct handles are independent.
 */

#ifndef VCMORAL_H
#define VCMORAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vcm_status {
  VCM_STATUS_OK = 0,
  /* Bad argument or broken input contract (usage error). */
  VCM_STATUS_INVALID_ARGUMENT = 1,
  /* Missing, unreadable, or malformed file. */
  VCM_STATUS_IO_ERROR = 2,
  /* A model backend failed or is unreachable. */
  VCM_STATUS_BACKEND_ERROR = 3,
  VCM_STATUS_INTERNAL_ERROR = 4
} vcm_status;

typedef struct vcm_pipeline vcm_pipeline;

/* Library version string, e.g. "0.1.0". */
const char* vcm_version(void);

/* Creates a pipeline from a config JSON document; NULL or "" selects the
 * built-in defaults (stub backends, seed 0). */
vcm_status vcm_pipeline_create(const char* config_json, vcm_pipeline** out_pipeline);

void vcm_pipeline_destroy(vcm_pipeline* pipeline);

/* Sets one config value by dotted path (e.g. "seed", "out_dir",
 * "training.epochs", "judge_threshold"); the synthetic key "backend_kind"
 * switches every backend role at once. The value string is interpreted as a
 * JSON scalar when it parses as one, else as a plain string. */
vcm_status vcm_pipeline_override(vcm_pipeline* pipeline, const char* key, const char* value);

/* Message for the most recent failure on this handle; never NULL. Passing
 * NULL returns the thread's most recent vcm_pipeline_create failure. */
const char* vcm_pipeline_last_error(const vcm_pipeline* pipeline);

/* Trains the classifier head on a labeled sentence CSV (columns "label" with
 * 0=moral/1=immoral and "input"). Writes the head file and a per-epoch loss
 * log under the output directory. */
vcm_status vcm_train(vcm_pipeline* pipeline, const char* train_csv_path, char** out_report_json);

/* Scores exactly one of a prompt or an image PNG and renders a
 * moral/immoral verdict. The unused argument must be NULL. */
vcm_status vcm_judge(vcm_pipeline* pipeline, const char* prompt_or_null,
                     const char* image_path_or_null, char** out_report_json);

/* Word-importance attribution for the prompt and/or a pixel saliency heatmap
 * for the image (prompt-only calls explain the image generated from the
 * prompt). At least one of prompt/image is required. */
vcm_status vcm_explain(vcm_pipeline* pipeline, const char* prompt_or_null,
                       const char* image_path_or_null, char** out_report_json);

/* Runs one manipulation strategy ("blur", "inpaint", "word_swap",
 * "caption_rewrite") or "auto" for all four, writing each output image.
 * word_swap requires a prompt. Returns VCM_STATUS_OK even when every
 * strategy leaves the image immoral; the report carries the flag. */
vcm_status vcm_manipulate(vcm_pipeline* pipeline, const char* prompt_or_null,
                          const char* image_path_or_null, const char* strategy,
                          char** out_report_json);

/* Evaluates the datasets listed in an eval-spec JSON file:
 *   {"image_sets": [{"name": ..., "manifest": "images.csv"}],
 *    "likert_csvs": ["study.csv"]}
 * Manifest rows are "label,path"; Likert rows are
 * "evaluator_id,image_id,condition,rating". Per-dataset failures are
 * reported in the document while the remaining datasets still run.
 * out_table_text (optional, may be NULL) receives an aligned plain-text
 * rendering. */
vcm_status vcm_eval(vcm_pipeline* pipeline, const char* eval_spec_path, char** out_report_json,
                    char** out_table_text);

/* Releases a string returned through any out parameter. */
void vcm_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* VCMORAL_H */
