/*
 * Copyright (c) the abm-calib authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C API for the abm-calib engine: flood-driven housing-abandonment
 * simulation, Bayesian calibration and model comparison.
 *
 * The engine handle is opaque. Typical use:
 *
 *   abmcalib_engine* eng = NULL;
 *   if (abmcalib_engine_create("config.json", &eng) != ABMCALIB_OK) ...;
 *   abmcalib_engine_set(eng, "seed", "7");
 *   abmcalib_status st = abmcalib_engine_run(eng, "grid", NULL);
 *   if (st != ABMCALIB_OK) fprintf(stderr, "%s\n",
 *                                  abmcalib_engine_last_error(eng));
 *   abmcalib_engine_destroy(eng);
 *
 * Handles are not thread-safe; use one handle per thread.
 */

#ifndef ABMCALIB_H
#define ABMCALIB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ABMCALIB_API __declspec(dllexport)
#else
#define ABMCALIB_API __attribute__((visibility("default")))
#endif

typedef enum abmcalib_status {
  ABMCALIB_OK = 0,
  ABMCALIB_ERROR_CONFIG = 1,   /* malformed or inconsistent configuration */
  ABMCALIB_ERROR_RUNTIME = 2,  /* computation or I/O failure */
  ABMCALIB_ERROR_PARTIAL = 3,  /* run finished but some scenarios failed */
  ABMCALIB_ERROR_INVALID_ARGUMENT = 4
} abmcalib_status;

typedef struct abmcalib_engine abmcalib_engine;

ABMCALIB_API const char* abmcalib_version(void);

/* Create an engine from a JSON config file / from a JSON string. On
 * success *out_engine owns the handle until abmcalib_engine_destroy. */
ABMCALIB_API abmcalib_status
abmcalib_engine_create(const char* config_path, abmcalib_engine** out_engine);
ABMCALIB_API abmcalib_status abmcalib_engine_create_from_string(
    const char* config_json, abmcalib_engine** out_engine);

ABMCALIB_API void abmcalib_engine_destroy(abmcalib_engine* engine);

/* Override a configuration key before running; dotted paths address nested
 * keys (e.g. "sampler.production_iters"). Values are parsed as JSON when
 * possible, otherwise taken as strings. */
ABMCALIB_API abmcalib_status abmcalib_engine_set(abmcalib_engine* engine,
                                                 const char* key,
                                                 const char* value);

/* Run a pipeline stage: "generate", "calibrate", "select", "hindcast" or
 * "grid". only_filter may be NULL or a comma-separated list of
 * "<years>x<parcels>[:<mode>]" terms. Artifacts are written under the
 * configured output directory. */
ABMCALIB_API abmcalib_status abmcalib_engine_run(abmcalib_engine* engine,
                                                 const char* command,
                                                 const char* only_filter);

/* Message for the most recent failure; empty string when none. The pointer
 * stays valid until the next call on the same handle. */
ABMCALIB_API const char* abmcalib_engine_last_error(
    const abmcalib_engine* engine);

/* JSON array describing the scenarios of the most recent run (id, status,
 * headline numbers, wall-clock seconds). Empty string before any run. */
ABMCALIB_API const char* abmcalib_engine_summary_json(
    const abmcalib_engine* engine);

/* Scenario count of the most recent run; -1 before any run. */
ABMCALIB_API int abmcalib_engine_scenario_count(const abmcalib_engine* engine);

#ifdef __cplusplus
}
#endif

#endif /* ABMCALIB_H */
