#ifndef LIVSIC_H
#define LIVSIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Library errors keep their numeric codes.
 */
typedef enum LivsicStatus {
  LIVSIC_STATUS_OK = 0,
  LIVSIC_STATUS_NULL_POINTER = 1,
  LIVSIC_STATUS_INVALID_UTF8 = 2,
  LIVSIC_STATUS_PANIC = 3,
  LIVSIC_STATUS_OUT_OF_RANGE = 4,
  LIVSIC_STATUS_INVALID_SYSTEM = 10,
  LIVSIC_STATUS_INVALID_POINT = 11,
  LIVSIC_STATUS_DISTANCE_EXCEEDS_TAU = 12,
  LIVSIC_STATUS_INADMISSIBLE_SPLICE = 13,
  LIVSIC_STATUS_BUDGET_EXCEEDED = 14,
  LIVSIC_STATUS_NOT_CLOSE = 15,
  LIVSIC_STATUS_SOLVE_FAILURE = 16,
  LIVSIC_STATUS_NO_CONNECTING_WORD = 17,
  LIVSIC_STATUS_ILL_CONDITIONED = 20,
  LIVSIC_STATUS_NOT_CERTIFIABLE = 21,
  LIVSIC_STATUS_SINGULAR_Q = 22,
  LIVSIC_STATUS_NOT_STABLE_PAIR = 30,
  LIVSIC_STATUS_NOT_FIBER_BUNCHED = 31,
  LIVSIC_STATUS_NO_CONVERGENCE = 32,
  LIVSIC_STATUS_TAIL_TOO_LARGE = 33,
  LIVSIC_STATUS_NOT_HOMOCLINIC = 40,
  LIVSIC_STATUS_NOT_CAUCHY = 41,
  LIVSIC_STATUS_INSUFFICIENT_PAIRS = 42,
  LIVSIC_STATUS_DIMENSION_MISMATCH = 50,
  LIVSIC_STATUS_CONFIG_INVALID = 60,
  LIVSIC_STATUS_IO = 61,
} LivsicStatus;

/**
 * Output format for [`livsic_report_write`].
 */
typedef enum LivsicFormat {
  LIVSIC_FORMAT_JSON = 0,
  LIVSIC_FORMAT_CSV = 1,
} LivsicFormat;

/**
 * Parsed experiment configuration.
 */
typedef struct LivsicConfig LivsicConfig;

/**
 * Result of running one configuration.
 */
typedef struct LivsicReport LivsicReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *livsic_version(void);

/**
 * Message of the last failure on this thread, or null. Owned by the
 * library; valid until the next failing call on this thread.
 */
const char *livsic_last_error(void);

/**
 * Parses and validates a JSON config.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum LivsicStatus livsic_config_from_json(const char *json, struct LivsicConfig **out);

/**
 * Number of configs shipped with the library.
 */
uintptr_t livsic_builtin_config_count(void);

/**
 * Loads built-in config `index`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LivsicStatus livsic_builtin_config(uintptr_t index, struct LivsicConfig **out);

/**
 * # Safety
 * `config` must come from this library.
 */
enum LivsicStatus livsic_config_set_seed(struct LivsicConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void livsic_config_free(struct LivsicConfig *config);

/**
 * Runs the scenario described by `config`.
 *
 * # Safety
 * `config` must come from this library; `out` must be writable.
 */
enum LivsicStatus livsic_run(const struct LivsicConfig *config, struct LivsicReport **out);

/**
 * 1 if every verdict passed, 0 otherwise (including a null report).
 *
 * # Safety
 * `report` must come from this library or be null.
 */
int32_t livsic_report_passed(const struct LivsicReport *report);

/**
 * # Safety
 * `report` must come from this library or be null.
 */
uintptr_t livsic_report_verdict_count(const struct LivsicReport *report);

/**
 * The report as pretty JSON; release with [`livsic_string_free`].
 *
 * # Safety
 * `report` must come from this library; `out` must be writable.
 */
enum LivsicStatus livsic_report_to_json(const struct LivsicReport *report, char **out);

/**
 * Writes the report to `path`: a JSON file, or a directory of CSV tables.
 *
 * # Safety
 * `report` must come from this library; `path` must be a NUL-terminated
 * string.
 */
enum LivsicStatus livsic_report_write(const struct LivsicReport *report,
                                      enum LivsicFormat format,
                                      const char *path);

/**
 * # Safety
 * `report` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void livsic_report_free(struct LivsicReport *report);

/**
 * # Safety
 * `s` must come from a function of this library returning an owned string.
 * Null is ignored.
 */
void livsic_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIVSIC_H */
