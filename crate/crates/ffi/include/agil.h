#ifndef AGIL_H
#define AGIL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AgilStatus {
  AGIL_STATUS_OK = 0,
  AGIL_STATUS_NULL_POINTER = 1,
  AGIL_STATUS_INVALID_UTF8 = 2,
  AGIL_STATUS_MALFORMED_JSON = 3,
  AGIL_STATUS_VALIDATION = 4,
  AGIL_STATUS_CONFLICT = 5,
  AGIL_STATUS_NOT_FOUND = 6,
  AGIL_STATUS_PRECONDITION = 7,
  AGIL_STATUS_IO = 8,
  AGIL_STATUS_PANIC = 9,
} AgilStatus;

typedef enum AgilScenario {
  AGIL_SCENARIO_STRICT = 0,
  AGIL_SCENARIO_BASELINE = 1,
  AGIL_SCENARIO_GENEROUS = 2,
} AgilScenario;

/**
 * Opaque audit document.
 */
typedef struct AgilAudit AgilAudit;

/**
 * Present counts per sub-function type and per pillar, indexed A, G, I, L.
 */
typedef struct AgilCoverage {
  uint32_t by_type[4];
  uint32_t by_pillar[4];
  uint32_t present;
  uint32_t total;
} AgilCoverage;

/**
 * Reliability figures as doubles. `kappa` is NaN when `kappa_defined` is false.
 */
typedef struct AgilKappa {
  uint32_t n;
  double p_o;
  double p_e;
  bool kappa_defined;
  double kappa;
  double pabak;
} AgilKappa;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Owned by the
 * library and valid until the next call on the same thread.
 */
const char *agil_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void agil_string_free(char *s);

/**
 * Parses and validates an audit document. On success `*out` owns a new
 * handle to be released with `agil_audit_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AgilStatus agil_audit_from_json(const char *json, struct AgilAudit **out);

/**
 * # Safety
 * `audit` must be NULL or a handle from `agil_audit_from_json` not yet freed.
 */
void agil_audit_free(struct AgilAudit *audit);

/**
 * # Safety
 * `audit` must be a live handle; `out` must be writable.
 */
enum AgilStatus agil_audit_revision(const struct AgilAudit *audit, uint64_t *out);

/**
 * Canonical JSON report bundle. `generated_at` may be NULL.
 *
 * # Safety
 * `audit` must be a live handle; `out` must be writable.
 */
enum AgilStatus agil_audit_report_json(const struct AgilAudit *audit,
                                       enum AgilScenario scenario,
                                       const char *generated_at,
                                       char **out);

/**
 * Markdown report. `generated_at` may be NULL.
 *
 * # Safety
 * `audit` must be a live handle; `out` must be writable.
 */
enum AgilStatus agil_audit_report_markdown(const struct AgilAudit *audit,
                                           enum AgilScenario scenario,
                                           const char *generated_at,
                                           char **out);

/**
 * Coverage counts of the consensus sheet under `scenario`.
 *
 * # Safety
 * `audit` must be a live handle; `out` must be writable.
 */
enum AgilStatus agil_audit_coverage(const struct AgilAudit *audit,
                                    enum AgilScenario scenario,
                                    struct AgilCoverage *out);

/**
 * Overall reliability between the document's two rater sheets.
 *
 * # Safety
 * `audit` must be a live handle; `out` must be writable.
 */
enum AgilStatus agil_audit_kappa(const struct AgilAudit *audit, struct AgilKappa *out);

/**
 * Reliability from raw 2x2 counts.
 *
 * # Safety
 * `out` must be writable.
 */
enum AgilStatus agil_kappa_from_counts(uint32_t both_present,
                                       uint32_t a_only,
                                       uint32_t b_only,
                                       uint32_t both_absent,
                                       struct AgilKappa *out);

/**
 * The embedded taxonomy as canonical JSON.
 *
 * # Safety
 * `out` must be writable.
 */
enum AgilStatus agil_taxonomy_json(char **out);

/**
 * A shipped reference dataset as canonical JSON.
 *
 * # Safety
 * `dataset_id` must be a NUL-terminated string; `out` must be writable.
 */
enum AgilStatus agil_reference_json(const char *dataset_id, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGIL_H */
