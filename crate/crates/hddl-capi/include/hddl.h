/* C interface of the hddl toolchain. */

#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HDDL_STATUS_OK 0

#define HDDL_STATUS_REJECTED 1

#define HDDL_STATUS_INVALID_ARGUMENT 2

#define HDDL_STATUS_INPUT_ERROR 3

#define HDDL_STATUS_INTERNAL 4

// Opaque handle over one analyzed and grounded domain/problem pair.
typedef struct HddlInstance HddlInstance;

// Options for [`hddl_instance_new`]. Passing null selects the defaults
// (lenient requirements, compiled method preconditions, pruning on).
typedef struct HddlOptions {
  bool strict_requirements;
  bool compile_method_preconditions;
  bool prune;
} HddlOptions;

// Search limits for [`hddl_plan`]. Zero or negative fields select the
// defaults (1e6 nodes, 60 seconds, unbounded deepening); `exhaustive`
// removes the node and time budgets entirely.
typedef struct HddlLimits {
  uint64_t max_nodes;
  double max_seconds;
  int64_t max_decompositions;
  int64_t max_plan_length;
  bool exhaustive;
} HddlLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *hddl_version(void);

// Parse and semantically check a domain/problem pair. Diagnostics (JSON
// lines) are written to `out_diagnostics` when non-null.
//
// # Safety
// `domain_text` and `problem_text` must be valid NUL-terminated strings;
// `out_diagnostics`, when non-null, must point to writable storage.
int32_t hddl_validate(const char *domain_text,
                      const char *problem_text,
                      bool strict_requirements,
                      char **out_diagnostics);

// Build an instance handle for planning and verification. On success the
// handle is written to `out_instance` and must be released with
// [`hddl_instance_free`].
//
// # Safety
// Text pointers as in [`hddl_validate`]; `options` may be null;
// `out_instance` must be a valid pointer.
int32_t hddl_instance_new(const char *domain_text,
                          const char *problem_text,
                          const struct HddlOptions *options,
                          struct HddlInstance **out_instance,
                          char **out_diagnostics);

// Release an instance handle. Null is ignored.
//
// # Safety
// `instance` must come from [`hddl_instance_new`] and not be freed twice.
void hddl_instance_free(struct HddlInstance *instance);

// Write the ground model listing of an instance.
//
// # Safety
// `instance` must be a live handle; `out_listing` must be valid.
int32_t hddl_instance_ground_listing(const struct HddlInstance *instance, char **out_listing);

// Run the planner. On status 0 the witness text is written to
// `out_witness`; search statistics (key=value lines) go to `out_stats`
// when non-null.
//
// # Safety
// `instance` must be a live handle; `limits` may be null; out pointers,
// when non-null, must be valid.
int32_t hddl_plan(const struct HddlInstance *instance,
                  const struct HddlLimits *limits,
                  char **out_witness,
                  char **out_stats);

// Check a witness against the instance. Status 0 means accepted, 1
// rejected (verdict text in `out_verdict`), 3 malformed witness.
//
// # Safety
// `instance` must be a live handle; `witness_text` a valid string.
int32_t hddl_verify(const struct HddlInstance *instance,
                    const char *witness_text,
                    char **out_verdict);

// Reformat a domain or problem file into canonical form.
//
// # Safety
// `text` must be a valid string; out pointers as usual.
int32_t hddl_format(const char *text, char **out_formatted, char **out_diagnostic);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void hddl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
