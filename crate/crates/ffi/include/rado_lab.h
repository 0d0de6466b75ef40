#ifndef RADO_LAB_H
#define RADO_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum RadoStatus {
  RADO_STATUS_OK = 0,
  RADO_STATUS_NULL_POINTER = 1,
  RADO_STATUS_INVALID_UTF8 = 2,
  RADO_STATUS_PARSE = 3,
  RADO_STATUS_INVALID_ARGUMENT = 4,
  RADO_STATUS_LIMIT_EXCEEDED = 5,
  RADO_STATUS_UNDEFINED = 6,
  RADO_STATUS_BUDGET_EXCEEDED = 7,
  RADO_STATUS_PANIC = 8,
  RADO_STATUS_INTERNAL = 9,
} RadoStatus;

// Outcome of a coloring search.
typedef enum RadoVerdict {
  // Every r-coloring has a monochromatic solution.
  RADO_VERDICT_RADO = 0,
  // A coloring without monochromatic solutions exists.
  RADO_VERDICT_NOT_RADO = 1,
  // The node budget ran out.
  RADO_VERDICT_UNKNOWN = 2,
} RadoVerdict;

// Opaque ground set.
typedef struct RadoGround RadoGround;

// Opaque integer matrix.
typedef struct RadoMatrix RadoMatrix;

// Seeded Monte Carlo estimate of the probability that a p-random subset is Rado.
typedef struct RadoEstimate {
  double estimate;
  double ci_lo;
  double ci_hi;
  uint64_t successes;
  uint64_t unknowns;
  uint64_t trials;
} RadoEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or NULL. Owned by the library.
const char *rado_last_error(void);

// Library version, a static NUL-terminated string.
const char *rado_version(void);

// Parses a matrix such as "1 1 -1" or "1 -2 1; 0 1 -2".
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum RadoStatus rado_matrix_parse(const char *spec, struct RadoMatrix **out);

// Builds a matrix from `rows * cols` row-major entries.
//
// # Safety
// `entries` must point to `rows * cols` readable values; `out` must be writable.
enum RadoStatus rado_matrix_from_rows(const int64_t *entries,
                                      size_t rows,
                                      size_t cols,
                                      struct RadoMatrix **out);

// Number of columns, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t rado_matrix_cols(const struct RadoMatrix *m);

// # Safety
// `m` must be NULL or a handle from this library, not yet freed.
void rado_matrix_free(struct RadoMatrix *m);

// Parses a ground set such as "interval:9", "cyclic:36" or "power:Z4:3".
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum RadoStatus rado_ground_parse(const char *spec, struct RadoGround **out);

// # Safety
// `g` must be NULL or a handle from this library, not yet freed.
void rado_ground_free(struct RadoGround *g);

// Whether the columns condition holds over the rationals.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum RadoStatus rado_is_partition_regular(const struct RadoMatrix *m, bool *out);

// Number of solutions of `Ax = 0` with all entries in the ground set, as a
// decimal string. Free it with [`rado_string_free`].
//
// # Safety
// Handles must be live; `out` must be writable.
enum RadoStatus rado_count_solutions(const struct RadoMatrix *m,
                                     const struct RadoGround *g,
                                     char **out);

// The m-parameter over the ground set. `value` receives a float
// approximation; `exact`, if not NULL, receives the exact form (for example
// "4/3" or "log_2(6)"), to be freed with [`rado_string_free`].
//
// # Safety
// Handles must be live; `value` must be writable; `exact` may be NULL.
enum RadoStatus rado_m_parameter(const struct RadoMatrix *m,
                                 const struct RadoGround *g,
                                 double *value,
                                 char **exact);

// Decides whether every `r`-coloring of the ground set has a monochromatic
// solution with distinct entries. `certificate`, if not NULL, must hold one
// slot per ground-set element and receives a proper coloring (0-based colors,
// in element order) when the verdict is `NotRado`.
//
// # Safety
// Handles must be live; `verdict` must be writable; `certificate` is NULL or
// has at least `certificate_len` writable slots.
enum RadoStatus rado_color(const struct RadoMatrix *m,
                           const struct RadoGround *g,
                           uint32_t r,
                           uint64_t budget_nodes,
                           enum RadoVerdict *verdict,
                           uint32_t *certificate,
                           size_t certificate_len);

// Estimates the probability that a `p`-random subset of the ground set is
// `(A, r)`-Rado. Results depend only on the arguments, not on threading.
//
// # Safety
// Handles must be live; `out` must be writable.
enum RadoStatus rado_estimate(const struct RadoMatrix *m,
                              const struct RadoGround *g,
                              uint32_t r,
                              double p,
                              uint64_t trials,
                              uint64_t seed,
                              uint64_t budget_nodes,
                              struct RadoEstimate *out);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a string from this library, not yet freed.
void rado_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADO_LAB_H */
