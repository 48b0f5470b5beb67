#ifndef QTAZRP_H
#define QTAZRP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum QtzConventions {
  // Reading that reproduces the particle dynamics.
  QTZ_CONVENTIONS_VERIFIED = 0,
  // Literal reading, matched by the asymptotic expansions.
  QTZ_CONVENTIONS_PRINTED = 1,
} QtzConventions;

typedef enum QtzStatus {
  QTZ_STATUS_OK = 0,
  QTZ_STATUS_NULL_POINTER = 1,
  QTZ_STATUS_DOMAIN = 2,
  QTZ_STATUS_PRECONDITION = 3,
  QTZ_STATUS_INVALID_CONTOUR = 4,
  QTZ_STATUS_POLE_PROXIMITY = 5,
  QTZ_STATUS_NON_CONVERGENCE = 6,
  QTZ_STATUS_DEGENERATE_FIT = 7,
  QTZ_STATUS_PANIC = 8,
} QtzStatus;

// Opaque evaluation options.
typedef struct QtzOptions QtzOptions;

// Opaque lattice instance.
typedef struct QtzParams QtzParams;

// The six-term formula and its intermediates.
typedef struct QtzSixTerms {
  double deltas[6];
  double qs[6];
  double ps[6];
  double total;
  double imag_max;
  // Final node counts for q4, q5, q6 (0 when not computed by quadrature).
  size_t nodes[3];
} QtzSixTerms;

typedef struct QtzMcEstimate {
  double mean;
  double std_error;
  uint64_t samples;
  uint64_t seed;
} QtzMcEstimate;

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *qtz_last_error(void);

// Library version as a static nul-terminated string.
const char *qtz_version(void);

// Validates and stores a lattice instance in `*out`.
//
// # Safety
// `out` must be null or valid for writes.
enum QtzStatus qtz_params_new(double q,
                              uint32_t n1,
                              uint32_t n2,
                              int64_t x1,
                              int64_t x2,
                              int64_t y1,
                              int64_t y2,
                              double t,
                              struct QtzParams **out);

// # Safety
// `params` must be null or a handle from [`qtz_params_new`] not yet freed.
void qtz_params_free(struct QtzParams *params);

// Default options: verified conventions, adapted contours.
struct QtzOptions *qtz_options_new(void);

// # Safety
// `opts` must be null or a handle from [`qtz_options_new`] not yet freed.
void qtz_options_free(struct QtzOptions *opts);

// # Safety
// `opts` must be null or a live options handle.
enum QtzStatus qtz_options_set_conventions(struct QtzOptions *opts, enum QtzConventions conv);

// Sets the node cap for contour refinement.
//
// # Safety
// `opts` must be null or a live options handle.
enum QtzStatus qtz_options_set_max_nodes(struct QtzOptions *opts, size_t max_nodes);

// Evaluates the six-term formula. `opts` may be null for the defaults.
//
// # Safety
// `params` must be a live handle, `opts` null or a live handle, and `out`
// valid for writes.
enum QtzStatus qtz_two_point_value(const struct QtzParams *params,
                                   const struct QtzOptions *opts,
                                   struct QtzSixTerms *out);

// Monte Carlo estimate of the observable; `samples >= 100`.
//
// # Safety
// `params` must be a live handle and `out` valid for writes.
enum QtzStatus qtz_mc_estimate(const struct QtzParams *params,
                               uint64_t samples,
                               uint64_t seed,
                               struct QtzMcEstimate *out);

// Asymptotic `[q1, q3, q4, q5, q6]` for one particle per species at scale
// `l`, in the reading `conv`.
//
// # Safety
// `out` must be valid for writing five doubles.
enum QtzStatus qtz_asym_terms(double q,
                              double l,
                              double c11,
                              double c12,
                              double c21,
                              uint32_t order,
                              enum QtzConventions conv,
                              double *out);

// Regularized upper incomplete gamma function `Q(a, z)`.
//
// # Safety
// `out` must be valid for writes.
enum QtzStatus qtz_gamma_q(double a, double z, double *out);

#endif  /* QTAZRP_H */
