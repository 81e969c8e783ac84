#ifndef AFDM_H
#define AFDM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum AfdmStatus {
  AFDM_STATUS_OK = 0,
  AFDM_STATUS_NULL_POINTER = 1,
  AFDM_STATUS_INVALID_ARGUMENT = 2,
  AFDM_STATUS_CONFIG = 3,
  AFDM_STATUS_DIMENSION = 4,
  AFDM_STATUS_BUFFER_TOO_SMALL = 5,
  AFDM_STATUS_RUNTIME = 6,
  AFDM_STATUS_PANIC = 7,
} AfdmStatus;

typedef enum AfdmMode {
  AFDM_MODE_AF_SHAPE = 0,
  AFDM_MODE_PAPR_MIN = 1,
  AFDM_MODE_JOINT = 2,
} AfdmMode;

typedef enum AfdmVariables {
  AFDM_VARIABLES_RCS_ONLY = 0,
  AFDM_VARIABLES_RCS_PLUS_PRECHIRP = 1,
} AfdmVariables;

/*
 A designed waveform bound to the system it was designed for.
 */
typedef struct AfdmDesign AfdmDesign;

/*
 System configuration with its precomputed operators and the default zone.
 */
typedef struct AfdmSystem AfdmSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *afdm_version(void);

/*
 Copy the calling thread's last error message into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length without the NUL.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
uintptr_t afdm_last_error_message(char *buf, uintptr_t len);

/*
 Reference system (N = 128, 8PSK, octagonal alphabet, 4x oversampling)
 with a comb of reserved subcarriers covering `rcs_ratio` of the band.

 # Safety
 `out` must point to writable storage for one handle pointer.
 */
enum AfdmStatus afdm_system_new_reference(double rcs_ratio, struct AfdmSystem **out);

/*
 Custom system. `reserved` lists `reserved_len` reserved subcarrier indices
 and may be null when `reserved_len` is zero.

 # Safety
 `reserved` must point to `reserved_len` values; `out` must be writable.
 */
enum AfdmStatus afdm_system_new(uintptr_t n,
                                double c1,
                                uintptr_t oversampling,
                                const uintptr_t *reserved,
                                uintptr_t reserved_len,
                                struct AfdmSystem **out);

/*
 # Safety
 `sys` must be null or a handle from `afdm_system_new*` not yet freed.
 */
void afdm_system_free(struct AfdmSystem *sys);

/*
 Subcarrier count, oversampling factor and number of reserved subcarriers.

 # Safety
 `sys` must be a live handle; output pointers may be null.
 */
enum AfdmStatus afdm_system_dims(const struct AfdmSystem *sys,
                                 uintptr_t *n,
                                 uintptr_t *oversampling,
                                 uintptr_t *reserved);

/*
 Conventional waveform with random symbols drawn from `seed`.

 # Safety
 `sys` must be a live handle and `out` writable.
 */
enum AfdmStatus afdm_design_conventional(const struct AfdmSystem *sys,
                                         uint64_t seed,
                                         struct AfdmDesign **out);

/*
 Greedy pre-chirp sweep starting from the conventional waveform of `seed`.

 # Safety
 `sys` must be a live handle and `out` writable.
 */
enum AfdmStatus afdm_design_gps(const struct AfdmSystem *sys,
                                uint64_t seed,
                                struct AfdmDesign **out);

/*
 Optimize from the conventional waveform of `seed`. `gamma_db` is used by
 the joint mode; `r_max` of zero keeps the default iteration budget.

 # Safety
 `sys` must be a live handle and `out` writable.
 */
enum AfdmStatus afdm_design_optimize(const struct AfdmSystem *sys,
                                     uint64_t seed,
                                     enum AfdmMode mode,
                                     enum AfdmVariables variables,
                                     double gamma_db,
                                     uintptr_t r_max,
                                     struct AfdmDesign **out);

/*
 # Safety
 `d` must be null or a live design handle.
 */
void afdm_design_free(struct AfdmDesign *d);

/*
 Transmit samples: N at symbol rate, or N * L_P when `oversampled` is true.
 `written` receives the required count even when the buffer is too small.

 # Safety
 `out` must hold `2 * capacity` doubles; `written` may be null.
 */
enum AfdmStatus afdm_design_samples(const struct AfdmDesign *d,
                                    bool oversampled,
                                    double *out,
                                    uintptr_t capacity,
                                    uintptr_t *written);

/*
 The design vector u (length N).

 # Safety
 As for [`afdm_design_samples`].
 */
enum AfdmStatus afdm_design_vector(const struct AfdmDesign *d,
                                   double *out,
                                   uintptr_t capacity,
                                   uintptr_t *written);

/*
 Weighted ISL over the default zone and oversampled PAPR in dB.

 # Safety
 `d` must be a live handle; output pointers may be null.
 */
enum AfdmStatus afdm_design_metrics(const struct AfdmDesign *d, double *isl, double *papr_db);

/*
 Iterations used and whether the PAPR target was met (always true outside
 the joint mode).

 # Safety
 `d` must be a live handle; output pointers may be null.
 */
enum AfdmStatus afdm_design_status(const struct AfdmDesign *d,
                                   uintptr_t *iterations,
                                   bool *feasible);

/*
 PAPR in dB of `count` interleaved complex samples.

 # Safety
 `samples` must hold `2 * count` doubles and `out` be writable.
 */
enum AfdmStatus afdm_papr_db(const double *samples, uintptr_t count, double *out);

/*
 Human-readable name of a status code, as a static string.
 */
const char *afdm_status_name(enum AfdmStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFDM_H */
