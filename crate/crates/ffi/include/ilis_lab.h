#ifndef ILIS_LAB_H
#define ILIS_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum IlisStatus {
  ILIS_STATUS_OK = 0,
  ILIS_STATUS_NULL_POINTER = 1,
  ILIS_STATUS_INVALID_INPUT = 2,
  ILIS_STATUS_DOMAIN = 3,
  ILIS_STATUS_CAPACITY = 4,
  ILIS_STATUS_RESOURCE_LIMIT = 5,
  ILIS_STATUS_IO = 6,
  ILIS_STATUS_PANIC = 7,
} IlisStatus;

/*
 Source of `E(y^{s_n})` for [`ilis_mgf_normalized`].
 */
typedef enum IlisMgfSource {
  ILIS_MGF_SOURCE_ENUMERATION = 0,
  ILIS_MGF_SOURCE_SERIES = 1,
  ILIS_MGF_SOURCE_DARBOUX = 2,
} IlisMgfSource;

/*
 Exact distribution of `s_n`.
 */
typedef struct IlisDistribution IlisDistribution;

/*
 Monte Carlo report.
 */
typedef struct IlisReport IlisReport;

/*
 Truncated power series.
 */
typedef struct IlisSeries IlisSeries;

/*
 Per-permutation statistics.
 */
typedef struct IlisPermStats {
  /*
   initial increasing run of the one-line form
   */
  uint64_t ilis;
  /*
   sum of cycle ILIS lengths
   */
  uint64_t s;
  /*
   largest cycle ILIS length
   */
  uint64_t max_ilis;
  /*
   longest increasing subsequence
   */
  uint64_t lis;
  uint64_t cycle_count;
} IlisPermStats;

/*
 Scalar fields of a simulation report. Absent values are NaN.
 */
typedef struct IlisReportSummary {
  uint64_t n;
  uint64_t samples;
  uint64_t seed;
  double empirical_mean;
  double empirical_variance;
  double mean_offset;
  double ks_distance;
  double ks_distance_standardized;
} IlisReportSummary;

/*
 Library version as a static NUL-terminated string.
 */
const char *ilis_version(void);

/*
 Message for the most recent failed call on this thread, or an empty
 string. Valid until the next call into this library on the same thread.
 */
const char *ilis_last_error_message(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be null or a pointer obtained from this library and not yet freed.
 */
void ilis_string_free(char *s);

/*
 Statistics of the permutation whose one-line form is `image[0..n]`
 (values 1-based).

 # Safety
 `image` must point to `n` readable values; `out` must be writable.
 */
enum IlisStatus ilis_perm_stats(const uint32_t *image, size_t n, struct IlisPermStats *out);

/*
 Canonical cycle string such as `(1)(2 3 5 7)(4)(6)`.

 # Safety
 `image` must point to `n` readable values; `out` must be writable. Free the
 result with [`ilis_string_free`].
 */
enum IlisStatus ilis_perm_cycles(const uint32_t *image, size_t n, char **out);

/*
 Exact distribution of `s_n`. `workers = 0` uses all cores. The cap comes
 from `ILIS_LAB_CAP` (default 10).

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_enumerate(uint32_t n, uint32_t workers, struct IlisDistribution **out);

/*
 # Safety
 `d` must be null or a live handle from [`ilis_enumerate`].
 */
void ilis_distribution_free(struct IlisDistribution *d);

/*
 Number of permutations with `s_n = j`. Fails with capacity if the count
 does not fit 64 bits.

 # Safety
 `d` must be a live handle; `out` must be writable.
 */
enum IlisStatus ilis_distribution_count(const struct IlisDistribution *d,
                                        uint32_t j,
                                        uint64_t *out);

/*
 `E(y^{s_n})`.

 # Safety
 `d` must be a live handle; `out` must be writable.
 */
enum IlisStatus ilis_distribution_expected_y_power(const struct IlisDistribution *d,
                                                   double y,
                                                   double *out);

/*
 # Safety
 `d` must be a live handle; `mean` and `variance` must be writable.
 */
enum IlisStatus ilis_distribution_moments(const struct IlisDistribution *d,
                                          double *mean,
                                          double *variance);

/*
 `{"n": .., "counts": {"j": "count"}, "total": ".."}`.

 # Safety
 `d` must be a live handle; `out` must be writable. Free the result with
 [`ilis_string_free`].
 */
enum IlisStatus ilis_distribution_to_json(const struct IlisDistribution *d, char **out);

/*
 `H(x, y)` truncated at `x^order`.

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_h_series(double y,
                              size_t order,
                              bool allow_outside_window,
                              struct IlisSeries **out);

/*
 Truncation order `N`; the series has `N + 1` coefficients. Returns 0 for
 a null handle.

 # Safety
 `s` must be null or a live handle.
 */
size_t ilis_series_order(const struct IlisSeries *s);

/*
 Copies the `order + 1` coefficients into `buf`.

 # Safety
 `s` must be a live handle and `buf` must have room for `len` doubles.
 */
enum IlisStatus ilis_series_coeffs(const struct IlisSeries *s, double *buf, size_t len);

/*
 # Safety
 `s` must be null or a live handle from [`ilis_h_series`].
 */
void ilis_series_free(struct IlisSeries *s);

/*
 `h(y) = Σ (-1)^{j-1} y^j / (j·j!)` summed to tolerance `tol`.
 */
double ilis_h(double y, double tol);

/*
 Leading asymptotic of `E(y^{s_n})`.

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_darboux_expectation(double y, uint64_t n, double *out);

/*
 `E(e^{t s'_n})` from the chosen source.

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_mgf_normalized(uint64_t n, double t, enum IlisMgfSource source, double *out);

/*
 Euler's gamma function; domain error at poles.

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_gamma(double z, double *out);

/*
 Standard normal distribution function.
 */
double ilis_normal_cdf(double u);

/*
 Runs a Monte Carlo simulation. `workers = 0` uses all cores.

 # Safety
 `out` must be writable.
 */
enum IlisStatus ilis_simulate(uint64_t n,
                              uint64_t samples,
                              uint64_t seed,
                              uint32_t workers,
                              struct IlisReport **out);

/*
 # Safety
 `r` must be a live handle; `out` must be writable.
 */
enum IlisStatus ilis_report_summary(const struct IlisReport *r, struct IlisReportSummary *out);

/*
 Full report as JSON, identical to the `simulate` subcommand output.

 # Safety
 `r` must be a live handle; `out` must be writable. Free the result with
 [`ilis_string_free`].
 */
enum IlisStatus ilis_report_to_json(const struct IlisReport *r, char **out);

/*
 # Safety
 `r` must be null or a live handle from [`ilis_simulate`].
 */
void ilis_report_free(struct IlisReport *r);

#endif  /* ILIS_LAB_H */
