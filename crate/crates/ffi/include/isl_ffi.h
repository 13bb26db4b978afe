#ifndef ISL_FFI_H
#define ISL_FFI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every call.
typedef enum IslStatus {
  ISL_STATUS_OK = 0,
  ISL_STATUS_NULL_POINTER = 1,
  ISL_STATUS_INVALID_UTF8 = 2,
  ISL_STATUS_INVALID_CONFIG = 3,
  ISL_STATUS_DOMAIN = 4,
  ISL_STATUS_PRECONDITION = 5,
  ISL_STATUS_IO = 6,
  ISL_STATUS_OUT_OF_RANGE = 7,
  ISL_STATUS_PANIC = 8,
} IslStatus;

// Experiment configuration.
typedef struct IslConfig IslConfig;

// Constellation snapshot.
typedef struct IslConstellation IslConstellation;

// Matching on one snapshot.
typedef struct IslMatching IslMatching;

// Finished experiment.
typedef struct IslRun IslRun;

typedef struct IslDesign {
  double l_adj_star_m;
  double mpl_db;
  double required_eirpg_w;
} IslDesign;

typedef struct IslPair {
  size_t u;
  size_t v;
  double rate_snr_bps;
  double dist_m;
} IslPair;

// Summary of a run. SINR fields are NaN when no allocation ran.
typedef struct IslMetrics {
  size_t n_sim;
  double mu_m_hat;
  double mu_m_hat_degrees;
  double mu_r_snr_bps;
  double mu_r_sinr_hat;
  double mu_r_sinr_bps;
  size_t min_degree;
  size_t permissibility_violations;
} IslMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null. Valid until the next failing
// call on the same thread.
const char *isl_last_error(void);

// Library version, static string.
const char *isl_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must come from this library or be null.
void isl_string_free(char *s);

// Default configuration.
//
// # Safety
// `out` must be valid for writes.
enum IslStatus isl_config_default(struct IslConfig **out);

// Parses a JSON configuration; absent fields take their defaults.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for writes.
enum IslStatus isl_config_from_json(const char *json, struct IslConfig **out);

// Effective configuration as JSON; free with [`isl_string_free`].
//
// # Safety
// `cfg` must be a live handle and `out` valid for writes.
enum IslStatus isl_config_to_json(const struct IslConfig *cfg, char **out);

// # Safety
// `cfg` must come from this library or be null.
void isl_config_free(struct IslConfig *cfg);

// Design range, margin path loss and required EIRPG for `cfg`.
//
// # Safety
// `cfg` must be a live handle and `out` valid for writes.
enum IslStatus isl_design(const struct IslConfig *cfg, struct IslDesign *out);

// Constellation of `cfg` propagated to `epoch_s`.
//
// # Safety
// `cfg` must be a live handle and `out` valid for writes.
enum IslStatus isl_constellation_new(const struct IslConfig *cfg,
                                     double epoch_s,
                                     struct IslConstellation **out);

// # Safety
// `c` must be a live handle.
size_t isl_constellation_len(const struct IslConstellation *c);

// Distance in metres between satellites `u` and `v`.
//
// # Safety
// `c` must be a live handle and `out` valid for writes.
enum IslStatus isl_constellation_distance(const struct IslConstellation *c,
                                          size_t u,
                                          size_t v,
                                          double *out);

// # Safety
// `c` must come from this library or be null.
void isl_constellation_free(struct IslConstellation *c);

// Runs the matching algorithm of `cfg` on snapshot `c` without history.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum IslStatus isl_match(const struct IslConfig *cfg,
                         const struct IslConstellation *c,
                         struct IslMatching **out);

// # Safety
// `m` must be a live handle.
size_t isl_matching_len(const struct IslMatching *m);

// `w(M)` in bit/s.
//
// # Safety
// `m` must be a live handle.
double isl_matching_weight(const struct IslMatching *m);

// Pair `i` of the matching, heaviest first.
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum IslStatus isl_matching_pair(const struct IslMatching *m, size_t i, struct IslPair *out);

// # Safety
// `m` must come from this library or be null.
void isl_matching_free(struct IslMatching *m);

// Runs the full experiment of `cfg`.
//
// # Safety
// `cfg` must be a live handle and `out` valid for writes.
enum IslStatus isl_run(const struct IslConfig *cfg, struct IslRun **out);

// # Safety
// `run` must be a live handle and `out` valid for writes.
enum IslStatus isl_run_metrics(const struct IslRun *run, struct IslMetrics *out);

// Copies up to `cap` sorted `R*_SNR` samples into `buf` and stores the total
// sample count in `len`. Pass `cap = 0` to query the count.
//
// # Safety
// `buf` must hold `cap` doubles (may be null when `cap` is 0); `len` must be
// valid for writes.
enum IslStatus isl_run_rate_samples(const struct IslRun *run, double *buf, size_t cap, size_t *len);

// Writes the CSV families of `run` into directory `dir`.
//
// # Safety
// `run` must be a live handle and `dir` a NUL-terminated string.
enum IslStatus isl_run_write_csv(const struct IslRun *run, const char *dir);

// # Safety
// `run` must come from this library or be null.
void isl_run_free(struct IslRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISL_FFI_H */
