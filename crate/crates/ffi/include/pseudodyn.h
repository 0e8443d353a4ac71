#ifndef PSEUDODYN_H
#define PSEUDODYN_H

#include <stddef.h>
#include <stdint.h>

typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_NULL_POINTER = 1,
  PD_STATUS_INVALID_ARGUMENT = 2,
  PD_STATUS_NUMERICAL = 3,
  PD_STATUS_BUFFER_TOO_SMALL = 4,
  PD_STATUS_PANIC = 5,
} PdStatus;

// Eigenvalues of Gaussian-perturbed copies of a model.
typedef struct PdCloud PdCloud;

// A matrix of the family together with its dense form.
typedef struct PdModel PdModel;

// Non-zero eigenvalues from the closed-form polynomial.
typedef struct PdSpectrum PdSpectrum;

// Multiplicities of the zero eigenvalue and the non-zero count.
typedef struct PdMultiplicities {
  // Number of non-zero eigenvalues minus one.
  size_t p1;
  size_t a0;
  size_t g0;
  size_t k0;
} PdMultiplicities;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, including the
// terminating nul, or 0 when there is none. When `buf` is non-null up to
// `cap` bytes are copied, always nul terminated.
size_t pd_last_error_message(char *buf, size_t cap);

// Builds the model with `nb` polynomial coefficients `b_1..b_nb`. `b_re` and
// `b_im` may be null when `nb` is 0.
enum PdStatus pd_model_new(size_t n,
                           size_t t,
                           const double *b_re,
                           const double *b_im,
                           size_t nb,
                           double delta_re,
                           double delta_im,
                           struct PdModel **out);

void pd_model_free(struct PdModel *model);

size_t pd_model_size(const struct PdModel *model);

enum PdStatus pd_model_multiplicities(const struct PdModel *model, struct PdMultiplicities *out);

// Jordan block sizes of the zero eigenvalue, largest first.
enum PdStatus pd_model_block_sizes(const struct PdModel *model,
                                   size_t *buf,
                                   size_t cap,
                                   size_t *len);

// Row-major entries of the dense matrix, `n*n` values.
enum PdStatus pd_model_dense(const struct PdModel *model,
                             double *re,
                             double *im,
                             size_t cap,
                             size_t *len);

// Largest `‖v_1‖ ‖w_d‖` over the longest Jordan chains of zero.
enum PdStatus pd_model_kappa0(const struct PdModel *model, double *out);

// `‖(zI - M)^{-1}‖₂`, `+inf` at an eigenvalue.
enum PdStatus pd_model_resolvent_norm(const struct PdModel *model,
                                      double z_re,
                                      double z_im,
                                      double *out);

// `σ_min(zI - M)` on an `nx × ny` grid over the rectangle, row-major in `y`
// (entry `j*nx + i` is node `(x_i, y_j)`).
enum PdStatus pd_model_sigma_grid(const struct PdModel *model,
                                  double x_min,
                                  double x_max,
                                  double y_min,
                                  double y_max,
                                  size_t nx,
                                  size_t ny,
                                  double *out,
                                  size_t cap);

// Non-zero eigenvalues with relative root tolerance `tol` (0 selects the
// default).
enum PdStatus pd_spectrum_compute(const struct PdModel *model, double tol, struct PdSpectrum **out);

void pd_spectrum_free(struct PdSpectrum *spectrum);

enum PdStatus pd_spectrum_roots(const struct PdSpectrum *spectrum,
                                double *re,
                                double *im,
                                size_t cap,
                                size_t *len);

// Largest backward residual of the returned roots.
double pd_spectrum_max_residual(const struct PdSpectrum *spectrum);

// `|Σλ - nδ| / |nδ|`.
double pd_spectrum_trace_error(const struct PdSpectrum *spectrum);

// Eigenvalues of `M + tilde_delta·Z` for `samples` Gaussian `Z`, seeded by
// `seed`.
enum PdStatus pd_ensemble_run(const struct PdModel *model,
                              double tilde_delta_re,
                              double tilde_delta_im,
                              size_t samples,
                              uint64_t seed,
                              struct PdCloud **out);

void pd_cloud_free(struct PdCloud *cloud);

// All perturbed eigenvalues, grouped by sample.
enum PdStatus pd_cloud_points(const struct PdCloud *cloud,
                              double *re,
                              double *im,
                              size_t cap,
                              size_t *len);

// Mean modulus of the cloud after removing the points that track the
// non-zero eigenvalues; `match_tol <= 0` selects the default.
enum PdStatus pd_cloud_mean_radius(struct PdCloud *cloud, double match_tol, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSEUDODYN_H */
