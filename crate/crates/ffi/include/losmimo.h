#ifndef LOSMIMO_H
#define LOSMIMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LOSMIMO_PATH_APPROXIMATE 0

#define LOSMIMO_PATH_EXACT 1

#define LOSMIMO_SHAPE_LINEAR 0

#define LOSMIMO_SHAPE_QUADRATIC 1

#define LOSMIMO_SHAPE_EXPONENTIAL 2

typedef enum LosmimoStatus {
  LOSMIMO_STATUS_OK = 0,
  LOSMIMO_STATUS_NULL_POINTER = 1,
  LOSMIMO_STATUS_INVALID_ARGUMENT = 2,
  LOSMIMO_STATUS_CONFIG_ERROR = 3,
  LOSMIMO_STATUS_NUMERICAL_ERROR = 4,
  LOSMIMO_STATUS_INFEASIBLE = 5,
  LOSMIMO_STATUS_IO_ERROR = 6,
  LOSMIMO_STATUS_BUFFER_TOO_SMALL = 7,
  LOSMIMO_STATUS_PANIC = 8,
} LosmimoStatus;

/**
 * Channel matrix built from a link and a medium.
 */
typedef struct LosmimoChannel LosmimoChannel;

/**
 * Link geometry plus the distance model used to build channels.
 */
typedef struct LosmimoLink LosmimoLink;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *losmimo_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated).
 * `required` (optional) receives the buffer size needed.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null; `required` must be valid or null.
 */
enum LosmimoStatus losmimo_last_error_message(char *buf, size_t len, size_t *required);

/**
 * Creates a link with `n_tx` transmit and `m_rx` receive antennas at the free-space
 * optimal spacing, untilted, using the approximate distance model.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by the caller.
 */
enum LosmimoStatus losmimo_link_new(size_t n_tx,
                                    size_t m_rx,
                                    double range,
                                    double lambda0,
                                    struct LosmimoLink **out);

/**
 * # Safety
 * `link` must come from [`losmimo_link_new`] and not be used afterwards. Null is ignored.
 */
void losmimo_link_free(struct LosmimoLink *link);

/**
 * Sets `d_t = d_r = eta * d_opt`.
 *
 * # Safety
 * `link` must be a valid handle.
 */
enum LosmimoStatus losmimo_link_set_eta(struct LosmimoLink *link, double eta);

/**
 * Sets explicit antenna spacings in meters.
 *
 * # Safety
 * `link` must be a valid handle.
 */
enum LosmimoStatus losmimo_link_set_spacings(struct LosmimoLink *link, double d_t, double d_r);

/**
 * Sets the array tilts in radians. Spacings are kept.
 *
 * # Safety
 * `link` must be a valid handle.
 */
enum LosmimoStatus losmimo_link_set_tilts(struct LosmimoLink *link, double theta_t, double theta_r);

/**
 * Selects `LOSMIMO_PATH_APPROXIMATE` or `LOSMIMO_PATH_EXACT`.
 *
 * # Safety
 * `link` must be a valid handle.
 */
enum LosmimoStatus losmimo_link_set_path_model(struct LosmimoLink *link, uint32_t model);

/**
 * Current spacings in meters.
 *
 * # Safety
 * `link` must be a valid handle; outputs must be valid pointers.
 */
enum LosmimoStatus losmimo_link_spacings(const struct LosmimoLink *link, double *d_t, double *d_r);

/**
 * `1/kappa` without a medium. `floor_limited` is optional.
 *
 * # Safety
 * `link` must be a valid handle; `inv_kappa` must be valid; `floor_limited` valid or null.
 */
enum LosmimoStatus losmimo_link_inv_kappa_free_space(const struct LosmimoLink *link,
                                                     double *inv_kappa,
                                                     bool *floor_limited);

/**
 * `1/kappa` with a rectangular slab of the given thickness (meters).
 *
 * # Safety
 * As for [`losmimo_link_inv_kappa_free_space`].
 */
enum LosmimoStatus losmimo_link_inv_kappa_rectangular(const struct LosmimoLink *link,
                                                      double thickness,
                                                      double sqrt_eps_r,
                                                      double *inv_kappa,
                                                      bool *floor_limited);

/**
 * `1/kappa` with a Toeplitz medium given by its first row (meters, `len = max(M, N)`).
 *
 * # Safety
 * `first_row` must point to `len` doubles; other pointers as for
 * [`losmimo_link_inv_kappa_free_space`].
 */
enum LosmimoStatus losmimo_link_inv_kappa_toeplitz(const struct LosmimoLink *link,
                                                   const double *first_row,
                                                   size_t len,
                                                   double sqrt_eps_r,
                                                   double *inv_kappa,
                                                   bool *floor_limited);

/**
 * Builds the combined channel for a Toeplitz medium (use an all-zero row for free space).
 *
 * # Safety
 * `first_row` must point to `len` doubles; `out` must be valid and receives an owned handle.
 */
enum LosmimoStatus losmimo_channel_new_toeplitz(const struct LosmimoLink *link,
                                                const double *first_row,
                                                size_t len,
                                                double sqrt_eps_r,
                                                struct LosmimoChannel **out);

/**
 * # Safety
 * `channel` must come from a `losmimo_channel_new_*` function. Null is ignored.
 */
void losmimo_channel_free(struct LosmimoChannel *channel);

/**
 * Matrix shape: `m_rx` rows by `n_tx` columns.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LosmimoStatus losmimo_channel_shape(const struct LosmimoChannel *channel,
                                         size_t *m_rx,
                                         size_t *n_tx);

/**
 * Copies the entries row-major into `re` and `im`, each of length `m_rx * n_tx`.
 *
 * # Safety
 * `re` and `im` must be valid for `len` doubles.
 */
enum LosmimoStatus losmimo_channel_entries(const struct LosmimoChannel *channel,
                                           double *re,
                                           double *im,
                                           size_t len);

/**
 * Gram eigenvalues (ascending, `min(M, N)` of them) and `1/kappa` of the channel.
 * `inv_kappa_out` is optional.
 *
 * # Safety
 * `eigenvalues` must be valid for `len` doubles.
 */
enum LosmimoStatus losmimo_channel_eigenvalues(const struct LosmimoChannel *channel,
                                               double *eigenvalues,
                                               size_t len,
                                               double *inv_kappa_out);

/**
 * Spacing product `d_t d_r` (m^2) that orthogonalizes a `v`-antenna link behind a slab
 * of thickness `thickness`. Use `thickness = 0`, `sqrt_eps_r = 1` for free space.
 *
 * # Safety
 * `d_product` must be valid.
 */
enum LosmimoStatus losmimo_design_spacing(size_t v,
                                          double range,
                                          double lambda0,
                                          double theta_t,
                                          double theta_r,
                                          double thickness,
                                          double sqrt_eps_r,
                                          double *d_product);

/**
 * Slab thickness (meters) that makes `d_product` the orthogonal spacing.
 *
 * # Safety
 * `thickness` must be valid.
 */
enum LosmimoStatus losmimo_design_thickness(size_t v,
                                            double range,
                                            double lambda0,
                                            double theta_t,
                                            double theta_r,
                                            double d_product,
                                            double sqrt_eps_r,
                                            double *thickness);

/**
 * `|sin(m x / 2) / sin(x / 2)|`.
 */
double losmimo_closed_form_inner_product(size_t m, double x);

/**
 * Best scale `l_delta` (meters) for a shape-function medium under the span bound `c`.
 * `grid_points = 0` selects the default grid.
 *
 * # Safety
 * `link` must be valid; outputs must be valid pointers.
 */
enum LosmimoStatus losmimo_optimize_l_delta(const struct LosmimoLink *link,
                                            uint32_t shape_kind,
                                            double sqrt_eps_r,
                                            double c,
                                            size_t grid_points,
                                            double *l_delta,
                                            double *inv_kappa_out);

/**
 * Parses a scenario file, runs it and renders the CSV (without the timestamp line)
 * into `buf`. `required` (optional) receives the size needed including the NUL.
 *
 * # Safety
 * `config_text` must be a NUL-terminated UTF-8 string; `buf` valid for `len` bytes or null.
 */
enum LosmimoStatus losmimo_run_scenario_csv(const char *config_text,
                                            char *buf,
                                            size_t len,
                                            size_t *required);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOSMIMO_H */
