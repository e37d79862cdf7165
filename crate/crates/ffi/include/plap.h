#ifndef PLAP_H
#define PLAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum {
  PLAP_STATUS_OK = 0,
  PLAP_STATUS_NULL_POINTER = 1,
  PLAP_STATUS_INVALID_ARGUMENT = 2,
  PLAP_STATUS_INVALID_MESH = 3,
  PLAP_STATUS_INVALID_CONFIG = 4,
  PLAP_STATUS_FIELD_SHAPE = 5,
  PLAP_STATUS_DEGENERATE = 6,
  PLAP_STATUS_OUTSIDE_THREE_ROOT_REGION = 7,
  PLAP_STATUS_NOT_CONVERGED = 8,
  PLAP_STATUS_NUMERICAL = 9,
  PLAP_STATUS_IO = 10,
  PLAP_STATUS_PARSE = 11,
  PLAP_STATUS_PANIC = 12,
} PlapStatus;

typedef struct PlapConfig PlapConfig;

typedef struct PlapMesh PlapMesh;

typedef struct PlapReport PlapReport;

/**
 * Exponents and parameter of the problem.
 */
typedef struct {
  double alpha;
  double p;
  double beta;
  double gamma;
  double lambda;
  uint32_t dimension;
} PlapExponents;

typedef struct {
  double kinetic;
  double term_a;
  double term_b;
  double term_c;
  double total;
  double residual;
} PlapEnergy;

typedef struct {
  double lambda_star;
  double rho;
  double lambda_hump;
  double lambda_barrier;
  double lambda_dip;
  double b_max;
  double a_max;
  double c_star;
} PlapLambdaStar;

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *plap_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *plap_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void plap_string_free(char *s);

/**
 * Uniform grid on `(0, length)` with `nodes` nodes including both ends.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
PlapStatus plap_mesh_interval(double length, size_t nodes, PlapMesh **out);

/**
 * Uniform grid on `(0, lx) × (0, ly)`, nodes numbered x fastest.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
PlapStatus plap_mesh_rectangle(double lx, double ly, size_t nx, size_t ny, PlapMesh **out);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `mesh` must be NULL or a live handle.
 */
size_t plap_mesh_len(const PlapMesh *mesh);

/**
 * # Safety
 * `mesh` must be NULL or a handle from this library, freed once.
 */
void plap_mesh_free(PlapMesh *mesh);

/**
 * Positive roots of the fibering equation for moments `(a, b, c)`, ascending.
 * Writes up to three roots into `roots` and their number into `count`.
 *
 * # Safety
 * `exps` must point to a valid struct, `roots` to room for three doubles and
 * `count` to a writable `size_t`.
 */
PlapStatus plap_find_roots(double a,
                           double b,
                           double c,
                           const PlapExponents *exps,
                           double *roots,
                           size_t *count);

/**
 * Energy of the nodal field `values` (`len` entries, zero on the boundary).
 *
 * # Safety
 * `mesh` must be a live handle, `values` must point to `len` doubles and
 * `out` must be writable.
 */
PlapStatus plap_energy(const PlapMesh *mesh,
                       const double *values,
                       size_t len,
                       const PlapExponents *exps,
                       PlapEnergy *out);

/**
 * Threshold estimate with default solver options. `exps->lambda` is ignored.
 *
 * # Safety
 * `mesh` and `exps` must be valid, `out` writable.
 */
PlapStatus plap_lambda_star(const PlapMesh *mesh, const PlapExponents *exps, PlapLambdaStar *out);

/**
 * The canonical scenario configuration.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
PlapStatus plap_config_default(PlapConfig **out);

/**
 * Parses a scenario from flat TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string, `out` writable.
 */
PlapStatus plap_config_from_toml(const char *text, PlapConfig **out);

/**
 * Sets `λ = fraction·λ*`; `fraction` must lie in `(0, 1]`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
PlapStatus plap_config_set_lambda_fraction(PlapConfig *cfg, double fraction);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
PlapStatus plap_config_set_seed(PlapConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be NULL or a handle from this library, freed once.
 */
void plap_config_free(PlapConfig *cfg);

/**
 * Runs the full pipeline. Solver failures still produce a report whose
 * verdict is FAIL; only invalid input is an error.
 *
 * # Safety
 * `cfg` must be a live handle, `out` writable.
 */
PlapStatus plap_run_scenario(const PlapConfig *cfg, PlapReport **out);

/**
 * 1 when every check passed, 0 when one failed, -1 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
int plap_report_passed(const PlapReport *report);

/**
 * Deterministic JSON of the report; release with [`plap_string_free`].
 *
 * # Safety
 * `report` must be a live handle, `out` writable.
 */
PlapStatus plap_report_to_json(const PlapReport *report, char **out);

/**
 * # Safety
 * `report` must be NULL or a handle from this library, freed once.
 */
void plap_report_free(PlapReport *report);

#endif  /* PLAP_H */
