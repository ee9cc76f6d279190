/*
 * C interface to the exterior-transport library.
 *
 * Conventions:
 *   - Every function returns an extot_status; EXTOT_OK is 0.
 *   - Objects are opaque handles created by extot_*_create functions and
 *     released with the matching extot_*_destroy.
 *   - Structured reports come back as heap-allocated JSON strings; release
 *     them with extot_string_free.
 *   - extot_last_error() describes the most recent failure on the calling
 *     thread.
 */
#ifndef EXTOT_H
#define EXTOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum extot_status {
  EXTOT_OK = 0,
  EXTOT_ERROR_INVALID_ARGUMENT = 1,
  EXTOT_ERROR_INFEASIBLE = 2,
  EXTOT_ERROR_LIMIT = 3,
  EXTOT_ERROR_PARSE = 4,
  EXTOT_ERROR_INTERNAL = 5
} extot_status;

const char* extot_status_name(int status);
/* Message for the last failing call on this thread, empty if none. */
const char* extot_last_error(void);

void extot_string_free(char* s);

/* ------------------------------------------------------------------ grid */
typedef struct extot_grid_s extot_grid;

int extot_grid_create(int dim, const int64_t* extent, double spacing,
                      const double* origin, extot_grid** out);
/* Grid of cells covering [-half_width, half_width]^dim, centered. */
int extot_grid_create_centered(int dim, double half_width, double spacing,
                               extot_grid** out);
void extot_grid_destroy(extot_grid* g);
int extot_grid_cells(const extot_grid* g, int64_t* out);
int extot_grid_dim(const extot_grid* g, int* out);
int extot_grid_spacing(const extot_grid* g, double* out);

/* ------------------------------------------------------------------ cost */
typedef struct extot_cost_s extot_cost;

int extot_cost_create_power(double p, double cap_radius, extot_cost** out);
int extot_cost_create_table(const double* radii, const double* values, int n,
                            double cap_radius, extot_cost** out);
int extot_cost_create_anisotropic(double p, const double* angles,
                                  const double* weights, int n,
                                  double cap_radius, extot_cost** out);
void extot_cost_destroy(extot_cost* c);
int extot_cost_eval(const extot_cost* c, const double* z, int dim, double* out);
/* JSON report of the cost hypothesis checks. */
int extot_cost_validate(const extot_cost* c, int dim, char** json_out);
int extot_cost_support_radius(const extot_cost* c, int dim, double m,
                              double* out);

/* ----------------------------------------------------------------- field */
typedef struct extot_field_s extot_field;

int extot_field_create(const extot_grid* g, const double* values,
                       extot_field** out);
/* Shape text, e.g. "ball(0,0;1)" or "ball(0;1)+cube(2;0.5)". */
int extot_field_rasterize(const extot_grid* g, const char* shape,
                          extot_field** out);
void extot_field_destroy(extot_field* f);
int extot_field_values(const extot_field* f, double* buffer, int64_t size);
int extot_field_mass(const extot_field* f, double* out);
int extot_field_l1_distance(const extot_field* a, const extot_field* b,
                            double* out);

/* ---------------------------------------------------------------- primal */
typedef struct extot_plan_s extot_plan;

int extot_solve_exterior(const extot_field* f, const extot_cost* c,
                         extot_plan** plan_out, double* value_out);
void extot_plan_destroy(extot_plan* p);
int extot_plan_value(const extot_plan* p, double* out);
int extot_plan_entry_count(const extot_plan* p, int64_t* out);
/* Fills parallel arrays of length extot_plan_entry_count(). */
int extot_plan_entries(const extot_plan* p, int64_t* sources, int64_t* targets,
                       double* masses, double* unit_costs);
int extot_plan_second_marginal(const extot_plan* p, extot_field** out);
int extot_plan_radii(const extot_plan* p, double* r_proof, double* r_active,
                     double* max_arc);
int extot_saturation_report(const extot_field* f, const extot_plan* p,
                            double tol, char** json_out);
int extot_second_marginal_uniqueness(const extot_field* f, const extot_cost* c,
                                     int trials, double* max_l1_spread);
int extot_classical_cost(const extot_field* f, const extot_field* g,
                         const extot_cost* c, double* out);

/* ------------------------------------------------------------------ dual */
typedef struct extot_potentials_s extot_potentials;

/* direction: 0 forward (xi^c), 1 reverse (xi^cbar). */
int extot_c_transform(const extot_grid* g, const extot_cost* c,
                      const double* xi, int direction, double* out);
int extot_project(const extot_grid* g, const extot_cost* c, const double* phi,
                  double* out);
int extot_dual_from_plan(const extot_field* f, const extot_plan* p,
                         extot_potentials** out);
int extot_maximal_potential(const extot_field* f, const extot_cost* c,
                            extot_potentials** out);
void extot_potentials_destroy(extot_potentials* p);
int extot_potentials_get(const extot_potentials* p, double* phi, double* psi,
                         int64_t size);
int extot_potentials_objective(const extot_potentials* p, const extot_field* f,
                               double* out);
int extot_duality_gap(const extot_field* f, const extot_cost* c, double* out);
int extot_slackness_report(const extot_field* f, const extot_plan* p,
                           const extot_potentials* pair, char** json_out);

/* ------------------------------------------------------------- rearrange */
int extot_rearrange_decreasing(const extot_grid* g, const double* phi,
                               double* out);
int extot_rearrange_increasing(const extot_grid* g, const double* psi,
                               double* out);
/* mask entries are 0/1; erosion uses the exact distance transform. */
int extot_erode(const extot_grid* g, const uint8_t* mask, double radius,
                uint8_t* out);
int extot_rearrangement_check(const extot_grid* g, const extot_cost* c,
                              const double* psi, char** json_out);

/* -------------------------------------------------------------- optimize */
int extot_bathtub(const extot_grid* g, const double* xi, double m,
                  extot_field** out);
int extot_maximize_shape(double m, const extot_cost* c, const extot_field* init,
                         extot_field** final_out, char** trace_json_out);
int extot_energy_curve(const double* ms, int n, const extot_cost* c,
                       const extot_grid* g, char** json_out);
int extot_concentration_cube(const extot_field* f, double m,
                             const extot_cost* c, char** json_out);
int extot_tightness_report(const extot_field* f, double m, const extot_cost* c,
                           char** json_out);
int extot_radial_ball_value(const extot_cost* c, int dim, double radius,
                            double* out);

/* ---------------------------------------------------------------- oracle */
int extot_brute_lp(const extot_field* f, const extot_cost* c, double* value_out);
int extot_monotone_1d(double a, double b, double level, const extot_cost* c,
                      double* out);

/* ------------------------------------------------------------------- cli */
/* Runs a config file; task/seed/threads override the file when >= 0 or
 * nonempty. Returns the task's exit code through exit_code_out. */
int extot_run_config(const char* config_path, const char* out_dir,
                     const char* task_override, int64_t seed_override,
                     int threads_override, int* exit_code_out);
/* level: "quick" or "full"; returns the JSON verification report. */
int extot_verify(const char* level, uint64_t seed, int threads,
                 char** json_out, int* all_pass_out);

#if defined(__cplusplus)
}
#endif

#endif /* EXTOT_H */
