/* C interface to librnnid.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return RNNID_OK or an error status; rnnid_last_error() then
 * holds a message for the calling thread. Matrices are column-major.
 */
#ifndef RNNID_RNNID_H
#define RNNID_RNNID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RNNID_BUILDING_LIBRARY)
#    define RNNID_API __declspec(dllexport)
#  else
#    define RNNID_API __declspec(dllimport)
#  endif
#else
#  define RNNID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rnnid_status {
  RNNID_OK = 0,
  RNNID_E_INVALID_ARGUMENT = 1,
  RNNID_E_UNSUPPORTED_POTENTIAL = 2,
  RNNID_E_RANK_DEFICIENT = 3,
  RNNID_E_INFEASIBLE = 4,
  RNNID_E_NUMERIC = 5,
  RNNID_E_CONFIG = 6,
  RNNID_E_IO = 7,
  RNNID_E_INTERNAL = 8
} rnnid_status;

typedef enum rnnid_input_law { RNNID_INPUT_GAUSSIAN = 0, RNNID_INPUT_CUBED_GAUSSIAN = 1 } rnnid_input_law;

typedef enum rnnid_momentum { RNNID_MOMENTUM_NESTEROV = 0, RNNID_MOMENTUM_NESTEROV_RESTART = 1 } rnnid_momentum;
typedef enum rnnid_normalization { RNNID_NORMALIZE_SUM = 0, RNNID_NORMALIZE_MEAN = 1 } rnnid_normalization;
typedef enum rnnid_step_rule { RNNID_STEP_FIXED = 0, RNNID_STEP_INVERSE_LIPSCHITZ = 1 } rnnid_step_rule;

typedef struct rnnid_potential rnnid_potential;
typedef struct rnnid_system rnnid_system;
typedef struct rnnid_trajectory rnnid_trajectory;
typedef struct rnnid_config rnnid_config;
typedef struct rnnid_result rnnid_result;

typedef struct rnnid_solver_options {
  double step_size;
  int max_iterations;
  double stop_tol;
  rnnid_momentum momentum;
  rnnid_normalization normalization;
  rnnid_step_rule step_rule;
} rnnid_solver_options;

RNNID_API const char* rnnid_version(void);
/* Message for the last failed call on this thread; "" after success. */
RNNID_API const char* rnnid_last_error(void);
RNNID_API const char* rnnid_status_name(rnnid_status status);

/* Potentials */
RNNID_API rnnid_status rnnid_potential_leaky_relu(double rho, rnnid_potential** out);
RNNID_API rnnid_status rnnid_potential_param_relu(double lambda_lo, double lambda_hi, rnnid_potential** out);
/* q is n x n, symmetric positive semidefinite. */
RNNID_API rnnid_status rnnid_potential_quadratic(const double* q, size_t n, rnnid_potential** out);
RNNID_API void rnnid_potential_free(rnnid_potential* potential);
/* Any output pointer may be NULL. */
RNNID_API rnnid_status rnnid_potential_constants(const rnnid_potential* potential, double* lambda, double* Lambda,
                                                 double* epsilon);
RNNID_API rnnid_status rnnid_potential_gradient(const rnnid_potential* potential, const double* x, size_t n,
                                                double* out);
RNNID_API rnnid_status rnnid_potential_conjugate_gradient(const rnnid_potential* potential, const double* y,
                                                          size_t n, double* out);

/* Systems. beta <= 0 selects the default normalizer. */
RNNID_API rnnid_status rnnid_system_sample(size_t n, size_t p, double spectral_alpha,
                                           const rnnid_potential* potential, uint64_t seed, double beta,
                                           rnnid_system** out);
RNNID_API void rnnid_system_free(rnnid_system* system);
RNNID_API rnnid_status rnnid_system_dims(const rnnid_system* system, size_t* n, size_t* p);
RNNID_API rnnid_status rnnid_system_beta(const rnnid_system* system, double* beta);
/* a: n x n, b: n x p, c_star: n x (n + p). */
RNNID_API rnnid_status rnnid_system_matrices(const rnnid_system* system, double* a, double* b);
RNNID_API rnnid_status rnnid_system_c_star(const rnnid_system* system, double* c_star);

/* Trajectories. inputs is p x horizon. */
RNNID_API rnnid_status rnnid_trajectory_simulate(const rnnid_system* system, const rnnid_potential* potential,
                                                 const double* inputs, size_t horizon, rnnid_trajectory** out);
RNNID_API rnnid_status rnnid_trajectory_sample(const rnnid_system* system, const rnnid_potential* potential,
                                               rnnid_input_law law, size_t horizon, uint64_t seed,
                                               rnnid_trajectory** out);
RNNID_API void rnnid_trajectory_free(rnnid_trajectory* trajectory);
RNNID_API rnnid_status rnnid_trajectory_horizon(const rnnid_trajectory* trajectory, size_t* horizon);
/* states: n x (horizon + 1), starting at x_0 = 0. */
RNNID_API rnnid_status rnnid_trajectory_states(const rnnid_trajectory* trajectory, double* states);
RNNID_API rnnid_status rnnid_trajectory_gram_min_eig(const rnnid_trajectory* trajectory, double* lambda_min);

/* Estimation. c_out is n x (n + p); reference_c may be NULL. Any of
 * iterations / rel_error may be NULL; rel_error needs reference_c. */
RNNID_API void rnnid_solver_options_default(rnnid_solver_options* options);
RNNID_API rnnid_status rnnid_agm_solve(const rnnid_trajectory* trajectory, const rnnid_potential* potential,
                                       const rnnid_solver_options* options, const double* reference_c,
                                       double* c_out, int* iterations, double* rel_error);
RNNID_API rnnid_status rnnid_ls_solve(const rnnid_trajectory* trajectory, const rnnid_potential* potential,
                                      double* c_out);

/* Experiment configs */
RNNID_API rnnid_status rnnid_config_default(rnnid_config** out);
RNNID_API rnnid_status rnnid_config_load(const char* path, rnnid_config** out);
RNNID_API rnnid_status rnnid_config_from_json(const char* json, rnnid_config** out);
RNNID_API void rnnid_config_free(rnnid_config* config);
/* name is "quick" or "paper". */
RNNID_API rnnid_status rnnid_config_apply_profile(rnnid_config* config, const char* name);
RNNID_API rnnid_status rnnid_config_set_trials(rnnid_config* config, int trials);
RNNID_API rnnid_status rnnid_config_set_seed(rnnid_config* config, uint64_t seed);
RNNID_API rnnid_status rnnid_config_set_output_dir(rnnid_config* config, const char* dir);

/* String results are copied into buf (NUL-terminated) when capacity allows;
 * *needed receives the full length including the terminator. */
RNNID_API rnnid_status rnnid_config_to_json(const rnnid_config* config, char* buf, size_t capacity,
                                            size_t* needed);
/* Theory report (JSON) for the system of the config's last trial. */
RNNID_API rnnid_status rnnid_theory_report_json(const rnnid_config* config, char* buf, size_t capacity,
                                                size_t* needed);

/* Experiments. threads = 0 uses all hardware threads. */
RNNID_API rnnid_status rnnid_experiment_run(const rnnid_config* config, unsigned threads, rnnid_result** out);
RNNID_API void rnnid_result_free(rnnid_result* result);
/* dir may be NULL to use the config's output_dir. */
RNNID_API rnnid_status rnnid_result_write(const rnnid_result* result, const char* dir);
RNNID_API rnnid_status rnnid_result_iterations(const rnnid_result* result, size_t* iterations);
/* Each array holds rnnid_result_iterations() values; any may be NULL. */
RNNID_API rnnid_status rnnid_result_quantiles(const rnnid_result* result, double* median, double* q10, double* q90);
RNNID_API rnnid_status rnnid_result_trial_summary(const rnnid_result* result, size_t* trials, size_t* converged,
                                                  size_t* diverged);

/* Full (spectral_alpha, rho) grid. model is "gaussian" or "heavy", profile
 * "quick" or "paper"; trials <= 0 and seed == NULL keep the profile values. */
RNNID_API rnnid_status rnnid_grid_run(const char* model, const char* profile, int trials, const uint64_t* seed,
                                      unsigned threads, const char* output_dir);

#ifdef __cplusplus
}
#endif

#endif
