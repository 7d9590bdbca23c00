#ifndef ENTROPIC_RICCI_H
#define ENTROPIC_RICCI_H

/* Transport metric, entropic Ricci curvature and functional inequalities
 * for finite reversible Markov chains. */

#if defined _WIN32 || defined __CYGWIN__
#ifdef ENTROPIC_RICCI_BUILDING
#define ER_API __declspec(dllexport)
#else
#define ER_API __declspec(dllimport)
#endif
#else
#define ER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum er_status {
    ER_OK = 0,
    ER_NOT_STOCHASTIC = 1,
    ER_NOT_IRREDUCIBLE = 2,
    ER_NOT_REVERSIBLE = 3,
    ER_BAD_SPEC = 4,
    ER_BAD_LAMBDA = 5,
    ER_WEIGHT_SUM = 6,
    ER_EMPTY_PRODUCT = 7,
    ER_GENERATOR_MISMATCH = 8,
    ER_NO_INVERSE = 9,
    ER_REVERSIBILITY_FAIL = 10,
    ER_NEGATIVE_INPUT = 11,
    ER_BOUNDARY_DERIVATIVE = 12,
    ER_QUADRATURE_FAIL = 13,
    ER_SHAPE_MISMATCH = 14,
    ER_SOLVER_DIVERGED = 15,
    ER_INFEASIBLE = 16,
    ER_LP_FAIL = 17,
    ER_BOUNDARY_STATE = 18,
    ER_LEFT_INTERIOR = 19,
    ER_STEP_REJECTED = 20,
    ER_NO_CONVERGENCE = 21,
    ER_BOUNDARY_DENSITY = 22,
    ER_OPT_FAIL = 23,
    ER_BAD_RATE = 24,
    ER_EIG_FAIL = 25,
    ER_INVALID_DENSITY = 26,
    ER_INVALID_ARGUMENT = 27,
    ER_IO = 28,
    ER_INTERNAL = 29
} er_status;

typedef struct er_chain er_chain;

/* Name of a status code, e.g. "NotStochastic". Static storage. */
ER_API const char* er_status_name(er_status status);
/* Message of the last failing call on this thread; empty if none. */
ER_API const char* er_last_error_message(void);

/* Chains. Constructors return a new handle through `out`, released with er_chain_free. */
ER_API er_status er_chain_from_builtin(const char* spec, er_chain** out);
ER_API er_status er_chain_from_json(const char* text, er_chain** out);
/* Row-major n x n kernel; pi may be NULL to compute the stationary vector. */
ER_API er_status er_chain_from_kernel(int n, const double* kernel, const double* pi, er_chain** out);
ER_API er_status er_chain_lazy(const er_chain* chain, double lambda, er_chain** out);
ER_API er_status er_chain_product(const er_chain* const* chains, const double* alpha, int count, er_chain** out);
ER_API void er_chain_free(er_chain* chain);
ER_API int er_chain_size(const er_chain* chain);
/* Copies pi into out[0..len); len must equal the chain size. */
ER_API er_status er_chain_pi(const er_chain* chain, double* out, int len);

/* "uniform", "dirac:<state>", or a JSON array of density values. */
ER_API er_status er_parse_density(const er_chain* chain, const char* text, double* out, int len);

/* W estimate between two densities on a time grid; converged is set to 0 or 1.
 * Returns ER_SOLVER_DIVERGED (with w_est still written) if the solver did not converge. */
ER_API er_status er_solve_w(const er_chain* chain, const double* rho0, const double* rho1, int grid, double tol,
                            double* w_est, int* converged);
/* Smallest nonzero eigenvalue of I - K. */
ER_API er_status er_poincare_lambda(const er_chain* chain, double* out);
/* c = int_{-1}^{1} dr / sqrt(2 theta(1-r, 1+r)). */
ER_API er_status er_theta_constant(double* out);
/* Logarithmic mean (s - t) / (log s - log t), 0 on the boundary. */
ER_API er_status er_log_mean(double s, double t, double* out);

/* JSON reports. `options` is a JSON object or NULL; recognised keys:
 *   grid, tol, max_iterations, restarts, samples, seed, kappa, estimate, shoot,
 *   densities, transport_samples, lipschitz_functions, workers.
 * On success or non-convergence the report is returned through `out` and must be
 * released with er_string_free. Non-convergence yields ER_SOLVER_DIVERGED,
 * ER_NO_CONVERGENCE or ER_OPT_FAIL together with a report flagging the failure. */
ER_API er_status er_chain_summary_json(const er_chain* chain, char** out);
ER_API er_status er_distance_json(const er_chain* chain, const char* from, const char* to, const char* options,
                                  char** out);
ER_API er_status er_geodesic_json(const er_chain* chain, const char* from, const char* to, const char* options,
                                  char** out);
ER_API er_status er_curvature_json(const er_chain* chain, const char* options, char** out);
ER_API er_status er_inequalities_json(const er_chain* chain, const char* options, char** out);
/* `from` and `to` may both be NULL to skip the distance section. */
ER_API er_status er_report_json(const er_chain* chain, const char* from, const char* to, const char* options,
                                char** out);
/* Projects a report produced by the functions above to CSV. */
ER_API er_status er_report_csv(const char* command, const char* report_json, char** out);
ER_API void er_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
