/* C interface for the phase-type observation library.
 *
 * All functions returning pa_status set a thread-local error message
 * retrievable via pa_last_error() on failure. Handles are opaque and must be
 * released with their matching *_free function. Phases are 1-based.
 */
#ifndef PHASEAGE_H
#define PHASEAGE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PA_OK = 0,
  PA_ERR_INVALID_ARGUMENT = 1,
  PA_ERR_INVALID_MODEL = 2,
  PA_ERR_SINGULAR = 3,
  PA_ERR_CONDITIONING = 4,
  PA_ERR_UNSUPPORTED = 5,
  PA_ERR_NUMERIC = 6,
  PA_ERR_INSUFFICIENT_ACCEPTANCE = 7,
  PA_ERR_IO = 8
} pa_status;

/* Observation schemes. kind selects which extra field is read:
 * PA_SCHEME_POISSON reads gamma, PA_SCHEME_UNIFORM reads horizon. */
enum { PA_SCHEME_BIRTH = 0, PA_SCHEME_POISSON = 1, PA_SCHEME_UNIFORM = 2, PA_SCHEME_RARE = 3 };

typedef struct {
  int kind;
  double gamma;   /* observation rate, Poisson scheme */
  double horizon; /* observation window length t, uniform scheme */
} pa_scheme;

typedef struct pa_model pa_model;
typedef struct pa_dist pa_dist;
typedef struct pa_empirical pa_empirical;
typedef struct pa_table pa_table;

const char* pa_version(void);
const char* pa_last_error(void); /* message from the last failing call on this thread */
const char* pa_status_name(pa_status status);

/* ---- Models ---- */

/* alpha: length m; q: row-major m*m sub-generator. */
pa_status pa_model_create(const double* alpha, const double* q, int m, pa_model** out);
/* lambdas: length m total rates; continue_probs: length m-1. */
pa_status pa_model_coxian(const double* lambdas, const double* continue_probs, int m,
                          pa_model** out);
/* JSON file with either {"alpha":[...],"Q":[[...]]} or
 * {"lambdas":[...],"continue_probs":[...]}. */
pa_status pa_model_load_json(const char* path, pa_model** out);
/* Sub-model on phases 1..j of a Coxian model. */
pa_status pa_model_restrict_prefix(const pa_model* model, int j, pa_model** out);
void pa_model_free(pa_model* model);

int pa_model_dim(const pa_model* model);
int pa_model_is_coxian(const pa_model* model);
pa_status pa_model_phase_rate(const pa_model* model, int j, double* out);
pa_status pa_model_mean_lifetime(const pa_model* model, double* out);
pa_status pa_model_lifetime_cdf(const pa_model* model, double x, double* out);
pa_status pa_model_lifetime_density(const pa_model* model, double x, double* out);
/* P[alive at x and in phase j]. */
pa_status pa_model_phase_probability(const pa_model* model, double x, int j, double* out);
/* One-year conditional death probability at integer age x. */
pa_status pa_model_mortality(const pa_model* model, int x, double* out);

/* ---- Conditional laws at a single observation ---- */

/* P[alive and in phase j at the observation] (long-run weight for the
 * stationary schemes). */
pa_status pa_phase_observation_probability(const pa_model* model, pa_scheme scheme, int j,
                                           double* out);

pa_status pa_age_distribution(const pa_model* model, pa_scheme scheme, int phase, pa_dist** out);
pa_status pa_entry_time_distribution(const pa_model* model, pa_scheme scheme, int phase,
                                     pa_dist** out);
pa_status pa_sojourn_distribution(const pa_model* model, pa_scheme scheme, int phase,
                                  pa_dist** out);

/* ---- Conditional laws for an observed phase sequence (Poisson scheme) ---- */

/* Age at the k-th observation given the first k observations saw seq[0..k-1]
 * (all alive). k >= 2. */
pa_status pa_multi_age_distribution(const pa_model* model, double gamma, const int* seq, int k,
                                    pa_dist** out);
/* Lifetime given k alive observations of seq[0..k-1] and death before the
 * next observation. */
pa_status pa_multi_lifetime_distribution(const pa_model* model, double gamma, const int* seq,
                                         int k, pa_dist** out);

pa_status pa_dist_cdf(const pa_dist* dist, double x, double* out);
pa_status pa_dist_density(const pa_dist* dist, double x, double* out);
double pa_dist_atom(const pa_dist* dist); /* point mass at 0 */
int pa_dist_has_support_bound(const pa_dist* dist);
double pa_dist_support_bound(const pa_dist* dist);
int pa_dist_is_exponential(const pa_dist* dist);
double pa_dist_exponential_rate(const pa_dist* dist);
/* Probability of the conditioning observation event itself (sequence laws). */
int pa_dist_has_sequence_probability(const pa_dist* dist);
double pa_dist_sequence_probability(const pa_dist* dist);
void pa_dist_free(pa_dist* dist);

/* ---- Age pyramid ---- */

/* P[age in [x, x+width) | phase j] under the stationary age law;
 * width <= 0 selects the open-ended class [x, inf). */
pa_status pa_age_class_probability(const pa_model* model, int j, double x, double width,
                                   double* out);
/* fp: length m phase frequencies; class_starts: length n_classes increasing
 * from 0 (last class open-ended); out_freqs: length n_classes. */
pa_status pa_pyramid(const pa_model* model, const double* fp, const double* class_starts,
                     int n_classes, double* out_freqs);
/* Reads `phase,frequency` CSV with exactly m rows into out (length m). */
pa_status pa_load_phase_frequencies(const char* path, int m, double* out);

/* ---- Mortality tables and Coxian fitting ---- */

pa_status pa_table_create(const double* rates, int n, pa_table** out);
pa_status pa_table_load_csv(const char* path, pa_table** out);
int pa_table_size(const pa_table* table);
double pa_table_rate(const pa_table* table, int i); /* 0-based class index */
void pa_table_free(pa_table* table);

/* Weighted squared-error objective for Coxian parameters against a table. */
pa_status pa_objective(const double* lambdas, const double* continue_probs, int m,
                       const pa_table* table, double* out);

typedef struct {
  int starts;                  /* multi-start count (>=1) */
  unsigned long long seed;     /* jitter seed */
  long long max_evals;         /* objective evaluations per start */
  double tol;                  /* simplex diameter tolerance */
} pa_fit_options;

/* warm_lambdas/warm_continue_probs may both be NULL; when given they supply
 * one additional start. Outputs: out_lambdas length m, out_continue_probs
 * length m-1. out_iterations/out_converged may be NULL. */
pa_status pa_fit_coxian(const pa_table* table, int m, const pa_fit_options* options,
                        const double* warm_lambdas, const double* warm_continue_probs,
                        double* out_lambdas, double* out_continue_probs, double* out_objective,
                        long long* out_iterations, int* out_converged);

/* ---- Monte Carlo oracle ---- */

enum {
  PA_TARGET_AGE = 0,
  PA_TARGET_ENTRY_TIME = 1,
  PA_TARGET_SOJOURN = 2,
  PA_TARGET_MULTI_AGE = 3,
  PA_TARGET_MULTI_LIFETIME = 4
};

typedef struct {
  long long replications;  /* raw replications (accepted paths for multi targets) */
  unsigned long long seed;
  int batch;               /* worker threads; 0 = PA_THREADS env or hardware count */
  long long min_accepted;  /* acceptance guard for single-observation targets */
} pa_sim_options;

/* seq/seq_len are read only for the multi targets; terminal_death must be 1
 * for PA_TARGET_MULTI_LIFETIME and 0 for PA_TARGET_MULTI_AGE. */
pa_status pa_simulate(const pa_model* model, pa_scheme scheme, int target, int phase,
                      const int* seq, int seq_len, int terminal_death,
                      const pa_sim_options* options, pa_empirical** out);

/* Fraction of simulated lives whose first observations match seq (and whose
 * next observation finds death when terminal_death). */
pa_status pa_sequence_frequency(const pa_model* model, double gamma, const int* seq, int seq_len,
                                int terminal_death, long long replications,
                                unsigned long long seed, int batch, double* out);

long long pa_empirical_accepted(const pa_empirical* emp);
long long pa_empirical_total(const pa_empirical* emp);
double pa_empirical_atom_fraction(const pa_empirical* emp);
double pa_empirical_mean(const pa_empirical* emp);
double pa_empirical_band_epsilon(const pa_empirical* emp); /* 0.99 confidence half-width */
/* Empirical cdf at x with the confidence band clamped to [0,1]. lo/hi may be
 * NULL. */
pa_status pa_empirical_cdf(const pa_empirical* emp, double x, double* cdf, double* lo, double* hi);
void pa_empirical_free(pa_empirical* emp);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PHASEAGE_H */
