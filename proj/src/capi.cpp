#include "phaseage.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"
#include "fit.hpp"
#include "model_io.hpp"
#include "multi.hpp"
#include "ph_model.hpp"
#include "pyramid.hpp"
#include "schemes.hpp"
#include "simulate.hpp"

struct pa_model {
  phaseage::PhaseTypeDistribution ph;
  std::optional<phaseage::CoxianParameters> cox;
};

struct pa_dist {
  phaseage::MixedDistribution mixed;
  std::optional<double> seq_prob;
};

struct pa_empirical {
  phaseage::EmpiricalCdf e;
};

struct pa_table {
  phaseage::MortalityTable t;
};

namespace {

thread_local std::string g_last_error;

pa_status map_code(phaseage::ErrorCode c) {
  using phaseage::ErrorCode;
  switch (c) {
    case ErrorCode::invalid_argument: return PA_ERR_INVALID_ARGUMENT;
    case ErrorCode::invalid_model: return PA_ERR_INVALID_MODEL;
    case ErrorCode::singular: return PA_ERR_SINGULAR;
    case ErrorCode::conditioning: return PA_ERR_CONDITIONING;
    case ErrorCode::unsupported: return PA_ERR_UNSUPPORTED;
    case ErrorCode::numeric: return PA_ERR_NUMERIC;
    case ErrorCode::insufficient_acceptance: return PA_ERR_INSUFFICIENT_ACCEPTANCE;
    case ErrorCode::io: return PA_ERR_IO;
  }
  return PA_ERR_NUMERIC;
}

template <typename F>
pa_status wrap(F&& f) {
  try {
    f();
    return PA_OK;
  } catch (const phaseage::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PA_ERR_NUMERIC;
  }
}

pa_status arg_error(const std::string& msg) {
  g_last_error = msg;
  return PA_ERR_INVALID_ARGUMENT;
}

phaseage::ObservationScheme to_scheme(const pa_scheme& s) {
  switch (s.kind) {
    case PA_SCHEME_BIRTH: return phaseage::PoissonBirth{};
    case PA_SCHEME_POISSON: return phaseage::PoissonObservation{s.gamma};
    case PA_SCHEME_UNIFORM: return phaseage::UniformObservation{s.horizon};
    case PA_SCHEME_RARE: return phaseage::RareLimit{};
    default:
      phaseage::fail(phaseage::ErrorCode::invalid_argument,
                     "unknown observation scheme kind " + std::to_string(s.kind));
  }
}

pa_dist* make_dist(phaseage::MixedDistribution mixed, std::optional<double> seq_prob = {}) {
  return new pa_dist{std::move(mixed), seq_prob};
}

phaseage::MixedDistribution from_multi(const phaseage::MultiObsResult& r) {
  phaseage::MixedDistribution d;
  d.atom_at_zero = 0.0;
  d.cdf = r.cdf;
  d.density = r.density;
  return d;
}

}  // namespace

extern "C" {

const char* pa_version(void) { return "0.1.0"; }

const char* pa_last_error(void) { return g_last_error.c_str(); }

const char* pa_status_name(pa_status status) {
  switch (status) {
    case PA_OK: return "PA_OK";
    case PA_ERR_INVALID_ARGUMENT: return "PA_ERR_INVALID_ARGUMENT";
    case PA_ERR_INVALID_MODEL: return "PA_ERR_INVALID_MODEL";
    case PA_ERR_SINGULAR: return "PA_ERR_SINGULAR";
    case PA_ERR_CONDITIONING: return "PA_ERR_CONDITIONING";
    case PA_ERR_UNSUPPORTED: return "PA_ERR_UNSUPPORTED";
    case PA_ERR_NUMERIC: return "PA_ERR_NUMERIC";
    case PA_ERR_INSUFFICIENT_ACCEPTANCE: return "PA_ERR_INSUFFICIENT_ACCEPTANCE";
    case PA_ERR_IO: return "PA_ERR_IO";
  }
  return "PA_ERR_UNKNOWN";
}

pa_status pa_model_create(const double* alpha, const double* q, int m, pa_model** out) {
  if (!alpha || !q || !out || m < 1) return arg_error("pa_model_create: bad arguments");
  return wrap([&] {
    phaseage::Vec a(alpha, alpha + m);
    phaseage::Matrix qm(static_cast<size_t>(m), static_cast<size_t>(m));
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) qm(r, c) = q[static_cast<size_t>(r) * m + c];
    *out = new pa_model{phaseage::validate(a, qm), std::nullopt};
  });
}

pa_status pa_model_coxian(const double* lambdas, const double* continue_probs, int m,
                          pa_model** out) {
  if (!lambdas || !out || m < 1 || (m > 1 && !continue_probs))
    return arg_error("pa_model_coxian: bad arguments");
  return wrap([&] {
    phaseage::CoxianParameters p;
    p.lambdas.assign(lambdas, lambdas + m);
    if (m > 1) p.continue_probs.assign(continue_probs, continue_probs + (m - 1));
    *out = new pa_model{phaseage::coxian(p), std::move(p)};
  });
}

pa_status pa_model_load_json(const char* path, pa_model** out) {
  if (!path || !out) return arg_error("pa_model_load_json: bad arguments");
  return wrap([&] {
    phaseage::LoadedModel lm = phaseage::load_model_json(path);
    *out = new pa_model{std::move(lm.ph), std::move(lm.coxian_params)};
  });
}

pa_status pa_model_restrict_prefix(const pa_model* model, int j, pa_model** out) {
  if (!model || !out) return arg_error("pa_model_restrict_prefix: bad arguments");
  return wrap([&] {
    *out = new pa_model{phaseage::restrict_to_prefix(model->ph, j), std::nullopt};
  });
}

void pa_model_free(pa_model* model) { delete model; }

int pa_model_dim(const pa_model* model) { return model ? model->ph.m : 0; }

int pa_model_is_coxian(const pa_model* model) {
  return model && phaseage::is_coxian(model->ph) ? 1 : 0;
}

pa_status pa_model_phase_rate(const pa_model* model, int j, double* out) {
  if (!model || !out) return arg_error("pa_model_phase_rate: bad arguments");
  return wrap([&] {
    phaseage::require(j >= 1 && j <= model->ph.m, phaseage::ErrorCode::invalid_argument,
                      "phase out of range");
    *out = model->ph.rate(j);
  });
}

pa_status pa_model_mean_lifetime(const pa_model* model, double* out) {
  if (!model || !out) return arg_error("pa_model_mean_lifetime: bad arguments");
  return wrap([&] { *out = phaseage::mean_lifetime(model->ph); });
}

pa_status pa_model_lifetime_cdf(const pa_model* model, double x, double* out) {
  if (!model || !out) return arg_error("pa_model_lifetime_cdf: bad arguments");
  return wrap([&] { *out = phaseage::lifetime_cdf(model->ph, x); });
}

pa_status pa_model_lifetime_density(const pa_model* model, double x, double* out) {
  if (!model || !out) return arg_error("pa_model_lifetime_density: bad arguments");
  return wrap([&] { *out = phaseage::lifetime_density(model->ph, x); });
}

pa_status pa_model_phase_probability(const pa_model* model, double x, int j, double* out) {
  if (!model || !out) return arg_error("pa_model_phase_probability: bad arguments");
  return wrap([&] { *out = phaseage::phase_probability(model->ph, x, j); });
}

pa_status pa_model_mortality(const pa_model* model, int x, double* out) {
  if (!model || !out) return arg_error("pa_model_mortality: bad arguments");
  return wrap([&] { *out = phaseage::model_mortality(model->ph, x); });
}

pa_status pa_phase_observation_probability(const pa_model* model, pa_scheme scheme, int j,
                                           double* out) {
  if (!model || !out) return arg_error("pa_phase_observation_probability: bad arguments");
  return wrap([&] {
    *out = phaseage::phase_observation_probability(model->ph, to_scheme(scheme), j);
  });
}

pa_status pa_age_distribution(const pa_model* model, pa_scheme scheme, int phase, pa_dist** out) {
  if (!model || !out) return arg_error("pa_age_distribution: bad arguments");
  return wrap([&] {
    *out = make_dist(phaseage::age_given_phase(model->ph, to_scheme(scheme), phase));
  });
}

pa_status pa_entry_time_distribution(const pa_model* model, pa_scheme scheme, int phase,
                                     pa_dist** out) {
  if (!model || !out) return arg_error("pa_entry_time_distribution: bad arguments");
  return wrap([&] {
    *out = make_dist(phaseage::entry_time_given_phase(model->ph, to_scheme(scheme), phase));
  });
}

pa_status pa_sojourn_distribution(const pa_model* model, pa_scheme scheme, int phase,
                                  pa_dist** out) {
  if (!model || !out) return arg_error("pa_sojourn_distribution: bad arguments");
  return wrap([&] {
    *out = make_dist(phaseage::sojourn_given_phase(model->ph, to_scheme(scheme), phase));
  });
}

pa_status pa_multi_age_distribution(const pa_model* model, double gamma, const int* seq, int k,
                                    pa_dist** out) {
  if (!model || !seq || !out || k < 1) return arg_error("pa_multi_age_distribution: bad arguments");
  return wrap([&] {
    phaseage::PhaseSequence ps{std::vector<int>(seq, seq + k), false};
    phaseage::MultiObsResult r = phaseage::age_at_kth_observation(model->ph, gamma, ps);
    *out = make_dist(from_multi(r), r.sequence_probability);
  });
}

pa_status pa_multi_lifetime_distribution(const pa_model* model, double gamma, const int* seq,
                                         int k, pa_dist** out) {
  if (!model || !seq || !out || k < 1)
    return arg_error("pa_multi_lifetime_distribution: bad arguments");
  return wrap([&] {
    phaseage::PhaseSequence ps{std::vector<int>(seq, seq + k), true};
    phaseage::MultiObsResult r = phaseage::lifetime_given_death_at_next(model->ph, gamma, ps);
    *out = make_dist(from_multi(r), r.sequence_probability);
  });
}

pa_status pa_dist_cdf(const pa_dist* dist, double x, double* out) {
  if (!dist || !out) return arg_error("pa_dist_cdf: bad arguments");
  return wrap([&] { *out = dist->mixed.cdf(x); });
}

pa_status pa_dist_density(const pa_dist* dist, double x, double* out) {
  if (!dist || !out) return arg_error("pa_dist_density: bad arguments");
  return wrap([&] { *out = dist->mixed.density(x); });
}

double pa_dist_atom(const pa_dist* dist) { return dist ? dist->mixed.atom_at_zero : 0.0; }

int pa_dist_has_support_bound(const pa_dist* dist) {
  return dist && dist->mixed.support_bound ? 1 : 0;
}

double pa_dist_support_bound(const pa_dist* dist) {
  return dist && dist->mixed.support_bound ? *dist->mixed.support_bound : 0.0;
}

int pa_dist_is_exponential(const pa_dist* dist) {
  return dist && dist->mixed.is_exponential ? 1 : 0;
}

double pa_dist_exponential_rate(const pa_dist* dist) {
  return dist ? dist->mixed.exponential_rate : 0.0;
}

int pa_dist_has_sequence_probability(const pa_dist* dist) {
  return dist && dist->seq_prob ? 1 : 0;
}

double pa_dist_sequence_probability(const pa_dist* dist) {
  return dist && dist->seq_prob ? *dist->seq_prob : 0.0;
}

void pa_dist_free(pa_dist* dist) { delete dist; }

pa_status pa_age_class_probability(const pa_model* model, int j, double x, double width,
                                   double* out) {
  if (!model || !out) return arg_error("pa_age_class_probability: bad arguments");
  return wrap([&] {
    std::optional<double> w;
    if (width > 0.0) w = width;
    *out = phaseage::age_class_probability(model->ph, j, x, w);
  });
}

pa_status pa_pyramid(const pa_model* model, const double* fp, const double* class_starts,
                     int n_classes, double* out_freqs) {
  if (!model || !fp || !out_freqs) return arg_error("pa_pyramid: bad arguments");
  if (n_classes < 1 && class_starts) return arg_error("pa_pyramid: bad class count");
  return wrap([&] {
    phaseage::PhaseFrequencies freqs;
    freqs.freqs.assign(fp, fp + model->ph.m);
    std::vector<double> starts;
    if (class_starts) starts.assign(class_starts, class_starts + n_classes);
    phaseage::AgePyramid pyr = phaseage::compute_pyramid(model->ph, freqs, starts);
    std::copy(pyr.freqs.begin(), pyr.freqs.end(), out_freqs);
  });
}

pa_status pa_load_phase_frequencies(const char* path, int m, double* out) {
  if (!path || !out || m < 1) return arg_error("pa_load_phase_frequencies: bad arguments");
  return wrap([&] {
    phaseage::PhaseFrequencies fp = phaseage::load_phase_frequencies_csv(path);
    phaseage::require(fp.freqs.size() == static_cast<size_t>(m), phaseage::ErrorCode::io,
                      "phase frequency file has " + std::to_string(fp.freqs.size()) +
                          " rows, expected " + std::to_string(m));
    std::copy(fp.freqs.begin(), fp.freqs.end(), out);
  });
}

pa_status pa_table_create(const double* rates, int n, pa_table** out) {
  if (!rates || !out || n < 1) return arg_error("pa_table_create: bad arguments");
  return wrap([&] {
    phaseage::MortalityTable t;
    for (int i = 0; i < n; ++i) {
      t.class_starts.push_back(static_cast<double>(i));
      t.rates.push_back(rates[i]);
    }
    phaseage::validate(t);
    *out = new pa_table{std::move(t)};
  });
}

pa_status pa_table_load_csv(const char* path, pa_table** out) {
  if (!path || !out) return arg_error("pa_table_load_csv: bad arguments");
  return wrap([&] { *out = new pa_table{phaseage::load_mortality_csv(path)}; });
}

int pa_table_size(const pa_table* table) {
  return table ? static_cast<int>(table->t.rates.size()) : 0;
}

double pa_table_rate(const pa_table* table, int i) {
  if (!table || i < 0 || i >= static_cast<int>(table->t.rates.size())) return 0.0;
  return table->t.rates[static_cast<size_t>(i)];
}

void pa_table_free(pa_table* table) { delete table; }

pa_status pa_objective(const double* lambdas, const double* continue_probs, int m,
                       const pa_table* table, double* out) {
  if (!lambdas || !table || !out || m < 1 || (m > 1 && !continue_probs))
    return arg_error("pa_objective: bad arguments");
  return wrap([&] {
    phaseage::CoxianParameters p;
    p.lambdas.assign(lambdas, lambdas + m);
    if (m > 1) p.continue_probs.assign(continue_probs, continue_probs + (m - 1));
    *out = phaseage::objective_F(p, table->t);
  });
}

pa_status pa_fit_coxian(const pa_table* table, int m, const pa_fit_options* options,
                        const double* warm_lambdas, const double* warm_continue_probs,
                        double* out_lambdas, double* out_continue_probs, double* out_objective,
                        long long* out_iterations, int* out_converged) {
  if (!table || !out_lambdas || !out_objective || m < 1 || (m > 1 && !out_continue_probs))
    return arg_error("pa_fit_coxian: bad arguments");
  if ((warm_lambdas == nullptr) != (warm_continue_probs == nullptr) && m > 1)
    return arg_error("pa_fit_coxian: warm start needs both parameter arrays");
  return wrap([&] {
    phaseage::FitOptions opts;
    if (options) {
      opts.starts = options->starts;
      opts.seed = options->seed;
      opts.max_evals = options->max_evals;
      opts.tol = options->tol;
    }
    if (warm_lambdas) {
      phaseage::CoxianParameters warm;
      warm.lambdas.assign(warm_lambdas, warm_lambdas + m);
      if (m > 1) warm.continue_probs.assign(warm_continue_probs, warm_continue_probs + (m - 1));
      opts.extra_starts.push_back(std::move(warm));
    }
    phaseage::FitResult r = phaseage::fit_coxian(table->t, m, opts);
    std::copy(r.params.lambdas.begin(), r.params.lambdas.end(), out_lambdas);
    if (m > 1)
      std::copy(r.params.continue_probs.begin(), r.params.continue_probs.end(),
                out_continue_probs);
    *out_objective = r.objective_value;
    if (out_iterations) *out_iterations = r.iterations;
    if (out_converged) *out_converged = r.converged ? 1 : 0;
  });
}

pa_status pa_simulate(const pa_model* model, pa_scheme scheme, int target, int phase,
                      const int* seq, int seq_len, int terminal_death,
                      const pa_sim_options* options, pa_empirical** out) {
  if (!model || !out) return arg_error("pa_simulate: bad arguments");
  return wrap([&] {
    phaseage::SimulationConfig cfg;
    if (options) {
      cfg.replications = options->replications;
      cfg.seed = options->seed;
      cfg.batch = options->batch;
      cfg.min_accepted = options->min_accepted;
    }
    cfg.scheme = to_scheme(scheme);
    phaseage::SimTarget t;
    switch (target) {
      case PA_TARGET_AGE: t = phaseage::SimTarget::age; break;
      case PA_TARGET_ENTRY_TIME: t = phaseage::SimTarget::entry_time; break;
      case PA_TARGET_SOJOURN: t = phaseage::SimTarget::sojourn; break;
      case PA_TARGET_MULTI_AGE: t = phaseage::SimTarget::multi_age; break;
      case PA_TARGET_MULTI_LIFETIME: t = phaseage::SimTarget::multi_lifetime; break;
      default:
        phaseage::fail(phaseage::ErrorCode::invalid_argument,
                       "unknown simulation target " + std::to_string(target));
    }
    if (t == phaseage::SimTarget::multi_age || t == phaseage::SimTarget::multi_lifetime) {
      phaseage::require(seq != nullptr && seq_len >= 1, phaseage::ErrorCode::invalid_argument,
                        "multi targets need a phase sequence");
      phaseage::PhaseSequence ps{std::vector<int>(seq, seq + seq_len), terminal_death != 0};
      *out = new pa_empirical{phaseage::empirical_conditional(cfg, model->ph, t, 0, &ps)};
    } else {
      *out = new pa_empirical{phaseage::empirical_conditional(cfg, model->ph, t, phase)};
    }
  });
}

pa_status pa_sequence_frequency(const pa_model* model, double gamma, const int* seq, int seq_len,
                                int terminal_death, long long replications,
                                unsigned long long seed, int batch, double* out) {
  if (!model || !seq || !out || seq_len < 1)
    return arg_error("pa_sequence_frequency: bad arguments");
  return wrap([&] {
    phaseage::SimulationConfig cfg;
    cfg.replications = replications;
    cfg.seed = seed;
    cfg.batch = batch;
    cfg.scheme = phaseage::PoissonObservation{gamma};
    phaseage::PhaseSequence ps{std::vector<int>(seq, seq + seq_len), terminal_death != 0};
    *out = phaseage::sequence_frequency(cfg, model->ph, ps);
  });
}

long long pa_empirical_accepted(const pa_empirical* emp) { return emp ? emp->e.accepted : 0; }

long long pa_empirical_total(const pa_empirical* emp) {
  return emp ? emp->e.total_replications : 0;
}

double pa_empirical_atom_fraction(const pa_empirical* emp) {
  return emp ? emp->e.atom_fraction() : 0.0;
}

double pa_empirical_mean(const pa_empirical* emp) { return emp ? emp->e.mean() : 0.0; }

double pa_empirical_band_epsilon(const pa_empirical* emp) {
  return emp ? emp->e.band_epsilon() : 1.0;
}

pa_status pa_empirical_cdf(const pa_empirical* emp, double x, double* cdf, double* lo,
                           double* hi) {
  if (!emp || !cdf) return arg_error("pa_empirical_cdf: bad arguments");
  return wrap([&] {
    double f = emp->e.eval(x);
    double eps = emp->e.band_epsilon();
    *cdf = f;
    if (lo) *lo = std::max(0.0, f - eps);
    if (hi) *hi = std::min(1.0, f + eps);
  });
}

void pa_empirical_free(pa_empirical* emp) { delete emp; }

}  // extern "C"
