#include "schemes.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace phaseage {

namespace {

constexpr double kConditioningThreshold = 1e-14;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

void check_phase(const PhaseTypeDistribution& ph, int j) {
  require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument, "phase index out of range");
}

void check_scheme(const ObservationScheme& scheme) {
  if (const auto* p = std::get_if<PoissonObservation>(&scheme))
    require(std::isfinite(p->gamma) && p->gamma > 0.0, ErrorCode::invalid_argument,
            "observation rate gamma must be positive and finite");
  if (const auto* u = std::get_if<UniformObservation>(&scheme))
    require(std::isfinite(u->horizon_t) && u->horizon_t > 0.0, ErrorCode::invalid_argument,
            "observation horizon t must be positive and finite");
}

[[noreturn]] void conditioning_error(int j, double p) {
  std::ostringstream os;
  os << "phase " << j << " is observed with probability " << p
     << " (below 1e-14): cannot condition on a null event";
  fail(ErrorCode::conditioning, os.str());
}

// (Q + lambda_j I) e_j: column j of Q with the diagonal entry cancelled.
Vec q_column_plus_rate(const PhaseTypeDistribution& ph, int j) {
  Vec v(static_cast<size_t>(ph.m), 0.0);
  for (int i = 0; i < ph.m; ++i) v[i] = ph.Q(i, j - 1);
  v[j - 1] += ph.rate(j);
  return v;
}

Matrix shifted_generator(const PhaseTypeDistribution& ph, double gamma) {
  Matrix t = ph.Q;
  for (int i = 0; i < ph.m; ++i) t(i, i) -= gamma;
  return t;
}

// Shared context for the Poisson-observation laws of one (model, gamma, j).
struct PoissonCtx {
  PhaseTypeDistribution ph;
  Matrix T;          // Q - gamma I
  Vec uj;            // (-T)^{-1} e_j
  double c = 0.0;    // alpha (-T)^{-1} e_j
  double lambda = 0.0;
  double gamma = 0.0;
  int j = 0;
};

std::shared_ptr<const PoissonCtx> poisson_ctx(const PhaseTypeDistribution& ph, double gamma,
                                              int j) {
  auto ctx = std::make_shared<PoissonCtx>();
  ctx->ph = ph;
  ctx->T = shifted_generator(ph, gamma);
  LuFactors lu = factor_neg(ctx->T);
  ctx->uj = lu.solve(unit(ph.m, j - 1));
  ctx->c = dot(ph.alpha, ctx->uj);
  ctx->lambda = ph.rate(j);
  ctx->gamma = gamma;
  ctx->j = j;
  if (gamma * ctx->c < kConditioningThreshold) conditioning_error(j, gamma * ctx->c);
  return ctx;
}

// Shared context for the uniform-observation laws.
struct UniformCtx {
  PhaseTypeDistribution ph;
  double t = 0.0;
  Vec dj;             // (-Q)^{-1} e_j
  Vec row_t;          // alpha e^{Qt}
  double ct = 0.0;    // alpha [I - e^{Qt}] (-Q)^{-1} e_j
  double lambda = 0.0;
  int j = 0;
};

std::shared_ptr<const UniformCtx> uniform_ctx(const PhaseTypeDistribution& ph, double t, int j) {
  auto ctx = std::make_shared<UniformCtx>();
  ctx->ph = ph;
  ctx->t = t;
  ctx->dj = ph.neg_q->solve(unit(ph.m, j - 1));
  ctx->row_t = row_times(ph.alpha, expm(ph.Q, t));
  ctx->ct = dot(ph.alpha, ctx->dj) - dot(ctx->row_t, ctx->dj);
  ctx->lambda = ph.rate(j);
  ctx->j = j;
  if (ctx->ct / t < kConditioningThreshold) conditioning_error(j, ctx->ct / t);
  return ctx;
}

// Shared context for the rare-limit (and Poisson-birth) laws.
struct RareCtx {
  PhaseTypeDistribution ph;
  Vec dj;              // (-Q)^{-1} e_j
  double den = 0.0;    // alpha (-Q)^{-1} e_j
  double lambda = 0.0;
  int j = 0;
};

std::shared_ptr<const RareCtx> rare_ctx(const PhaseTypeDistribution& ph, int j) {
  auto ctx = std::make_shared<RareCtx>();
  ctx->ph = ph;
  ctx->dj = ph.neg_q->solve(unit(ph.m, j - 1));
  ctx->den = dot(ph.alpha, ctx->dj);
  ctx->lambda = ph.rate(j);
  ctx->j = j;
  const double weight = ctx->den / mean_lifetime(ph);
  if (weight < kConditioningThreshold) conditioning_error(j, weight);
  return ctx;
}

MixedDistribution rare_age_law(const PhaseTypeDistribution& ph, int j) {
  auto ctx = rare_ctx(ph, j);
  MixedDistribution d;
  d.atom_at_zero = 0.0;
  d.cdf = [ctx](double s) {
    if (s <= 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, s));
    return clamp01(1.0 - dot(row, ctx->dj) / ctx->den);
  };
  d.density = [ctx](double s) {
    if (s < 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, s));
    return std::max(0.0, row[ctx->j - 1] / ctx->den);
  };
  return d;
}

}  // namespace

MixedDistribution exponential_law(double rate) {
  require(std::isfinite(rate) && rate > 0.0, ErrorCode::invalid_argument,
          "exponential rate must be positive and finite");
  MixedDistribution d;
  d.atom_at_zero = 0.0;
  d.cdf = [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
  d.density = [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); };
  d.is_exponential = true;
  d.exponential_rate = rate;
  return d;
}

double phase_observation_probability(const PhaseTypeDistribution& ph,
                                     const ObservationScheme& scheme, int j) {
  check_phase(ph, j);
  check_scheme(scheme);
  if (const auto* p = std::get_if<PoissonObservation>(&scheme)) {
    const Vec uj = factor_neg(shifted_generator(ph, p->gamma)).solve(unit(ph.m, j - 1));
    return clamp01(p->gamma * dot(ph.alpha, uj));
  }
  if (const auto* u = std::get_if<UniformObservation>(&scheme)) {
    const Vec dj = ph.neg_q->solve(unit(ph.m, j - 1));
    const Vec row_t = row_times(ph.alpha, expm(ph.Q, u->horizon_t));
    return clamp01((dot(ph.alpha, dj) - dot(row_t, dj)) / u->horizon_t);
  }
  // PoissonBirth and RareLimit: normalized long-run weight.
  const Vec dj = ph.neg_q->solve(unit(ph.m, j - 1));
  return clamp01(dot(ph.alpha, dj) / mean_lifetime(ph));
}

MixedDistribution age_given_phase(const PhaseTypeDistribution& ph, const ObservationScheme& scheme,
                                  int j) {
  check_phase(ph, j);
  check_scheme(scheme);
  if (const auto* p = std::get_if<PoissonObservation>(&scheme)) {
    auto ctx = poisson_ctx(ph, p->gamma, j);
    MixedDistribution d;
    d.cdf = [ctx](double s) {
      if (s <= 0.0) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->T, s));
      return clamp01(1.0 - dot(row, ctx->uj) / ctx->c);
    };
    d.density = [ctx](double s) {
      if (s < 0.0) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->T, s));
      return std::max(0.0, row[ctx->j - 1] / ctx->c);
    };
    return d;
  }
  if (const auto* u = std::get_if<UniformObservation>(&scheme)) {
    auto ctx = uniform_ctx(ph, u->horizon_t, j);
    MixedDistribution d;
    d.support_bound = u->horizon_t;
    d.density_breakpoints = {u->horizon_t};
    d.cdf = [ctx](double s) {
      if (s <= 0.0) return 0.0;
      if (s >= ctx->t) return 1.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, s));
      return clamp01(1.0 - (dot(row, ctx->dj) - dot(ctx->row_t, ctx->dj)) / ctx->ct);
    };
    d.density = [ctx](double s) {
      if (s < 0.0 || s > ctx->t) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, s));
      return std::max(0.0, row[ctx->j - 1] / ctx->ct);
    };
    return d;
  }
  // RareLimit and PoissonBirth share one formula.
  return rare_age_law(ph, j);
}

MixedDistribution entry_time_given_phase(const PhaseTypeDistribution& ph,
                                         const ObservationScheme& scheme, int j) {
  check_phase(ph, j);
  check_scheme(scheme);
  require(!std::holds_alternative<PoissonBirth>(scheme), ErrorCode::unsupported,
          "the phase-entry time has no law under the Poisson-birth scheme");
  const Vec vj = q_column_plus_rate(ph, j);

  if (const auto* p = std::get_if<PoissonObservation>(&scheme)) {
    auto ctx = poisson_ctx(ph, p->gamma, j);
    const double denom = (ctx->lambda + ctx->gamma) * ctx->c;
    auto wj = std::make_shared<const Vec>(factor_neg(ctx->T).solve(vj));
    auto vjp = std::make_shared<const Vec>(vj);
    MixedDistribution d;
    d.atom_at_zero = ph.alpha[j - 1] / denom;
    d.cdf = [ctx, wj, denom](double y) {
      if (y < 0.0) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->T, y));
      return clamp01(1.0 - dot(row, *wj) / denom);
    };
    d.density = [ctx, vjp, denom](double y) {
      if (y < 0.0) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->T, y));
      return std::max(0.0, dot(row, *vjp) / denom);
    };
    return d;
  }
  if (const auto* u = std::get_if<UniformObservation>(&scheme)) {
    auto ctx = uniform_ctx(ph, u->horizon_t, j);
    const double denom = ctx->lambda * ctx->ct;
    auto vjp = std::make_shared<const Vec>(vj);
    MixedDistribution d;
    d.atom_at_zero = ph.alpha[j - 1] * -std::expm1(-ctx->lambda * ctx->t) / denom;
    d.support_bound = u->horizon_t;
    d.density_breakpoints = {u->horizon_t};
    d.cdf = [ctx, denom](double y) {
      if (y < 0.0) return 0.0;
      if (y >= ctx->t) return 1.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, y));
      const double tail = ctx->lambda * (dot(row, ctx->dj) - dot(ctx->row_t, ctx->dj)) +
                          row[ctx->j - 1] * std::expm1(-ctx->lambda * (ctx->t - y));
      return clamp01(1.0 - tail / denom);
    };
    d.density = [ctx, vjp, denom](double y) {
      if (y < 0.0 || y > ctx->t) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, y));
      return std::max(0.0, dot(row, *vjp) * -std::expm1(-ctx->lambda * (ctx->t - y)) / denom);
    };
    return d;
  }
  // RareLimit.
  auto ctx = rare_ctx(ph, j);
  const double denom = ctx->lambda * ctx->den;
  auto wj = std::make_shared<const Vec>(ph.neg_q->solve(vj));
  auto vjp = std::make_shared<const Vec>(vj);
  MixedDistribution d;
  d.atom_at_zero = ph.alpha[j - 1] / denom;
  d.cdf = [ctx, wj, denom](double y) {
    if (y < 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, y));
    return clamp01(1.0 - dot(row, *wj) / denom);
  };
  d.density = [ctx, vjp, denom](double y) {
    if (y < 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, y));
    return std::max(0.0, dot(row, *vjp) / denom);
  };
  return d;
}

MixedDistribution sojourn_given_phase(const PhaseTypeDistribution& ph,
                                      const ObservationScheme& scheme, int j) {
  check_phase(ph, j);
  check_scheme(scheme);
  require(!std::holds_alternative<PoissonBirth>(scheme), ErrorCode::unsupported,
          "the elapsed sojourn has no law under the Poisson-birth scheme");
  if (const auto* p = std::get_if<PoissonObservation>(&scheme)) {
    auto ctx = poisson_ctx(ph, p->gamma, j);  // conditioning check
    (void)ctx;
    return exponential_law(p->gamma + ph.rate(j));
  }
  if (const auto* u = std::get_if<UniformObservation>(&scheme)) {
    auto ctx = uniform_ctx(ph, u->horizon_t, j);
    MixedDistribution d;
    d.support_bound = u->horizon_t;
    d.density_breakpoints = {u->horizon_t};
    d.cdf = [ctx](double z) {
      if (z < 0.0) return 0.0;
      if (z >= ctx->t) return 1.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, ctx->t - z));
      const double tail = (dot(ctx->ph.alpha, ctx->dj) - dot(row, ctx->dj)) *
                          std::exp(-ctx->lambda * z);
      return clamp01(1.0 - tail / ctx->ct);
    };
    d.density = [ctx](double z) {
      if (z < 0.0 || z > ctx->t) return 0.0;
      const Vec row = row_times(ctx->ph.alpha, expm(ctx->ph.Q, ctx->t - z));
      const double val = row[ctx->j - 1] +
                         ctx->lambda * (dot(ctx->ph.alpha, ctx->dj) - dot(row, ctx->dj));
      return std::max(0.0, val * std::exp(-ctx->lambda * z) / ctx->ct);
    };
    return d;
  }
  // RareLimit.
  auto ctx = rare_ctx(ph, j);  // conditioning check
  (void)ctx;
  return exponential_law(ph.rate(j));
}

SchemeLimitReport scheme_limit_check(const PhaseTypeDistribution& ph, int j,
                                     const std::vector<double>& grid) {
  check_phase(ph, j);
  const double mean = mean_lifetime(ph);
  const MixedDistribution rare = age_given_phase(ph, RareLimit{}, j);
  const MixedDistribution birth = age_given_phase(ph, PoissonBirth{}, j);
  const MixedDistribution poisson = age_given_phase(ph, PoissonObservation{1e-6}, j);
  const MixedDistribution uniform = age_given_phase(ph, UniformObservation{1e4 * mean}, j);
  SchemeLimitReport r;
  for (double s : grid) {
    const double fr = rare.cdf(s);
    r.poisson_vs_rare = std::max(r.poisson_vs_rare, std::abs(poisson.cdf(s) - fr));
    r.uniform_vs_rare = std::max(r.uniform_vs_rare, std::abs(uniform.cdf(s) - fr));
    r.rare_vs_birth = std::max(r.rare_vs_birth, std::abs(birth.cdf(s) - fr));
  }
  return r;
}

}  // namespace phaseage
