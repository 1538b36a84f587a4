#include "fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "dense.hpp"
#include "error.hpp"
#include "simulate.hpp"

namespace phaseage {

void validate(const MortalityTable& table) {
  size_t n = table.rates.size();
  require(n >= 1, ErrorCode::invalid_argument, "mortality table must have at least one class");
  require(table.class_starts.size() == n, ErrorCode::invalid_argument,
          "mortality table class/rate lengths differ");
  for (size_t x = 0; x < n; ++x) {
    require(table.class_starts[x] == static_cast<double>(x), ErrorCode::invalid_argument,
            "age classes must be consecutive one-year classes starting at 0");
    require(std::isfinite(table.rates[x]) && table.rates[x] > 0.0 && table.rates[x] <= 1.0,
            ErrorCode::invalid_argument,
            "death rate for class " + std::to_string(x) + " must lie in (0, 1]");
  }
}

std::vector<double> survivals(const MortalityTable& table) {
  std::vector<double> s(table.rates.size(), 1.0);
  for (size_t x = 1; x < s.size(); ++x) s[x] = s[x - 1] * (1.0 - table.rates[x - 1]);
  return s;
}

double model_mortality(const PhaseTypeDistribution& ph, int x) {
  require(x >= 0, ErrorCode::invalid_argument, "age must be nonnegative");
  Matrix ex = expm(ph.Q, static_cast<double>(x));
  Vec row = row_times(ph.alpha, ex);
  double surv = 0.0;
  for (double v : row) surv += v;
  require(surv > 1e-300, ErrorCode::numeric,
          "survival underflow at age " + std::to_string(x));
  Matrix step = expm(ph.Q, 1.0);
  Vec nxt = row_times(row, step);
  double surv1 = 0.0;
  for (double v : nxt) surv1 += v;
  return 1.0 - surv1 / surv;
}

namespace {

// Iterates the conditional phase distribution given survival one year at a
// time; renormalizing each step keeps the recursion stable far beyond the
// age where absolute survival underflows.
double objective_from_dbar(const MortalityTable& table,
                           const std::function<double(int, const Vec&, Vec&)>& step_dbar,
                           const Vec& alpha) {
  std::vector<double> shat = survivals(table);
  double f = 0.0;
  Vec row = alpha;
  Vec next;
  for (size_t x = 0; x < table.rates.size(); ++x) {
    double dbar = step_dbar(static_cast<int>(x), row, next);
    double diff = table.rates[x] - dbar;
    f += diff * diff * shat[x];
    double keep = 0.0;
    for (double v : next) keep += v;
    require(keep > 1e-300, ErrorCode::numeric,
            "model survival vanished at age " + std::to_string(x + 1));
    row.resize(next.size());
    for (size_t j = 0; j < next.size(); ++j) row[j] = next[j] / keep;
  }
  return f;
}

}  // namespace

double objective_F(const CoxianParameters& params, const MortalityTable& table) {
  validate(table);
  PhaseTypeDistribution ph = coxian(params);
  Matrix step = expm(ph.Q, 1.0);
  auto step_dbar = [&](int, const Vec& row, Vec& next) {
    next = row_times(row, step);
    double surv = 0.0;
    for (double v : next) surv += v;
    return 1.0 - surv;
  };
  return objective_from_dbar(table, step_dbar, ph.alpha);
}

double objective_F_via_cdf(const CoxianParameters& params, const MortalityTable& table) {
  validate(table);
  PhaseTypeDistribution ph = coxian(params);
  std::vector<double> shat = survivals(table);
  double f = 0.0;
  for (size_t x = 0; x < table.rates.size(); ++x) {
    double sx = 1.0 - lifetime_cdf(ph, static_cast<double>(x));
    double sx1 = 1.0 - lifetime_cdf(ph, static_cast<double>(x) + 1.0);
    require(sx > 1e-300, ErrorCode::numeric, "model survival vanished at age " + std::to_string(x));
    double dbar = (sx - sx1) / sx;
    double diff = table.rates[x] - dbar;
    f += diff * diff * shat[x];
  }
  return f;
}

namespace {

constexpr double kThetaBound = 40.0;   // |log lambda| beyond this is penalized
constexpr double kPsiBound = 200.0;    // |logit s| beyond this is penalized
constexpr double kPenaltyBase = 1e10;

struct Transform {
  int m;

  size_t dim() const { return static_cast<size_t>(2 * m - 1); }

  CoxianParameters decode(const Vec& z) const {
    CoxianParameters p;
    p.lambdas.resize(static_cast<size_t>(m));
    p.continue_probs.resize(static_cast<size_t>(m - 1));
    for (int i = 0; i < m; ++i) p.lambdas[static_cast<size_t>(i)] = std::exp(z[static_cast<size_t>(i)]);
    for (int i = 0; i + 1 < m; ++i) {
      double psi = z[static_cast<size_t>(m + i)];
      p.continue_probs[static_cast<size_t>(i)] = 1.0 / (1.0 + std::exp(-psi));
    }
    return p;
  }

  Vec encode(const CoxianParameters& p) const {
    Vec z(dim());
    for (int i = 0; i < m; ++i) {
      double lam = std::min(std::max(p.lambdas[static_cast<size_t>(i)], 1e-17), 1e17);
      z[static_cast<size_t>(i)] = std::log(lam);
    }
    for (int i = 0; i + 1 < m; ++i) {
      double s = std::min(std::max(p.continue_probs[static_cast<size_t>(i)], 1e-12), 1.0 - 1e-12);
      z[static_cast<size_t>(m + i)] = std::log(s / (1.0 - s));
    }
    return z;
  }
};

struct NelderMeadOutcome {
  Vec best;
  double value = std::numeric_limits<double>::infinity();
  long long evals = 0;
  bool converged = false;
};

NelderMeadOutcome nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start,
                              long long max_evals, double tol) {
  size_t d = start.size();
  size_t n = d + 1;
  std::vector<Vec> simplex(n, start);
  std::vector<double> fx(n);
  long long evals = 0;
  auto eval = [&](const Vec& z) {
    ++evals;
    return f(z);
  };
  for (size_t i = 1; i < n; ++i) {
    double h = 0.1 * std::max(1.0, std::abs(start[i - 1]));
    simplex[i][i - 1] += h;
  }
  for (size_t i = 0; i < n; ++i) fx[i] = eval(simplex[i]);

  std::vector<size_t> order(n);
  auto sort_simplex = [&] {
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fx[a] < fx[b]; });
    std::vector<Vec> s2(n);
    std::vector<double> f2(n);
    for (size_t i = 0; i < n; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fx[order[i]];
    }
    simplex.swap(s2);
    fx.swap(f2);
  };
  auto diameter = [&] {
    double dd = 0.0;
    for (size_t i = 1; i < n; ++i)
      for (size_t j = 0; j < d; ++j) dd = std::max(dd, std::abs(simplex[i][j] - simplex[0][j]));
    return dd;
  };

  sort_simplex();
  bool converged = false;
  while (evals < max_evals) {
    if (diameter() < tol) {
      converged = true;
      break;
    }
    Vec centroid(d, 0.0);
    for (size_t i = 0; i + 1 < n; ++i)
      for (size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    for (size_t j = 0; j < d; ++j) centroid[j] /= static_cast<double>(d);

    auto along = [&](double coef) {
      Vec z(d);
      for (size_t j = 0; j < d; ++j) z[j] = centroid[j] + coef * (simplex[n - 1][j] - centroid[j]);
      return z;
    };

    Vec xr = along(-1.0);
    double fr = eval(xr);
    if (fr < fx[0]) {
      Vec xe = along(-2.0);
      double fe = eval(xe);
      if (fe < fr) {
        simplex[n - 1] = xe;
        fx[n - 1] = fe;
      } else {
        simplex[n - 1] = xr;
        fx[n - 1] = fr;
      }
    } else if (fr < fx[n - 2]) {
      simplex[n - 1] = xr;
      fx[n - 1] = fr;
    } else {
      bool outside = fr < fx[n - 1];
      Vec xc = along(outside ? -0.5 : 0.5);
      double fc = eval(xc);
      if (fc < (outside ? fr : fx[n - 1])) {
        simplex[n - 1] = xc;
        fx[n - 1] = fc;
      } else {
        for (size_t i = 1; i < n; ++i) {
          for (size_t j = 0; j < d; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fx[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  return {simplex[0], fx[0], evals, converged};
}

}  // namespace

FitResult fit_coxian(const MortalityTable& table, int m, const FitOptions& opts) {
  validate(table);
  require(m >= 1, ErrorCode::invalid_argument, "phase count must be at least 1");
  require(opts.starts >= 1, ErrorCode::invalid_argument, "at least one start is required");
  Transform tr{m};

  auto penalized = [&](const Vec& z) {
    double excess = 0.0;
    for (int i = 0; i < m; ++i) {
      double a = std::abs(z[static_cast<size_t>(i)]);
      if (a > kThetaBound) excess += a - kThetaBound;
    }
    for (int i = 0; i + 1 < m; ++i) {
      double a = std::abs(z[static_cast<size_t>(m + i)]);
      if (a > kPsiBound) excess += a - kPsiBound;
    }
    if (excess > 0.0) return kPenaltyBase + excess;
    try {
      return objective_F(tr.decode(z), table);
    } catch (const Error&) {
      return kPenaltyBase;
    }
  };

  // Deterministic base starts: per-class hazard matching, and unit rates with
  // continuation matched to survival odds.
  size_t n = table.rates.size();
  CoxianParameters base1, base2;
  base1.lambdas.resize(static_cast<size_t>(m));
  base2.lambdas.assign(static_cast<size_t>(m), 1.0);
  base1.continue_probs.assign(static_cast<size_t>(m - 1), 0.5);
  base2.continue_probs.resize(static_cast<size_t>(m - 1));
  for (int i = 0; i < m; ++i) {
    double d = table.rates[std::min(static_cast<size_t>(i), n - 1)];
    d = std::min(d, 1.0 - 1e-6);
    base1.lambdas[static_cast<size_t>(i)] = -std::log1p(-d);
  }
  for (int i = 0; i + 1 < m; ++i) {
    double d = table.rates[std::min(static_cast<size_t>(i), n - 1)];
    base2.continue_probs[static_cast<size_t>(i)] = std::min(std::max(1.0 - d, 1e-6), 1.0 - 1e-6);
  }

  std::vector<Vec> starts;
  for (const auto& p : opts.extra_starts) {
    require(p.lambdas.size() == static_cast<size_t>(m) &&
                p.continue_probs.size() == static_cast<size_t>(m - 1),
            ErrorCode::invalid_argument, "warm start has the wrong dimension");
    starts.push_back(tr.encode(p));
  }
  if (static_cast<int>(starts.size()) < opts.starts) starts.push_back(tr.encode(base1));
  if (static_cast<int>(starts.size()) < opts.starts) starts.push_back(tr.encode(base2));
  for (uint64_t idx = 0; static_cast<int>(starts.size()) < opts.starts; ++idx) {
    RngStream rng(opts.seed, idx);
    Vec z = tr.encode(idx % 2 == 0 ? base1 : base2);
    for (int i = 0; i < m; ++i) z[static_cast<size_t>(i)] += 3.0 * (rng.uniform() - 0.5);
    for (int i = 0; i + 1 < m; ++i) z[static_cast<size_t>(m + i)] += 6.0 * (rng.uniform() - 0.5);
    starts.push_back(std::move(z));
  }

  FitResult result;
  result.objective_value = std::numeric_limits<double>::infinity();
  for (const Vec& z0 : starts) {
    // Run to convergence, then restart a fresh simplex at the incumbent while
    // the evaluation budget lasts; a collapsed simplex often stalls short of
    // the local optimum in this many dimensions.
    long long remaining = opts.max_evals;
    NelderMeadOutcome out = nelder_mead(penalized, z0, remaining, opts.tol);
    result.iterations += out.evals;
    remaining -= out.evals;
    while (out.converged && remaining > 4 * static_cast<long long>(tr.dim())) {
      NelderMeadOutcome again = nelder_mead(penalized, out.best, remaining, opts.tol);
      result.iterations += again.evals;
      remaining -= again.evals;
      bool improved =
          again.value < out.value - opts.tol * std::max(1.0, std::abs(out.value));
      if (again.value < out.value) out = again;
      if (!improved) break;
    }
    if (out.value < result.objective_value) {
      result.objective_value = out.value;
      result.params = tr.decode(out.best);
      result.converged = out.converged;
    }
  }
  require(result.objective_value < kPenaltyBase, ErrorCode::numeric,
          "no start produced a feasible Coxian model");
  result.objective_value = objective_F(result.params, table);
  return result;
}

}  // namespace phaseage
