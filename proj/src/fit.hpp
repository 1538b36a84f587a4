#pragma once
#include <cstdint>
#include <vector>

#include "ph_model.hpp"

namespace phaseage {

// One-year age classes [x, x+1) (final class open-ended) with death rates
// d_x = P[dead by x+1 | alive at x]; survivals S_x = prod_{y<x}(1 - d_y).
struct MortalityTable {
  std::vector<double> class_starts;  // 0, 1, ..., n-1
  std::vector<double> rates;         // in (0, 1]
};

void validate(const MortalityTable& table);
std::vector<double> survivals(const MortalityTable& table);  // S_0 = 1, length n

// One-year conditional death probability of the model at integer age x:
// 1 - (alpha e^{Q(x+1)} 1) / (alpha e^{Qx} 1).
double model_mortality(const PhaseTypeDistribution& ph, int x);

// Weighted squared-error objective sum_x (d_x - dbar(x))^2 S_x with observed
// survival weights. The two routes are algebraically identical; the second
// recomputes dbar(x) from lifetime-cdf differences and exists as an
// independent cross-check.
double objective_F(const CoxianParameters& params, const MortalityTable& table);
double objective_F_via_cdf(const CoxianParameters& params, const MortalityTable& table);

struct FitOptions {
  int starts = 20;                // multi-start count (includes extra_starts)
  uint64_t seed = 7;              // jitter seed for the randomized starts
  long long max_evals = 100000;   // objective-evaluation cap per start
  double tol = 1e-10;             // simplex diameter tolerance (transformed space)
  std::vector<CoxianParameters> extra_starts;  // user-supplied warm starts
};

struct FitResult {
  CoxianParameters params;
  double objective_value = 0.0;
  long long iterations = 0;  // total objective evaluations across starts
  bool converged = false;    // best start met the diameter tolerance
};

// Nelder-Mead over (log lambda_i, logit s_i) with multi-start; returns the
// best parameters found (never worse than the best supplied start).
FitResult fit_coxian(const MortalityTable& table, int m, const FitOptions& opts = {});

}  // namespace phaseage
