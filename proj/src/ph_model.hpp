#pragma once
#include <memory>
#include <string>
#include <vector>

#include "dense.hpp"

namespace phaseage {

struct CoxianParameters {
  Vec lambdas;         // m positive rates, one per phase
  Vec continue_probs;  // m-1 probabilities of surviving each phase transition
};

// A validated phase-type lifetime: initial distribution alpha over m transient
// phases and sub-generator Q. exit = -Q*1 holds the per-phase death rates.
// Construct through validate() (or coxian()); the (-Q) factorization is shared
// so copies stay cheap.
struct PhaseTypeDistribution {
  Vec alpha;
  Matrix Q;
  Vec exit;
  int m = 0;
  std::shared_ptr<const LuFactors> neg_q;  // LU of (-Q), condition-gated

  double rate(int j) const;  // -Q(j,j) for 1-based phase j
};

// All violated model invariants (empty when the pair is a valid PH model).
std::vector<std::string> validate_issues(const Vec& alpha, const Matrix& q);

// Builds a validated model or throws ErrorCode::invalid_model listing every
// violated invariant.
PhaseTypeDistribution validate(const Vec& alpha, const Matrix& q);

double lifetime_cdf(const PhaseTypeDistribution& ph, double x);
double lifetime_density(const PhaseTypeDistribution& ph, double x);
// P[alive at x and in phase j] = (alpha e^{Qx})_j, 1-based j.
double phase_probability(const PhaseTypeDistribution& ph, double x, int j);
double mean_lifetime(const PhaseTypeDistribution& ph);

// Smallest probed horizon with survival below 1e-14 (doubling search); used to
// truncate quadrature and default plotting grids.
double support_bound(const PhaseTypeDistribution& ph);

// Coxian chain: start in phase 1, leave phase j at rate lambda_j, continuing
// to phase j+1 with probability continue_probs[j-1], otherwise exiting.
PhaseTypeDistribution coxian(const CoxianParameters& p);
bool is_coxian(const PhaseTypeDistribution& ph);

// Leading j-phase sub-model of a Coxian chain (phase j's onward transition is
// redirected to exit). Errors with ErrorCode::unsupported on non-Coxian input.
PhaseTypeDistribution restrict_to_prefix(const PhaseTypeDistribution& ph, int j);

}  // namespace phaseage
