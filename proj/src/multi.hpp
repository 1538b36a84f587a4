#pragma once
#include <functional>
#include <vector>

#include "ph_model.hpp"
#include "schemes.hpp"

namespace phaseage {

// Successive phases recorded at Poisson observation epochs; terminal_death
// marks that the (k+1)-st observation found the individual dead (phase 0).
struct PhaseSequence {
  std::vector<int> phases;      // j_1..j_k, 1-based, k >= 1
  bool terminal_death = false;
};

struct MultiObsResult {
  double sequence_probability = 0.0;  // P[this exact observation record]
  std::function<double(double)> cdf;
  std::function<double(double)> density;
  int k = 0;
};

struct MultiOptions {
  bool use_recursive = false;  // evaluate N_k by the level-by-level recursion
                               // instead of the closed stacked-block form
  int k_cap = 50;              // guard on the (k m)-dimensional expm cost
};

// The km x km block upper bidiagonal matrix with T = Q - gamma I on the
// diagonal and e_{j_i} e_{j_i}^T couplings for i = 1..k-1.
Matrix build_Ak(const PhaseTypeDistribution& ph, double gamma, const PhaseSequence& seq);

// Age at the k-th observation epoch given the k observed phases (all alive).
// Requires k >= 2; the k = 1 law is age_given_phase under PoissonObservation.
MultiObsResult age_at_kth_observation(const PhaseTypeDistribution& ph, double gamma,
                                      const PhaseSequence& seq, const MultiOptions& opts = {});

// Lifetime given k alive observations of the stated phases and death found at
// observation k+1 (seq.terminal_death must be true). Requires k >= 2.
MultiObsResult lifetime_given_death_at_next(const PhaseTypeDistribution& ph, double gamma,
                                            const PhaseSequence& seq,
                                            const MultiOptions& opts = {});

// Law of a phase-type variable X conditioned on X <= Y with Y ~ Exp(gamma)
// independent: the residual-lifetime building block of the death case.
MixedDistribution conditioned_absorption(const PhaseTypeDistribution& x_theta, double gamma);

}  // namespace phaseage
