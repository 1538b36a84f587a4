#pragma once
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "ph_model.hpp"

namespace phaseage {

// How the single observation epoch is generated.
struct PoissonBirth {};  // stationary population born at Poisson epochs, inspected once
struct PoissonObservation {
  double gamma = 0.0;  // observation rate per year
};
struct UniformObservation {
  double horizon_t = 0.0;  // observation time uniform on [0, t]
};
struct RareLimit {};  // gamma -> 0 (equivalently t -> infinity) limit

using ObservationScheme =
    std::variant<PoissonBirth, PoissonObservation, UniformObservation, RareLimit>;

// A law on [0, inf) with an optional atom at zero and a piecewise-continuous
// density. cdf(0) = atom_at_zero; cdf is the full mixed law.
struct MixedDistribution {
  double atom_at_zero = 0.0;
  std::function<double(double)> cdf;
  std::function<double(double)> density;        // continuous part only
  std::optional<double> support_bound;          // finite right endpoint when present
  std::vector<double> density_breakpoints;      // jump/kink locations for quadrature
  bool is_exponential = false;                  // law is exactly exponential
  double exponential_rate = 0.0;
};

MixedDistribution exponential_law(double rate);

// P[observed phase = j] under the scheme. PoissonBirth and RareLimit return
// the normalized long-run weight alpha (-Q)^{-1} e_j / alpha (-Q)^{-1} 1.
double phase_observation_probability(const PhaseTypeDistribution& ph,
                                     const ObservationScheme& scheme, int j);

// Age A_o at the observation epoch, conditional on observing phase j.
MixedDistribution age_given_phase(const PhaseTypeDistribution& ph, const ObservationScheme& scheme,
                                  int j);

// Time Y_j since the individual last entered the observed phase j (atom at 0
// when the individual may still be in its initial phase). PoissonBirth is
// unsupported: no such law exists for that scheme.
MixedDistribution entry_time_given_phase(const PhaseTypeDistribution& ph,
                                         const ObservationScheme& scheme, int j);

// Elapsed sojourn Z_j = A_o - Y_j in the observed phase at the epoch.
MixedDistribution sojourn_given_phase(const PhaseTypeDistribution& ph,
                                      const ObservationScheme& scheme, int j);

// Numerical check that the small-gamma / large-t age laws collapse to the
// rare limit, and that the rare limit coincides with the Poisson-birth law.
struct SchemeLimitReport {
  double poisson_vs_rare = 0.0;   // PoissonObservation(1e-6) vs RareLimit, sup over grid
  double uniform_vs_rare = 0.0;   // UniformObservation(1e4 * mean) vs RareLimit
  double rare_vs_birth = 0.0;     // RareLimit vs PoissonBirth (same formula; ~0)
};
SchemeLimitReport scheme_limit_check(const PhaseTypeDistribution& ph, int j,
                                     const std::vector<double>& grid);

}  // namespace phaseage
