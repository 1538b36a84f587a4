#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "multi.hpp"
#include "ph_model.hpp"
#include "schemes.hpp"

namespace phaseage {

// Counter-based substream: (seed, stream index) -> xoshiro256++ state via
// SplitMix64, so replication r always sees the same draws regardless of how
// replications are distributed over threads.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream);
  uint64_t next_u64();
  double uniform();                 // [0, 1)
  double exponential(double rate);  // inverse-cdf, strictly positive

 private:
  uint64_t s_[4];
};

// One absorbing-chain path: jump_times[i] is the entry epoch of phases[i]
// (jump_times[0] = 0); the final jump to phase 0 happens at absorption_time.
struct Trajectory {
  std::vector<double> jump_times;
  std::vector<int> phases;  // 1-based
  double absorption_time = 0.0;
};

Trajectory simulate_trajectory(const PhaseTypeDistribution& ph, RngStream& rng);

struct Observation {
  double time = 0.0;
  int phase = 0;  // 0 = found dead
};

// Poisson(gamma) observation epochs labeled with the occupied phase,
// truncated at (and including) the first epoch that finds the individual dead.
std::vector<Observation> observe_poisson(const Trajectory& traj, double gamma, RngStream& rng);

// Single Uniform[0, t] observation epoch.
Observation observe_uniform(const Trajectory& traj, double t, RngStream& rng);

enum class SimTarget { age, entry_time, sojourn, multi_age, multi_lifetime };

struct SimulationConfig {
  long long replications = 1000000;  // raw replications; accepted paths for multi targets
  uint64_t seed = 1;
  ObservationScheme scheme = PoissonObservation{1.0};
  int batch = 0;  // worker count for parallel chunking; 0 = PA_THREADS env, else hw threads
  long long min_accepted = 1000;
};

struct EmpiricalCdf {
  std::vector<double> samples;  // sorted ascending
  long long total_replications = 0;
  long long accepted = 0;

  double atom_fraction() const;  // share of samples exactly 0
  double eval(double x) const;   // right-continuous empirical cdf
  double band_epsilon() const;   // DKW half-width at confidence 0.99
  double mean() const;
  double ks_statistic(const std::function<double(double)>& cdf) const;
};

// Empirical law of the requested conditional variable. Single-observation
// targets reject replications whose observation misses phase `phase`;
// multi-observation targets build each accepted path segment-by-segment
// (the chain restarts from the observed phase at each epoch), so every
// replication yields a sample. PoissonBirth/RareLimit schemes and non-Poisson
// multi targets are unsupported.
EmpiricalCdf empirical_conditional(const SimulationConfig& cfg, const PhaseTypeDistribution& ph,
                                   SimTarget target, int phase,
                                   const PhaseSequence* seq = nullptr);

// Fraction of full simulated lives whose first k Poisson observations record
// exactly seq.phases (and, when terminal_death, whose (k+1)-st observation
// finds the individual dead). Uses whole-trajectory counting: no conditioning
// shortcuts, so it independently validates sequence_probability.
double sequence_frequency(const SimulationConfig& cfg, const PhaseTypeDistribution& ph,
                          const PhaseSequence& seq);

}  // namespace phaseage
