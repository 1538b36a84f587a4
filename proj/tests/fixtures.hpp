// Shared test fixtures: the 5-phase example chain, the 13-class mortality
// fixture with its reference 13-phase Coxian parameters, and regression
// constants frozen from oracle runs (regenerate with tools/regen_constants).
#pragma once
#include <vector>

#include "fit.hpp"
#include "ph_model.hpp"

namespace fixtures {

inline phaseage::Matrix toy_q() {
  const double entries[5][5] = {
      {-3.0, 2.0, 0.0, 0.0, 0.0},
      {0.0, -5.0, 3.0, 0.0, 0.0},
      {1.0, 0.0, -4.0, 2.0, 0.0},
      {0.0, 1.0, 0.0, -6.0, 3.0},
      {0.0, 0.0, 1.0, 0.0, -2.0},
  };
  phaseage::Matrix q(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) q(i, j) = entries[i][j];
  return q;
}

// Deterministic start in phase 1.
inline phaseage::PhaseTypeDistribution toy_model() {
  return phaseage::validate({1.0, 0.0, 0.0, 0.0, 0.0}, toy_q());
}

// Uniform start over the five phases.
inline phaseage::PhaseTypeDistribution toy_model_mixed_start() {
  return phaseage::validate({0.2, 0.2, 0.2, 0.2, 0.2}, toy_q());
}

inline const std::vector<int> kSeq1{1, 2, 3, 3, 4};
inline const std::vector<int> kSeq2{2, 3, 1, 1, 4};

// 13 one-year age classes of female death rates (final class open-ended).
inline phaseage::MortalityTable mortality_fixture() {
  phaseage::MortalityTable t;
  t.rates = {0.19, 0.23, 0.36, 0.27, 0.40, 0.50, 0.33, 0.33, 0.67, 0.33, 0.33, 0.33, 0.67};
  for (size_t x = 0; x < t.rates.size(); ++x) t.class_starts.push_back(static_cast<double>(x));
  return t;
}

// Reference 13-phase Coxian fit of the mortality fixture (rounded reported
// values; used as a warm start and as the bar the optimizer must beat).
inline phaseage::CoxianParameters reference_coxian() {
  phaseage::CoxianParameters p;
  p.lambdas = {1.54, 1.59, 1.26, 1.53, 1.67, 2.21, 1.86, 1.36, 1.28, 0.68, 0.76, 1.86, 1.15};
  p.continue_probs = {0.93, 1.0, 0.27, 1.0, 1.0, 0.98, 1.0, 1.0, 0.06, 0.98, 0.91, 0.55};
  return p;
}

// ---- Frozen regression constants (one-shot oracle run, 17 digits) ----
// Values produced by tools/regen_constants; rerun that tool and paste its
// output here if the fixtures above ever change.

// Weighted squared-error objective of reference_coxian on mortality_fixture.
inline constexpr double kReferenceObjective = 0.018547094869448055;

// One-year model mortality d(x), x = 0..12, for reference_coxian.
inline constexpr double kReferenceMortality[13] = {
    0.17686276276567536,
    0.32529132463888277,
    0.33503426385902269,
    0.30415976692063873,
    0.30779451780049105,
    0.34366258322076715,
    0.38482522888276638,
    0.41701215612915865,
    0.43662819105225847,
    0.44460629586628764,
    0.4439264450423418,
    0.43860481711923827,
    0.43257804316838033};

// Pyramid frequencies for reference_coxian with uniform phase frequencies
// over the default classes [0,1),...,[9,10),[10,inf).
inline constexpr double kUniformFpPyramid[11] = {
    0.11675764097541362,
    0.11640437364915235,
    0.12093824109936352,
    0.11715287503561157,
    0.10478278491882735,
    0.09010985635432861,
    0.076716335430129554,
    0.064709577447368577,
    0.053247056434263168,
    0.042112590209032442,
    0.09706866844650934};

// Observation-record probabilities for the example chain at observation
// rate 1: kSeq1/kSeq2 seen alive, and the same records with death found at
// the next epoch.
inline constexpr double kSeq1AliveProbability = 4.2559044198915622e-05;
inline constexpr double kSeq2AliveProbability = 2.6599402624322264e-06;
inline constexpr double kSeq1DeathProbability = 2.5265768663543568e-05;
inline constexpr double kSeq2DeathProbability = 1.579110541471473e-06;

}  // namespace fixtures
