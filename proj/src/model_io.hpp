#pragma once
#include <optional>
#include <string>

#include "fit.hpp"
#include "ph_model.hpp"
#include "pyramid.hpp"

namespace phaseage {

struct LoadedModel {
  PhaseTypeDistribution ph;
  std::optional<CoxianParameters> coxian_params;  // set when the file gave Coxian shorthand
};

// JSON model files: either {"alpha": [...], "Q": [[...], ...]} for a general
// model or {"lambdas": [...], "continue_probs": [...]} for Coxian shorthand.
LoadedModel load_model_json(const std::string& path);

// CSV with header `age_class_start,rate`.
MortalityTable load_mortality_csv(const std::string& path);

// CSV with header `phase,frequency`; phases must be 1..m in order.
PhaseFrequencies load_phase_frequencies_csv(const std::string& path);

}  // namespace phaseage
