#pragma once
#include <optional>
#include <vector>

#include "ph_model.hpp"

namespace phaseage {

// Long-run phase frequencies supplied as external data (one entry per phase,
// nonnegative, summing to 1 within 1e-10).
struct PhaseFrequencies {
  std::vector<double> freqs;
};

struct AgePyramid {
  std::vector<double> class_starts;  // final class open-ended
  std::vector<double> freqs;
};

// P[age in [x, x+width) | current phase j] under the stationary (vanishing
// observation intensity) age law; width == nullopt means the open class [x, inf).
double age_class_probability(const PhaseTypeDistribution& ph, int j, double x,
                             std::optional<double> width);

// f^a_x = sum_j f^p_j P[age in class x | phase j] over the given class starts
// (default 0..10, last class open-ended).
AgePyramid compute_pyramid(const PhaseTypeDistribution& ph, const PhaseFrequencies& fp,
                           std::vector<double> class_starts = {});

}  // namespace phaseage
