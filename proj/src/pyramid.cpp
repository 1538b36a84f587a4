#include "pyramid.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "schemes.hpp"

namespace phaseage {

double age_class_probability(const PhaseTypeDistribution& ph, int j, double x,
                             std::optional<double> width) {
  require(x >= 0.0 && std::isfinite(x), ErrorCode::invalid_argument,
          "class start must be nonnegative and finite");
  if (width) {
    require(*width > 0.0 && std::isfinite(*width), ErrorCode::invalid_argument,
            "class width must be positive and finite");
  }
  MixedDistribution law = age_given_phase(ph, RareLimit{}, j);
  double lo = law.cdf(x);
  double hi = width ? law.cdf(x + *width) : 1.0;
  return std::max(0.0, hi - lo);
}

AgePyramid compute_pyramid(const PhaseTypeDistribution& ph, const PhaseFrequencies& fp,
                           std::vector<double> class_starts) {
  require(fp.freqs.size() == static_cast<size_t>(ph.m), ErrorCode::invalid_argument,
          "phase frequency vector length must equal the phase count");
  double total = 0.0;
  for (size_t j = 0; j < fp.freqs.size(); ++j) {
    require(std::isfinite(fp.freqs[j]) && fp.freqs[j] >= 0.0, ErrorCode::invalid_argument,
            "phase frequencies must be nonnegative");
    total += fp.freqs[j];
  }
  require(std::abs(total - 1.0) <= 1e-10, ErrorCode::invalid_argument,
          "phase frequencies must sum to 1 (got " + std::to_string(total) + ")");

  if (class_starts.empty())
    for (int x = 0; x <= 10; ++x) class_starts.push_back(static_cast<double>(x));
  require(class_starts.size() >= 1 && class_starts[0] == 0.0, ErrorCode::invalid_argument,
          "age classes must start at 0");
  for (size_t i = 1; i < class_starts.size(); ++i)
    require(class_starts[i] > class_starts[i - 1], ErrorCode::invalid_argument,
            "age class starts must be strictly increasing");

  AgePyramid out;
  out.class_starts = class_starts;
  out.freqs.assign(class_starts.size(), 0.0);
  for (int j = 1; j <= ph.m; ++j) {
    double w = fp.freqs[static_cast<size_t>(j - 1)];
    if (w == 0.0) continue;  // zero-weight phases contribute nothing even if unreachable
    MixedDistribution law = age_given_phase(ph, RareLimit{}, j);
    double prev = 0.0;  // law.cdf(0) has no atom: ages are continuous here
    for (size_t c = 0; c < class_starts.size(); ++c) {
      double hi = c + 1 < class_starts.size() ? law.cdf(class_starts[c + 1]) : 1.0;
      out.freqs[c] += w * std::max(0.0, hi - prev);
      prev = hi;
    }
  }
  return out;
}

}  // namespace phaseage
