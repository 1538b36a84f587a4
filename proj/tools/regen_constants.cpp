// Prints the frozen regression constants used by the test fixtures, formatted
// for pasting into tests/fixtures.hpp. Run after any intentional change to the
// reference model, mortality table, or pyramid defaults.
#include <cstdio>

#include "fit.hpp"
#include "fixtures.hpp"
#include "multi.hpp"
#include "ph_model.hpp"
#include "pyramid.hpp"

using namespace phaseage;

namespace {
void print(const char* name, double v) { std::printf("%s = %.17g;\n", name, v); }
}  // namespace

int main() {
  MortalityTable table = fixtures::mortality_fixture();
  CoxianParameters ref = fixtures::reference_coxian();
  PhaseTypeDistribution cox = coxian(ref);

  print("inline constexpr double kReferenceObjective", objective_F(ref, table));

  std::printf("inline constexpr double kReferenceMortality[13] = {\n");
  for (int x = 0; x <= 12; ++x)
    std::printf("    %.17g%s\n", model_mortality(cox, x), x < 12 ? "," : "};");

  PhaseFrequencies fp;
  fp.freqs.assign(13, 1.0 / 13.0);
  AgePyramid pyr = compute_pyramid(cox, fp);
  std::printf("inline constexpr double kUniformFpPyramid[11] = {\n");
  for (size_t i = 0; i < pyr.freqs.size(); ++i)
    std::printf("    %.17g%s\n", pyr.freqs[i], i + 1 < pyr.freqs.size() ? "," : "};");

  PhaseTypeDistribution toy = fixtures::toy_model();
  PhaseSequence s1, s2;
  s1.phases = fixtures::kSeq1;
  s2.phases = fixtures::kSeq2;
  print("inline constexpr double kSeq1AliveProbability",
        age_at_kth_observation(toy, 1.0, s1).sequence_probability);
  print("inline constexpr double kSeq2AliveProbability",
        age_at_kth_observation(toy, 1.0, s2).sequence_probability);
  s1.terminal_death = true;
  s2.terminal_death = true;
  print("inline constexpr double kSeq1DeathProbability",
        lifetime_given_death_at_next(toy, 1.0, s1).sequence_probability);
  print("inline constexpr double kSeq2DeathProbability",
        lifetime_given_death_at_next(toy, 1.0, s2).sequence_probability);
  return 0;
}
