#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fit.hpp"
#include "fixtures.hpp"
#include "model_io.hpp"
#include "oracles.hpp"
#include "simulate.hpp"

using namespace phaseage;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  return p;
}

MortalityTable constant_table(double d, int n) {
  MortalityTable t;
  for (int x = 0; x < n; ++x) {
    t.class_starts.push_back(static_cast<double>(x));
    t.rates.push_back(d);
  }
  return t;
}

}  // namespace

TEST_SUITE("fitting") {
  TEST_CASE("both objective routes compute the same weighted squared error") {
    MortalityTable table = fixtures::mortality_fixture();
    CHECK(std::abs(objective_F(fixtures::reference_coxian(), table) -
                   objective_F_via_cdf(fixtures::reference_coxian(), table)) <= 1e-12);

    for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      RngStream rng(seed, 0);
      CoxianParameters p;
      for (int i = 0; i < 4; ++i) p.lambdas.push_back(0.5 + 2.0 * rng.uniform());
      for (int i = 0; i < 3; ++i) p.continue_probs.push_back(rng.uniform());
      CHECK(std::abs(objective_F(p, table) - objective_F_via_cdf(p, table)) <= 1e-12);
    }
  }

  TEST_CASE("reference parameters reproduce the frozen objective value") {
    double f = objective_F(fixtures::reference_coxian(), fixtures::mortality_fixture());
    CHECK(std::abs(f - fixtures::kReferenceObjective) <= 1e-12);
  }

  TEST_CASE("frozen model mortality curve matches the reference parameters") {
    PhaseTypeDistribution cox = coxian(fixtures::reference_coxian());
    for (int x = 0; x <= 12; ++x) {
      CHECK(std::abs(model_mortality(cox, x) - fixtures::kReferenceMortality[x]) <= 1e-12);
    }
  }

  TEST_CASE("perturbing the first rate strictly worsens the reference objective") {
    MortalityTable table = fixtures::mortality_fixture();
    CoxianParameters p = fixtures::reference_coxian();
    double base = objective_F(p, table);
    p.lambdas[0] += 0.5;
    CHECK(objective_F(p, table) > base);
  }

  TEST_CASE("memoryless model has a flat mortality curve with closed-form level") {
    CoxianParameters p;
    p.lambdas = {0.8};
    p.continue_probs = {};
    PhaseTypeDistribution one = coxian(p);
    double level = 1.0 - std::exp(-0.8);
    for (int x : {0, 3, 20}) CHECK(std::abs(model_mortality(one, x) - level) <= 1e-12);
  }

  TEST_CASE("single-phase fits recover the memoryless closed form") {
    for (double d : {0.1, 0.35, 0.6}) {
      MortalityTable table = constant_table(d, 8);
      FitOptions opts;
      opts.starts = 5;
      opts.seed = 11;
      opts.max_evals = 20000;
      FitResult r = fit_coxian(table, 1, opts);
      REQUIRE(r.params.lambdas.size() == 1);
      CHECK(std::abs((1.0 - std::exp(-r.params.lambdas[0])) - d) <= 1e-6);
      CHECK(r.objective_value <= 1e-10);
    }
  }

  TEST_CASE("warm-started fit never loses to its warm start") {
    MortalityTable table = fixtures::mortality_fixture();
    CoxianParameters ref = fixtures::reference_coxian();
    double f_ref = objective_F(ref, table);

    FitOptions opts;
    opts.starts = 4;
    opts.seed = 7;
    opts.max_evals = 20000;
    opts.extra_starts = {ref};
    FitResult r = fit_coxian(table, 13, opts);

    CHECK(r.objective_value <= f_ref + 1e-9);
    CHECK(std::abs(r.objective_value - objective_F(r.params, table)) <= 1e-14);
    // Returned parameters must define a valid sequential model.
    PhaseTypeDistribution fitted = coxian(r.params);
    CHECK(fitted.m == 13);
    CHECK(r.iterations > 0);
  }

  TEST_CASE("reference mortality curve smooths the observed rates") {
    MortalityTable table = fixtures::mortality_fixture();
    PhaseTypeDistribution cox = coxian(fixtures::reference_coxian());
    // The model curve starts near the first observed rate ...
    CHECK(std::abs(model_mortality(cox, 0) - table.rates[0]) <= 0.02);
    // ... and stays within a frozen band of the noisy dense-data rates.
    // The observed rates jump 0.40 -> 0.50 -> 0.33 across ages 4..6, so the
    // smooth curve cannot track them tighter than ~0.16 there (recomputed
    // worst gap at the reference parameters: 0.1563 at x=5).
    for (int x = 0; x <= 7; ++x) {
      CHECK(std::abs(model_mortality(cox, x) - table.rates[static_cast<size_t>(x)]) <= 0.16);
    }
  }

  TEST_CASE("table validation rejects malformed inputs") {
    MortalityTable ok = fixtures::mortality_fixture();
    CHECK_NOTHROW(validate(ok));

    MortalityTable bad = ok;
    bad.rates[3] = 0.0;
    CHECK(oracle::error_code_of([&] { validate(bad); }) == ErrorCode::invalid_argument);
    bad = ok;
    bad.rates[3] = 1.2;
    CHECK(oracle::error_code_of([&] { validate(bad); }) == ErrorCode::invalid_argument);
    bad = ok;
    bad.class_starts[5] = 4.5;
    CHECK(oracle::error_code_of([&] { validate(bad); }) == ErrorCode::invalid_argument);
    bad = ok;
    bad.rates.pop_back();
    CHECK(oracle::error_code_of([&] { validate(bad); }) == ErrorCode::invalid_argument);
    MortalityTable empty;
    CHECK(oracle::error_code_of([&] { validate(empty); }) == ErrorCode::invalid_argument);

    MortalityTable one_class = constant_table(1.0, 1);  // everyone dies in the first class
    CHECK_NOTHROW(validate(one_class));
  }

  TEST_CASE("observed survivals telescope the death rates") {
    MortalityTable table = fixtures::mortality_fixture();
    std::vector<double> s = survivals(table);
    REQUIRE(s.size() == table.rates.size());
    CHECK(s[0] == 1.0);
    double acc = 1.0;
    for (size_t x = 1; x < s.size(); ++x) {
      acc *= 1.0 - table.rates[x - 1];
      CHECK(s[x] == doctest::Approx(acc).epsilon(1e-15));
    }
  }

  TEST_CASE("csv loader round-trips the bundled mortality table") {
    MortalityTable t = load_mortality_csv(std::string(PA_DATA_DIR) + "/mortality.csv");
    MortalityTable expect = fixtures::mortality_fixture();
    REQUIRE(t.rates.size() == expect.rates.size());
    for (size_t i = 0; i < t.rates.size(); ++i) {
      CHECK(t.rates[i] == expect.rates[i]);
      CHECK(t.class_starts[i] == expect.class_starts[i]);
    }

    auto bad_header = write_temp("pa_bad_header.csv", "age,rate\n0,0.1\n");
    CHECK(oracle::error_code_of([&] { load_mortality_csv(bad_header.string()); }) ==
          ErrorCode::io);
    auto bad_value = write_temp("pa_bad_value.csv", "age_class_start,rate\n0,huh\n");
    CHECK(oracle::error_code_of([&] { load_mortality_csv(bad_value.string()); }) ==
          ErrorCode::io);
    CHECK(oracle::error_code_of([&] { load_mortality_csv("/nonexistent/x.csv"); }) ==
          ErrorCode::io);
  }
}
