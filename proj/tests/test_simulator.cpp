#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "simulate.hpp"

using namespace phaseage;

namespace {

EmpiricalCdf make_empirical(std::vector<double> samples, long long total) {
  EmpiricalCdf e;
  std::sort(samples.begin(), samples.end());
  e.accepted = static_cast<long long>(samples.size());
  e.samples = std::move(samples);
  e.total_replications = total;
  return e;
}

double sample_sd(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("substream design makes results independent of worker count") {
    SimulationConfig cfg;
    cfg.replications = 100000;
    cfg.seed = 123;
    cfg.scheme = PoissonObservation{1.0};

    cfg.batch = 1;
    EmpiricalCdf serial =
        empirical_conditional(cfg, fixtures::toy_model(), SimTarget::age, 4);
    cfg.batch = 4;
    EmpiricalCdf quad = empirical_conditional(cfg, fixtures::toy_model(), SimTarget::age, 4);
    EmpiricalCdf again = empirical_conditional(cfg, fixtures::toy_model(), SimTarget::age, 4);

    REQUIRE(serial.accepted == quad.accepted);
    CHECK(serial.samples == quad.samples);
    CHECK(quad.samples == again.samples);
    CHECK(serial.total_replications == 100000);
  }

  TEST_CASE("raw trajectories reproduce chain-level statistics") {
    SUBCASE("single-phase absorption time is exponential") {
      CoxianParameters p;
      p.lambdas = {2.0};
      p.continue_probs = {};
      PhaseTypeDistribution one = coxian(p);
      RngStream rng(42, 0);
      const int n = 200000;
      double sum = 0.0;
      std::vector<double> vals;
      vals.reserve(n);
      for (int i = 0; i < n; ++i) {
        Trajectory tr = simulate_trajectory(one, rng);
        REQUIRE(tr.phases.size() == 1);
        REQUIRE(tr.phases[0] == 1);
        sum += tr.absorption_time;
        vals.push_back(tr.absorption_time);
      }
      double mean = sum / n;
      double se = sample_sd(vals) / std::sqrt(static_cast<double>(n));
      CHECK(std::abs(mean - 0.5) <= 3.0 * se);
    }

    SUBCASE("per-phase holding times match the total exit rates") {
      PhaseTypeDistribution ph = fixtures::toy_model_mixed_start();
      RngStream rng(7, 0);
      std::vector<std::vector<double>> hold(6);
      for (int i = 0; i < 50000; ++i) {
        Trajectory tr = simulate_trajectory(ph, rng);
        for (size_t s = 0; s < tr.phases.size(); ++s) {
          double end =
              (s + 1 < tr.jump_times.size()) ? tr.jump_times[s + 1] : tr.absorption_time;
          hold[static_cast<size_t>(tr.phases[s])].push_back(end - tr.jump_times[s]);
        }
      }
      for (int j = 1; j <= 5; ++j) {
        const auto& xs = hold[static_cast<size_t>(j)];
        REQUIRE(xs.size() > 1000);
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double se = sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
        CHECK(std::abs(mean - 1.0 / ph.rate(j)) <= 3.0 * se);
      }
    }

    SUBCASE("sequential chains never revisit earlier phases") {
      CoxianParameters p;
      p.lambdas = {1.0, 2.0, 3.0};
      p.continue_probs = {0.5, 0.5};
      PhaseTypeDistribution cox = coxian(p);
      RngStream rng(9, 0);
      for (int i = 0; i < 5000; ++i) {
        Trajectory tr = simulate_trajectory(cox, rng);
        for (size_t s = 1; s < tr.phases.size(); ++s) CHECK(tr.phases[s] > tr.phases[s - 1]);
      }
    }

    SUBCASE("occupancy at a fixed time matches the transient law") {
      PhaseTypeDistribution ph = fixtures::toy_model();
      RngStream rng(11, 0);
      const int n = 200000;
      const double x = 1.0;
      int hits = 0;
      for (int i = 0; i < n; ++i) {
        Trajectory tr = simulate_trajectory(ph, rng);
        if (tr.absorption_time <= x) continue;
        size_t s = 0;
        while (s + 1 < tr.jump_times.size() && tr.jump_times[s + 1] <= x) ++s;
        if (tr.phases[s] == 4) ++hits;
      }
      double p_hat = static_cast<double>(hits) / n;
      double p_true = phase_probability(ph, x, 4);
      double se = std::sqrt(p_true * (1.0 - p_true) / n);
      CHECK(std::abs(p_hat - p_true) <= 3.0 * se);
    }
  }

  TEST_CASE("observation overlays have the advertised marginals") {
    PhaseTypeDistribution ph = fixtures::toy_model();

    SUBCASE("first sampling epoch is exponential regardless of the path") {
      RngStream rng(21, 0);
      const int n = 100000;
      double gamma = 1.3;
      std::vector<double> firsts;
      firsts.reserve(n);
      std::vector<double> alive_counts;
      alive_counts.reserve(n);
      for (int i = 0; i < n; ++i) {
        Trajectory tr = simulate_trajectory(ph, rng);
        auto obs = observe_poisson(tr, gamma, rng);
        REQUIRE(!obs.empty());
        firsts.push_back(obs[0].time);
        int alive = 0;
        for (const auto& o : obs)
          if (o.phase > 0) ++alive;
        alive_counts.push_back(static_cast<double>(alive));
        CHECK(obs.back().phase == 0);  // truncated at the epoch that finds death
        for (size_t s = 0; s + 1 < obs.size(); ++s) CHECK(obs[s].phase > 0);
      }
      EmpiricalCdf e = make_empirical(firsts, n);
      CHECK(e.ks_statistic([&](double x) { return 1.0 - std::exp(-gamma * x); }) <=
            1.7 / std::sqrt(static_cast<double>(n)));

      // E[alive observations] = gamma * E[lifetime] by Poisson thinning.
      double mean = 0.0;
      for (double c : alive_counts) mean += c;
      mean /= n;
      double se = sample_sd(alive_counts) / std::sqrt(static_cast<double>(n));
      CHECK(std::abs(mean - gamma * mean_lifetime(ph)) <= 3.0 * se);
    }

    SUBCASE("window sampling finds the individual dead at the right rate") {
      RngStream rng(22, 0);
      const int n = 200000;
      double t = 2.0;
      int dead = 0;
      for (int i = 0; i < n; ++i) {
        Trajectory tr = simulate_trajectory(ph, rng);
        Observation o = observe_uniform(tr, t, rng);
        CHECK(o.time <= t);
        if (o.phase == 0) ++dead;
      }
      double p_true = quadrature([&](double s) { return lifetime_cdf(ph, s); }, 0.0, t, 1e-11) / t;
      double p_hat = static_cast<double>(dead) / n;
      double se = std::sqrt(p_true * (1.0 - p_true) / n);
      CHECK(std::abs(p_hat - p_true) <= 3.0 * se);
    }
  }

  TEST_CASE("single-observation samplers land inside uniform confidence bands") {
    SUBCASE("poisson scheme on the concentrated start") {
      PhaseTypeDistribution ph = fixtures::toy_model();
      SimulationConfig cfg;
      cfg.replications = 1000000;
      cfg.seed = 31;
      cfg.scheme = PoissonObservation{1.0};
      int j = 4;
      double pobs = phase_observation_probability(ph, PoissonObservation{1.0}, j);

      EmpiricalCdf age = empirical_conditional(cfg, ph, SimTarget::age, j);
      double frac = static_cast<double>(age.accepted) / static_cast<double>(age.total_replications);
      CHECK(std::abs(frac - pobs) <=
            3.0 * std::sqrt(pobs * (1.0 - pobs) / static_cast<double>(age.total_replications)));
      MixedDistribution age_law = age_given_phase(ph, PoissonObservation{1.0}, j);
      CHECK(age.ks_statistic(age_law.cdf) <= age.band_epsilon());

      cfg.seed = 32;
      EmpiricalCdf entry = empirical_conditional(cfg, ph, SimTarget::entry_time, j);
      MixedDistribution entry_law = entry_time_given_phase(ph, PoissonObservation{1.0}, j);
      CHECK(entry.ks_statistic(entry_law.cdf) <= entry.band_epsilon());
      double atom_se = std::sqrt(entry_law.atom_at_zero * (1.0 - entry_law.atom_at_zero) /
                                 static_cast<double>(entry.accepted));
      CHECK(std::abs(entry.atom_fraction() - entry_law.atom_at_zero) <= 3.0 * atom_se);

      cfg.seed = 33;
      EmpiricalCdf soj = empirical_conditional(cfg, ph, SimTarget::sojourn, j);
      double rate = 1.0 + ph.rate(j);
      CHECK(std::abs(soj.mean() - 1.0 / rate) <=
            3.0 / (rate * std::sqrt(static_cast<double>(soj.accepted))));
      CHECK(soj.ks_statistic([&](double x) { return 1.0 - std::exp(-rate * x); }) <=
            soj.band_epsilon());
    }

    SUBCASE("window scheme on the spread-out start") {
      PhaseTypeDistribution ph = fixtures::toy_model_mixed_start();
      SimulationConfig cfg;
      cfg.replications = 600000;
      cfg.seed = 41;
      cfg.scheme = UniformObservation{2.0};
      int j = 4;
      EmpiricalCdf age = empirical_conditional(cfg, ph, SimTarget::age, j);
      CHECK(age.ks_statistic(age_given_phase(ph, UniformObservation{2.0}, j).cdf) <=
            age.band_epsilon());
      for (double s : age.samples) CHECK(s <= 2.0);

      cfg.seed = 42;
      EmpiricalCdf entry = empirical_conditional(cfg, ph, SimTarget::entry_time, j);
      MixedDistribution entry_law = entry_time_given_phase(ph, UniformObservation{2.0}, j);
      CHECK(entry.ks_statistic(entry_law.cdf) <= entry.band_epsilon());

      cfg.seed = 43;
      EmpiricalCdf soj = empirical_conditional(cfg, ph, SimTarget::sojourn, j);
      CHECK(soj.ks_statistic(sojourn_given_phase(ph, UniformObservation{2.0}, j).cdf) <=
            soj.band_epsilon());
    }

    SUBCASE("wide sequential model round-trips through its own law") {
      PhaseTypeDistribution cox = coxian(fixtures::reference_coxian());
      double gamma = 0.5;
      int best = 1;
      double best_p = 0.0;
      for (int j = 1; j <= cox.m; ++j) {
        double p = phase_observation_probability(cox, PoissonObservation{gamma}, j);
        if (p > best_p) {
          best_p = p;
          best = j;
        }
      }
      SimulationConfig cfg;
      cfg.replications = 400000;
      cfg.seed = 51;
      cfg.scheme = PoissonObservation{gamma};
      EmpiricalCdf age = empirical_conditional(cfg, cox, SimTarget::age, best);
      CHECK(age.ks_statistic(age_given_phase(cox, PoissonObservation{gamma}, best).cdf) <=
            age.band_epsilon());
    }
  }

  TEST_CASE("whole-trajectory counting reproduces sequence probabilities") {
    PhaseTypeDistribution ph = fixtures::toy_model();
    double gamma = 1.0;

    auto check_freq = [&](const std::vector<int>& phases, bool death, long long n,
                          uint64_t seed) {
      PhaseSequence seq;
      seq.phases = phases;
      seq.terminal_death = death;
      double truth = death ? lifetime_given_death_at_next(ph, gamma, seq).sequence_probability
                           : age_at_kth_observation(ph, gamma, seq).sequence_probability;
      SimulationConfig cfg;
      cfg.replications = n;
      cfg.seed = seed;
      cfg.scheme = PoissonObservation{gamma};
      double freq = sequence_frequency(cfg, ph, seq);
      double se = std::sqrt(truth * (1.0 - truth) / static_cast<double>(n));
      CHECK(std::abs(freq - truth) <= 3.0 * se + 1e-12);
    };

    check_freq({2, 3}, false, 400000, 61);
    check_freq({1, 2}, true, 400000, 62);
    check_freq(fixtures::kSeq1, false, 1000000, 63);
  }

  TEST_CASE("segment-regenerated multi samplers match the analytic laws") {
    PhaseTypeDistribution ph = fixtures::toy_model();
    double gamma = 1.0;

    auto run_multi = [&](const std::vector<int>& phases, bool death, long long n,
                         uint64_t seed) {
      PhaseSequence seq;
      seq.phases = phases;
      seq.terminal_death = death;
      SimulationConfig cfg;
      cfg.replications = n;
      cfg.seed = seed;
      cfg.scheme = PoissonObservation{gamma};
      SimTarget target = death ? SimTarget::multi_lifetime : SimTarget::multi_age;
      EmpiricalCdf e = empirical_conditional(cfg, ph, target, 0, &seq);
      REQUIRE(e.accepted == n);
      auto law = death ? lifetime_given_death_at_next(ph, gamma, seq)
                       : age_at_kth_observation(ph, gamma, seq);
      CHECK(e.ks_statistic(law.cdf) <= e.band_epsilon());
    };

    run_multi({1, 2}, false, 30000, 71);
    run_multi(fixtures::kSeq1, false, 20000, 72);
    run_multi({1, 2}, true, 20000, 73);
  }

  TEST_CASE("hopeless conditioning is reported, not silently looped") {
    PhaseTypeDistribution ph = fixtures::toy_model();
    SimulationConfig cfg;
    cfg.replications = 2000;
    cfg.seed = 81;
    cfg.scheme = PoissonObservation{1.0};
    CHECK(oracle::error_code_of([&] {
            empirical_conditional(cfg, ph, SimTarget::age, 4);
          }) == ErrorCode::insufficient_acceptance);

    CoxianParameters p;
    p.lambdas = {1.0, 1.0, 1.0};
    p.continue_probs = {1.0, 0.0};
    PhaseTypeDistribution blocked = coxian(p);
    PhaseSequence impossible;
    impossible.phases = {1, 3};
    SimulationConfig mcfg;
    mcfg.replications = 10;
    mcfg.seed = 82;
    mcfg.scheme = PoissonObservation{1.0};
    CHECK(oracle::error_code_of([&] {
            empirical_conditional(mcfg, blocked, SimTarget::multi_age, 0, &impossible);
          }) == ErrorCode::insufficient_acceptance);
  }

  TEST_CASE("unsupported schemes and malformed requests are typed errors") {
    PhaseTypeDistribution ph = fixtures::toy_model();
    SimulationConfig cfg;
    cfg.replications = 1000;
    cfg.min_accepted = 1;

    cfg.scheme = RareLimit{};
    CHECK(oracle::error_code_of(
              [&] { empirical_conditional(cfg, ph, SimTarget::age, 1); }) ==
          ErrorCode::unsupported);
    cfg.scheme = PoissonBirth{};
    CHECK(oracle::error_code_of(
              [&] { empirical_conditional(cfg, ph, SimTarget::age, 1); }) ==
          ErrorCode::unsupported);

    cfg.scheme = PoissonObservation{1.0};
    CHECK(oracle::error_code_of(
              [&] { empirical_conditional(cfg, ph, SimTarget::age, 0); }) ==
          ErrorCode::invalid_argument);
    CHECK(oracle::error_code_of(
              [&] { empirical_conditional(cfg, ph, SimTarget::multi_age, 0, nullptr); }) ==
          ErrorCode::invalid_argument);

    PhaseSequence seq;
    seq.phases = {1, 2};
    seq.terminal_death = true;
    CHECK(oracle::error_code_of([&] {
            empirical_conditional(cfg, ph, SimTarget::multi_age, 0, &seq);
          }) == ErrorCode::invalid_argument);
    seq.terminal_death = false;
    cfg.scheme = UniformObservation{2.0};
    CHECK(oracle::error_code_of([&] {
            empirical_conditional(cfg, ph, SimTarget::multi_age, 0, &seq);
          }) == ErrorCode::unsupported);
  }

  TEST_CASE("empirical summaries behave like a right-continuous cdf") {
    EmpiricalCdf e = make_empirical({0.0, 0.0, 1.0, 2.0}, 8);
    CHECK(e.atom_fraction() == doctest::Approx(0.5));
    CHECK(e.eval(-0.5) == 0.0);
    CHECK(e.eval(0.0) == doctest::Approx(0.5));
    CHECK(e.eval(1.5) == doctest::Approx(0.75));
    CHECK(e.eval(2.0) == doctest::Approx(1.0));
    CHECK(e.eval(9.0) == doctest::Approx(1.0));
    CHECK(e.mean() == doctest::Approx(0.75));
    CHECK(e.band_epsilon() ==
          doctest::Approx(std::sqrt(std::log(2.0 / 0.01) / (2.0 * 4.0))).epsilon(1e-12));
  }
}
