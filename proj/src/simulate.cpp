#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <variant>

#include "error.hpp"

namespace phaseage {
namespace {

inline uint64_t splitmix64(uint64_t& z) {
  z += 0x9E3779B97F4A7C15ULL;
  uint64_t r = z;
  r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ULL;
  r = (r ^ (r >> 27)) * 0x94D049BB133111EBULL;
  return r ^ (r >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  for (auto& w : s_) w = splitmix64(z);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;  // xoshiro forbids all-zero state
}

uint64_t RngStream::next_u64() {
  uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::exponential(double rate) {
  return -std::log1p(-uniform()) / rate;  // log1p(-u) with u in [0,1) is finite and <= 0
}

namespace {

int draw_initial_phase(const PhaseTypeDistribution& ph, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < ph.m; ++i) {
    acc += ph.alpha[static_cast<size_t>(i)];
    if (u < acc) return i;
  }
  return ph.m - 1;
}

// Next 0-based phase, or -1 for the jump to death.
int draw_next_phase(const PhaseTypeDistribution& ph, int i, RngStream& rng) {
  double u = rng.uniform() * ph.rate(i + 1);
  double acc = 0.0;
  for (int j = 0; j < ph.m; ++j) {
    if (j == i) continue;
    acc += ph.Q(i, j);
    if (u < acc) return j;
  }
  return -1;
}

}  // namespace

Trajectory simulate_trajectory(const PhaseTypeDistribution& ph, RngStream& rng) {
  Trajectory traj;
  int cur = draw_initial_phase(ph, rng);
  double t = 0.0;
  traj.jump_times.push_back(0.0);
  traj.phases.push_back(cur + 1);
  while (true) {
    t += rng.exponential(ph.rate(cur + 1));
    int nxt = draw_next_phase(ph, cur, rng);
    if (nxt < 0) {
      traj.absorption_time = t;
      return traj;
    }
    cur = nxt;
    traj.jump_times.push_back(t);
    traj.phases.push_back(cur + 1);
  }
}

std::vector<Observation> observe_poisson(const Trajectory& traj, double gamma, RngStream& rng) {
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
          "observation rate must be positive and finite");
  std::vector<Observation> obs;
  double t = 0.0;
  size_t idx = 0;  // scan pointer into the (sorted) jump epochs
  while (true) {
    t += rng.exponential(gamma);
    if (t >= traj.absorption_time) {
      obs.push_back({t, 0});
      return obs;
    }
    while (idx + 1 < traj.jump_times.size() && traj.jump_times[idx + 1] <= t) ++idx;
    obs.push_back({t, traj.phases[idx]});
  }
}

Observation observe_uniform(const Trajectory& traj, double t, RngStream& rng) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::invalid_argument,
          "observation horizon must be positive and finite");
  double epoch = t * rng.uniform();
  if (epoch >= traj.absorption_time) return {epoch, 0};
  size_t idx = 0;
  while (idx + 1 < traj.jump_times.size() && traj.jump_times[idx + 1] <= epoch) ++idx;
  return {epoch, traj.phases[idx]};
}

namespace {

struct SingleObsDraw {
  bool accepted = false;
  double age = 0.0;
  double entry = 0.0;
  double sojourn = 0.0;
};

// Walk the chain only as far as the (pre-drawn) observation epoch. Accept iff
// the individual is alive and in target_0b at that epoch.
SingleObsDraw walk_to_observation(const PhaseTypeDistribution& ph, double tobs, int target_0b,
                                  RngStream& rng) {
  int cur = draw_initial_phase(ph, rng);
  double t = 0.0;
  double entry = 0.0;
  while (true) {
    double soj = rng.exponential(ph.rate(cur + 1));
    if (t + soj > tobs) {
      if (cur != target_0b) return {};
      return {true, tobs, entry, tobs - entry};
    }
    t += soj;
    int nxt = draw_next_phase(ph, cur, rng);
    if (nxt < 0) return {};  // died before being observed
    cur = nxt;
    entry = t;
  }
}

// One inter-observation segment of an accepted multi-observation path:
// start from `start_0b` (or the initial distribution when start_0b < 0),
// draw the next epoch gap, and accept iff alive in target_0b at that gap.
struct SegmentDraw {
  bool accepted = false;
  double gap = 0.0;
};

SegmentDraw multi_segment(const PhaseTypeDistribution& ph, double gamma, int start_0b,
                          int target_0b, RngStream& rng) {
  double gap = rng.exponential(gamma);
  int cur = start_0b >= 0 ? start_0b : draw_initial_phase(ph, rng);
  double t = 0.0;
  while (true) {
    t += rng.exponential(ph.rate(cur + 1));
    if (t > gap) return {cur == target_0b, gap};
    int nxt = draw_next_phase(ph, cur, rng);
    if (nxt < 0) return {};
    cur = nxt;
  }
}

// Residual segment after the final observation: accept iff death happens
// before the next observation epoch; the accepted value is the death delay.
SegmentDraw residual_to_death(const PhaseTypeDistribution& ph, double gamma, int start_0b,
                              RngStream& rng) {
  double gap = rng.exponential(gamma);
  int cur = start_0b;
  double t = 0.0;
  while (true) {
    t += rng.exponential(ph.rate(cur + 1));
    if (t > gap) return {};  // still alive at the next epoch
    int nxt = draw_next_phase(ph, cur, rng);
    if (nxt < 0) return {true, t};
    cur = nxt;
  }
}

constexpr long long kSlotAttemptBudget = 1000000;

double multi_slot_sample(const PhaseTypeDistribution& ph, double gamma, const PhaseSequence& seq,
                         bool want_lifetime, RngStream& rng) {
  double total = 0.0;
  long long attempts = 0;
  int prev = -1;  // first segment starts from the initial distribution
  for (size_t i = 0; i < seq.phases.size(); ++i) {
    int target = seq.phases[i] - 1;
    while (true) {
      require(attempts++ < kSlotAttemptBudget, ErrorCode::insufficient_acceptance,
              "segment acceptance budget exhausted at observation " + std::to_string(i + 1) +
                  " of the requested phase sequence");
      SegmentDraw d = multi_segment(ph, gamma, prev, target, rng);
      if (d.accepted) {
        total += d.gap;
        break;
      }
    }
    prev = target;
  }
  if (!want_lifetime) return total;
  while (true) {
    require(attempts++ < kSlotAttemptBudget, ErrorCode::insufficient_acceptance,
            "death-before-next-observation acceptance budget exhausted");
    SegmentDraw d = residual_to_death(ph, gamma, prev, rng);
    if (d.accepted) return total + d.gap;
  }
}

int resolve_threads(int batch) {
  if (batch > 0) return batch;
  if (const char* env = std::getenv("PA_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(slot, rng, out) over contiguous slot chunks. Each slot gets its own
// substream, and per-thread buckets are concatenated in slot order, so results
// do not depend on the thread count.
void run_slots(long long replications, uint64_t seed, int threads,
               const std::function<void(long long, RngStream&, std::vector<double>&)>& fn,
               std::vector<double>& out) {
  threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, replications)));
  std::vector<std::vector<double>> buckets(static_cast<size_t>(threads));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  long long per = (replications + threads - 1) / threads;
  auto worker = [&](int t) {
    long long lo = static_cast<long long>(t) * per;
    long long hi = std::min(replications, lo + per);
    try {
      for (long long r = lo; r < hi; ++r) {
        RngStream rng(seed, static_cast<uint64_t>(r));
        fn(r, rng, buckets[static_cast<size_t>(t)]);
      }
    } catch (...) {
      errors[static_cast<size_t>(t)] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  size_t total = 0;
  for (auto& b : buckets) total += b.size();
  out.reserve(total);
  for (auto& b : buckets) out.insert(out.end(), b.begin(), b.end());
}

}  // namespace

double EmpiricalCdf::atom_fraction() const {
  if (samples.empty()) return 0.0;
  auto zeros = std::upper_bound(samples.begin(), samples.end(), 0.0) -
               std::lower_bound(samples.begin(), samples.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(samples.size());
}

double EmpiricalCdf::eval(double x) const {
  if (samples.empty()) return 0.0;
  auto it = std::upper_bound(samples.begin(), samples.end(), x);
  return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

double EmpiricalCdf::band_epsilon() const {
  if (samples.empty()) return 1.0;
  return std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(samples.size())));
}

double EmpiricalCdf::mean() const {
  if (samples.empty()) return 0.0;
  double s = 0.0;
  for (double x : samples) s += x;
  return s / static_cast<double>(samples.size());
}

double EmpiricalCdf::ks_statistic(const std::function<double(double)>& cdf) const {
  double d = 0.0;
  auto n = static_cast<double>(samples.size());
  size_t i = 0;
  while (i < samples.size()) {
    // Ties occur only at an atom of the reference law (an atom at zero for
    // the laws produced here); compare whole tie blocks so the lower bound
    // uses the law's left limit, which at an atom differs from cdf(x).
    size_t k = i;
    while (k < samples.size() && samples[k] == samples[i]) ++k;
    double f = cdf(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(k) / n - f));
    if (samples[i] > 0.0) d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    i = k;
  }
  return d;
}

EmpiricalCdf empirical_conditional(const SimulationConfig& cfg, const PhaseTypeDistribution& ph,
                                   SimTarget target, int phase, const PhaseSequence* seq) {
  require(cfg.replications > 0, ErrorCode::invalid_argument, "replications must be positive");
  int threads = resolve_threads(cfg.batch);
  EmpiricalCdf out;
  out.total_replications = cfg.replications;

  bool multi = target == SimTarget::multi_age || target == SimTarget::multi_lifetime;
  if (multi) {
    require(seq != nullptr, ErrorCode::invalid_argument,
            "a phase sequence is required for multi-observation targets");
    const auto* po = std::get_if<PoissonObservation>(&cfg.scheme);
    require(po != nullptr, ErrorCode::unsupported,
            "multi-observation simulation supports the Poisson scheme only");
    require(po->gamma > 0.0 && std::isfinite(po->gamma), ErrorCode::invalid_argument,
            "observation rate must be positive and finite");
    require(seq->phases.size() >= 2, ErrorCode::invalid_argument,
            "a phase sequence needs at least two observations");
    for (int j : seq->phases)
      require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument, "sequence phase out of range");
    bool want_lifetime = target == SimTarget::multi_lifetime;
    require(want_lifetime == seq->terminal_death, ErrorCode::invalid_argument,
            want_lifetime ? "lifetime target requires a sequence ending in observed death"
                          : "age target requires a sequence without observed death");
    double gamma = po->gamma;
    run_slots(
        cfg.replications, cfg.seed, threads,
        [&](long long, RngStream& rng, std::vector<double>& bucket) {
          bucket.push_back(multi_slot_sample(ph, gamma, *seq, want_lifetime, rng));
        },
        out.samples);
    out.accepted = static_cast<long long>(out.samples.size());
  } else {
    require(phase >= 1 && phase <= ph.m, ErrorCode::invalid_argument,
            "conditioning phase out of range");
    int target_0b = phase - 1;
    std::function<double(RngStream&)> draw_epoch;
    if (const auto* po = std::get_if<PoissonObservation>(&cfg.scheme)) {
      double gamma = po->gamma;
      require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
              "observation rate must be positive and finite");
      draw_epoch = [gamma](RngStream& rng) { return rng.exponential(gamma); };
    } else if (const auto* un = std::get_if<UniformObservation>(&cfg.scheme)) {
      double t = un->horizon_t;
      require(t > 0.0 && std::isfinite(t), ErrorCode::invalid_argument,
              "observation horizon must be positive and finite");
      draw_epoch = [t](RngStream& rng) { return t * rng.uniform(); };
    } else {
      fail(ErrorCode::unsupported,
           "simulation supports the Poisson and uniform observation schemes only");
    }
    run_slots(
        cfg.replications, cfg.seed, threads,
        [&](long long, RngStream& rng, std::vector<double>& bucket) {
          double tobs = draw_epoch(rng);
          SingleObsDraw d = walk_to_observation(ph, tobs, target_0b, rng);
          if (!d.accepted) return;
          switch (target) {
            case SimTarget::age: bucket.push_back(d.age); break;
            case SimTarget::entry_time: bucket.push_back(d.entry); break;
            default: bucket.push_back(d.sojourn); break;
          }
        },
        out.samples);
    out.accepted = static_cast<long long>(out.samples.size());
    long long needed = std::max<long long>(1, cfg.min_accepted);
    require(out.accepted >= needed, ErrorCode::insufficient_acceptance,
            "only " + std::to_string(out.accepted) + " of " + std::to_string(cfg.replications) +
                " replications were observed in phase " + std::to_string(phase));
  }
  std::sort(out.samples.begin(), out.samples.end());
  return out;
}

double sequence_frequency(const SimulationConfig& cfg, const PhaseTypeDistribution& ph,
                          const PhaseSequence& seq) {
  require(cfg.replications > 0, ErrorCode::invalid_argument, "replications must be positive");
  const auto* po = std::get_if<PoissonObservation>(&cfg.scheme);
  require(po != nullptr, ErrorCode::unsupported,
          "sequence frequencies are defined for the Poisson scheme only");
  double gamma = po->gamma;
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
          "observation rate must be positive and finite");
  size_t k = seq.phases.size();
  require(k >= 1, ErrorCode::invalid_argument, "phase sequence must be non-empty");
  for (int j : seq.phases)
    require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument, "sequence phase out of range");

  int threads = resolve_threads(cfg.batch);
  std::vector<double> hits;
  run_slots(
      cfg.replications, cfg.seed, threads,
      [&](long long, RngStream& rng, std::vector<double>& bucket) {
        Trajectory traj = simulate_trajectory(ph, rng);
        std::vector<Observation> obs = observe_poisson(traj, gamma, rng);
        if (obs.size() < k) return;
        for (size_t i = 0; i < k; ++i)
          if (obs[i].phase != seq.phases[i]) return;
        if (seq.terminal_death && !(obs.size() > k && obs[k].phase == 0)) return;
        bucket.push_back(1.0);
      },
      hits);
  return static_cast<double>(hits.size()) / static_cast<double>(cfg.replications);
}

}  // namespace phaseage
