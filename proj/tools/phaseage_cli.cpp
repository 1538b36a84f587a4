// Command-line front end for the phase-type observation library. Every
// computation goes through the C API in phaseage.h; this file only parses
// arguments, formats CSV/JSON, and records run manifests.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phaseage.h"

namespace {

using ordered_json = nlohmann::ordered_json;

struct ApiError {
  pa_status status;
  std::string message;
};

void check(pa_status st) {
  if (st != PA_OK) throw ApiError{st, pa_last_error()};
}

using ModelPtr = std::unique_ptr<pa_model, decltype(&pa_model_free)>;
using DistPtr = std::unique_ptr<pa_dist, decltype(&pa_dist_free)>;
using TablePtr = std::unique_ptr<pa_table, decltype(&pa_table_free)>;
using EmpiricalPtr = std::unique_ptr<pa_empirical, decltype(&pa_empirical_free)>;

ModelPtr load_model(const std::string& path) {
  pa_model* m = nullptr;
  check(pa_model_load_json(path.c_str(), &m));
  return ModelPtr(m, &pa_model_free);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int n = 200;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.n, &extra) != 3 || g.n < 2 ||
      !(g.hi > g.lo))
    throw ApiError{PA_ERR_INVALID_ARGUMENT, "grid must be lo:hi:n with hi > lo and n >= 2"};
  return g;
}

std::vector<double> grid_points(const GridSpec& g) {
  std::vector<double> pts(static_cast<size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    pts[static_cast<size_t>(i)] = g.lo + (g.hi - g.lo) * static_cast<double>(i) / (g.n - 1);
  return pts;
}

// Default grid: 200 points from 0 to 10x mean lifetime, or to the window
// length under the uniform scheme.
GridSpec default_grid(const pa_model* model, const pa_scheme* scheme) {
  GridSpec g;
  if (scheme && scheme->kind == PA_SCHEME_UNIFORM) {
    g.hi = scheme->horizon;
  } else {
    double mean = 0.0;
    check(pa_model_mean_lifetime(model, &mean));
    g.hi = 10.0 * mean;
  }
  return g;
}

std::vector<int> parse_sequence(const std::string& text) {
  std::vector<int> seq;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      seq.push_back(v);
    } catch (const std::exception&) {
      throw ApiError{PA_ERR_INVALID_ARGUMENT, "sequence must be comma-separated integers"};
    }
  }
  if (seq.empty())
    throw ApiError{PA_ERR_INVALID_ARGUMENT, "sequence must contain at least one phase"};
  return seq;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw ApiError{PA_ERR_IO, "cannot write " + path};
  return out;
}

void write_manifest(const std::string& command, const std::vector<std::string>& argv,
                    const std::vector<std::string>& inputs, const ordered_json& parameters,
                    const std::vector<std::string>& outputs) {
  ordered_json man;
  man["command"] = command;
  man["argv"] = argv;
  man["inputs"] = inputs;
  man["parameters"] = parameters;
  man["outputs"] = outputs;
  man["tool_version"] = pa_version();
  std::ofstream out(outputs.front() + ".manifest.json", std::ios::binary);
  if (!out.good()) throw ApiError{PA_ERR_IO, "cannot write manifest for " + outputs.front()};
  out << man.dump(2) << "\n";
}

int dispatch(const std::vector<std::string>& args);

// ---- subcommand implementations ----

struct SchemeFlags {
  std::string name = "poisson";
  double gamma = 1.0;
  double horizon = 1.0;
  bool gamma_set = false;
  bool horizon_set = false;

  pa_scheme resolve() const {
    pa_scheme s{};
    if (name == "poisson") {
      s.kind = PA_SCHEME_POISSON;
      s.gamma = gamma;
    } else if (name == "uniform") {
      s.kind = PA_SCHEME_UNIFORM;
      if (!horizon_set)
        throw ApiError{PA_ERR_INVALID_ARGUMENT, "uniform scheme requires --t"};
      s.horizon = horizon;
    } else if (name == "rare") {
      s.kind = PA_SCHEME_RARE;
    } else if (name == "birth") {
      s.kind = PA_SCHEME_BIRTH;
    } else {
      throw ApiError{PA_ERR_INVALID_ARGUMENT,
                     "scheme must be one of poisson, uniform, rare, birth"};
    }
    return s;
  }

  void add_to(ordered_json& params) const {
    params["scheme"] = name;
    if (name == "poisson") params["gamma"] = gamma;
    if (name == "uniform") params["t"] = horizon;
  }
};

void add_scheme_flags(CLI::App* cmd, SchemeFlags& f) {
  cmd->add_option("--scheme", f.name, "Observation scheme: poisson, uniform, rare, birth");
  cmd->add_option("--gamma", f.gamma, "Observation rate (poisson scheme)")
      ->check(CLI::PositiveNumber)
      ->each([&f](const std::string&) { f.gamma_set = true; });
  cmd->add_option("--t", f.horizon, "Observation window length (uniform scheme)")
      ->check(CLI::PositiveNumber)
      ->each([&f](const std::string&) { f.horizon_set = true; });
}

void cmd_age_dist(const std::vector<std::string>& argv, const std::string& model_path,
                  const SchemeFlags& flags, int phase, const std::string& grid_text,
                  const std::string& out_path) {
  ModelPtr model = load_model(model_path);
  pa_scheme scheme = flags.resolve();
  GridSpec grid =
      grid_text.empty() ? default_grid(model.get(), &scheme) : parse_grid(grid_text);
  pa_dist* raw = nullptr;
  check(pa_age_distribution(model.get(), scheme, phase, &raw));
  DistPtr dist(raw, &pa_dist_free);

  std::ofstream out = open_output(out_path);
  out << "s,cdf,density\n";
  for (double s : grid_points(grid)) {
    double c = 0.0, d = 0.0;
    check(pa_dist_cdf(dist.get(), s, &c));
    check(pa_dist_density(dist.get(), s, &d));
    out << fmt17(s) << "," << fmt17(c) << "," << fmt17(d) << "\n";
  }
  out.close();

  ordered_json params;
  flags.add_to(params);
  params["phase"] = phase;
  params["grid"] = fmt17(grid.lo) + ":" + fmt17(grid.hi) + ":" + std::to_string(grid.n);
  write_manifest("age-dist", argv, {model_path}, params, {out_path});
}

void cmd_entry_sojourn(const std::vector<std::string>& argv, const std::string& model_path,
                       const SchemeFlags& flags, int phase, const std::string& grid_text,
                       const std::string& out_path) {
  ModelPtr model = load_model(model_path);
  pa_scheme scheme = flags.resolve();
  GridSpec grid =
      grid_text.empty() ? default_grid(model.get(), &scheme) : parse_grid(grid_text);
  pa_dist* raw_entry = nullptr;
  check(pa_entry_time_distribution(model.get(), scheme, phase, &raw_entry));
  DistPtr entry(raw_entry, &pa_dist_free);
  pa_dist* raw_soj = nullptr;
  check(pa_sojourn_distribution(model.get(), scheme, phase, &raw_soj));
  DistPtr sojourn(raw_soj, &pa_dist_free);

  std::ofstream out = open_output(out_path);
  out << "# entry_atom_at_zero=" << fmt17(pa_dist_atom(entry.get())) << "\n";
  if (pa_dist_is_exponential(sojourn.get()))
    out << "# sojourn_exponential_rate=" << fmt17(pa_dist_exponential_rate(sojourn.get()))
        << "\n";
  out << "y,entry_cdf,entry_density,sojourn_cdf,sojourn_density\n";
  for (double y : grid_points(grid)) {
    double ec = 0.0, ed = 0.0, sc = 0.0, sd = 0.0;
    check(pa_dist_cdf(entry.get(), y, &ec));
    check(pa_dist_density(entry.get(), y, &ed));
    check(pa_dist_cdf(sojourn.get(), y, &sc));
    check(pa_dist_density(sojourn.get(), y, &sd));
    out << fmt17(y) << "," << fmt17(ec) << "," << fmt17(ed) << "," << fmt17(sc) << ","
        << fmt17(sd) << "\n";
  }
  out.close();

  ordered_json params;
  flags.add_to(params);
  params["phase"] = phase;
  params["grid"] = fmt17(grid.lo) + ":" + fmt17(grid.hi) + ":" + std::to_string(grid.n);
  write_manifest("entry-sojourn", argv, {model_path}, params, {out_path});
}

void cmd_multi(const std::vector<std::string>& argv, const std::string& model_path, double gamma,
               const std::string& seq_text, bool death, const std::string& grid_text,
               const std::string& out_path) {
  ModelPtr model = load_model(model_path);
  std::vector<int> seq = parse_sequence(seq_text);
  pa_dist* raw_age = nullptr;
  check(pa_multi_age_distribution(model.get(), gamma, seq.data(), static_cast<int>(seq.size()),
                                  &raw_age));
  DistPtr age(raw_age, &pa_dist_free);
  DistPtr lifetime(nullptr, &pa_dist_free);
  if (death) {
    pa_dist* raw_life = nullptr;
    check(pa_multi_lifetime_distribution(model.get(), gamma, seq.data(),
                                         static_cast<int>(seq.size()), &raw_life));
    lifetime.reset(raw_life);
  }
  GridSpec grid = grid_text.empty() ? default_grid(model.get(), nullptr) : parse_grid(grid_text);

  std::ofstream out = open_output(out_path);
  out << "# sequence_probability=" << fmt17(pa_dist_sequence_probability(age.get())) << "\n";
  if (death)
    out << "# death_sequence_probability="
        << fmt17(pa_dist_sequence_probability(lifetime.get())) << "\n";
  out << (death ? "s,age_cdf,age_density,lifetime_cdf,lifetime_density\n"
                : "s,age_cdf,age_density\n");
  for (double s : grid_points(grid)) {
    double c = 0.0, d = 0.0;
    check(pa_dist_cdf(age.get(), s, &c));
    check(pa_dist_density(age.get(), s, &d));
    out << fmt17(s) << "," << fmt17(c) << "," << fmt17(d);
    if (death) {
      double lc = 0.0, ld = 0.0;
      check(pa_dist_cdf(lifetime.get(), s, &lc));
      check(pa_dist_density(lifetime.get(), s, &ld));
      out << "," << fmt17(lc) << "," << fmt17(ld);
    }
    out << "\n";
  }
  out.close();

  ordered_json params;
  params["gamma"] = gamma;
  params["seq"] = seq;
  params["death"] = death;
  params["grid"] = fmt17(grid.lo) + ":" + fmt17(grid.hi) + ":" + std::to_string(grid.n);
  write_manifest("multi", argv, {model_path}, params, {out_path});
}

void cmd_fit(const std::vector<std::string>& argv, const std::string& table_path, int m,
             int starts, unsigned long long seed, const std::string& warm_path,
             const std::string& out_path, std::string curve_path) {
  pa_table* raw_table = nullptr;
  check(pa_table_load_csv(table_path.c_str(), &raw_table));
  TablePtr table(raw_table, &pa_table_free);

  std::vector<double> warm_lambdas, warm_sprobs;
  std::vector<std::string> inputs{table_path};
  if (!warm_path.empty()) {
    std::ifstream in(warm_path);
    if (!in.good()) throw ApiError{PA_ERR_IO, "cannot open " + warm_path};
    ordered_json j;
    try {
      j = ordered_json::parse(in);
      warm_lambdas = j.at("lambdas").get<std::vector<double>>();
      warm_sprobs = j.at("continue_probs").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ApiError{PA_ERR_IO, "failed to parse " + warm_path + ": " + e.what()};
    }
    if (warm_lambdas.size() != static_cast<size_t>(m) ||
        warm_sprobs.size() != static_cast<size_t>(m - 1))
      throw ApiError{PA_ERR_INVALID_ARGUMENT, "warm start has the wrong dimension for m"};
    inputs.push_back(warm_path);
  }

  pa_fit_options opts{starts, seed, 100000, 1e-10};
  std::vector<double> lambdas(static_cast<size_t>(m));
  std::vector<double> sprobs(static_cast<size_t>(m > 1 ? m - 1 : 1));
  double objective = 0.0;
  long long iterations = 0;
  int converged = 0;
  check(pa_fit_coxian(table.get(), m, &opts, warm_lambdas.empty() ? nullptr : warm_lambdas.data(),
                      warm_lambdas.empty() ? nullptr : warm_sprobs.data(), lambdas.data(),
                      sprobs.data(), &objective, &iterations, &converged));

  ordered_json result;
  result["m"] = m;
  result["lambdas"] = lambdas;
  result["continue_probs"] =
      std::vector<double>(sprobs.begin(), sprobs.begin() + (m > 1 ? m - 1 : 0));
  result["objective_value"] = objective;
  result["iterations"] = iterations;
  result["converged"] = converged != 0;
  std::ofstream out = open_output(out_path);
  out << result.dump(2) << "\n";
  out.close();

  if (curve_path.empty()) curve_path = out_path + ".curve.csv";
  pa_model* raw_model = nullptr;
  check(pa_model_coxian(lambdas.data(), m > 1 ? sprobs.data() : nullptr, m, &raw_model));
  ModelPtr fitted(raw_model, &pa_model_free);
  std::ofstream curve = open_output(curve_path);
  curve << "age,observed_rate,fitted_rate\n";
  int n = pa_table_size(table.get());
  for (int x = 0; x < n; ++x) {
    double dbar = 0.0;
    check(pa_model_mortality(fitted.get(), x, &dbar));
    curve << x << "," << fmt17(pa_table_rate(table.get(), x)) << "," << fmt17(dbar) << "\n";
  }
  curve.close();

  ordered_json params;
  params["m"] = m;
  params["starts"] = starts;
  params["seed"] = seed;
  if (!warm_path.empty()) params["warm_start"] = warm_path;
  write_manifest("fit", argv, inputs, params, {out_path, curve_path});
}

void cmd_pyramid(const std::vector<std::string>& argv, const std::string& model_path,
                 const std::string& fp_path, const std::string& classes_text,
                 const std::string& out_path) {
  ModelPtr model = load_model(model_path);
  int m = pa_model_dim(model.get());
  std::vector<double> fp(static_cast<size_t>(m));
  check(pa_load_phase_frequencies(fp_path.c_str(), m, fp.data()));

  std::vector<double> class_starts;
  if (classes_text.empty()) {
    for (int x = 0; x <= 10; ++x) class_starts.push_back(static_cast<double>(x));
  } else {
    std::stringstream ss(classes_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        class_starts.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ApiError{PA_ERR_INVALID_ARGUMENT, "classes must be comma-separated numbers"};
      }
    }
  }
  std::vector<double> freqs(class_starts.size());
  check(pa_pyramid(model.get(), fp.data(), class_starts.data(),
                   static_cast<int>(class_starts.size()), freqs.data()));

  std::ofstream out = open_output(out_path);
  out << "class_start,frequency\n";
  for (size_t i = 0; i < class_starts.size(); ++i)
    out << fmt17(class_starts[i]) << "," << fmt17(freqs[i]) << "\n";
  out.close();

  ordered_json params;
  params["classes"] = class_starts;
  write_manifest("pyramid", argv, {model_path, fp_path}, params, {out_path});
}

void cmd_simulate(const std::vector<std::string>& argv, const std::string& model_path,
                  const SchemeFlags& flags, const std::string& target_name, int phase,
                  const std::string& seq_text, long long n, unsigned long long seed,
                  const std::string& grid_text, const std::string& out_path) {
  ModelPtr model = load_model(model_path);
  pa_scheme scheme = flags.resolve();

  int target = -1;
  if (target_name == "age")
    target = PA_TARGET_AGE;
  else if (target_name == "entry")
    target = PA_TARGET_ENTRY_TIME;
  else if (target_name == "sojourn")
    target = PA_TARGET_SOJOURN;
  else if (target_name == "multi-age")
    target = PA_TARGET_MULTI_AGE;
  else if (target_name == "multi-lifetime")
    target = PA_TARGET_MULTI_LIFETIME;
  else
    throw ApiError{PA_ERR_INVALID_ARGUMENT,
                   "target must be age, entry, sojourn, multi-age, or multi-lifetime"};

  bool is_multi = target == PA_TARGET_MULTI_AGE || target == PA_TARGET_MULTI_LIFETIME;
  std::vector<int> seq;
  if (is_multi) {
    if (seq_text.empty())
      throw ApiError{PA_ERR_INVALID_ARGUMENT, "multi targets require --seq"};
    seq = parse_sequence(seq_text);
  } else if (phase < 1) {
    throw ApiError{PA_ERR_INVALID_ARGUMENT, "single-observation targets require --phase"};
  }

  pa_sim_options opts{n, seed, 0, 1000};
  pa_empirical* raw = nullptr;
  check(pa_simulate(model.get(), scheme, target, phase, seq.empty() ? nullptr : seq.data(),
                    static_cast<int>(seq.size()), target == PA_TARGET_MULTI_LIFETIME ? 1 : 0,
                    &opts, &raw));
  EmpiricalPtr emp(raw, &pa_empirical_free);

  GridSpec grid =
      grid_text.empty() ? default_grid(model.get(), &scheme) : parse_grid(grid_text);
  std::ofstream out = open_output(out_path);
  out << "# total=" << pa_empirical_total(emp.get()) << "\n";
  out << "# accepted=" << pa_empirical_accepted(emp.get()) << "\n";
  out << "# atom_fraction=" << fmt17(pa_empirical_atom_fraction(emp.get())) << "\n";
  out << "grid_point,empirical_cdf,lower_band,upper_band\n";
  for (double s : grid_points(grid)) {
    double c = 0.0, lo = 0.0, hi = 0.0;
    check(pa_empirical_cdf(emp.get(), s, &c, &lo, &hi));
    out << fmt17(s) << "," << fmt17(c) << "," << fmt17(lo) << "," << fmt17(hi) << "\n";
  }
  out.close();

  ordered_json params;
  flags.add_to(params);
  params["target"] = target_name;
  if (!is_multi) params["phase"] = phase;
  if (is_multi) params["seq"] = seq;
  params["n"] = n;
  params["seed"] = seed;
  params["grid"] = fmt17(grid.lo) + ":" + fmt17(grid.hi) + ":" + std::to_string(grid.n);
  write_manifest("simulate", argv, {model_path}, params, {out_path});
}

int cmd_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in.good()) throw ApiError{PA_ERR_IO, "cannot open " + manifest_path};
  ordered_json man;
  try {
    man = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ApiError{PA_ERR_IO, "failed to parse " + manifest_path + ": " + e.what()};
  }
  std::vector<std::string> argv;
  try {
    argv = man.at("argv").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw ApiError{PA_ERR_IO, manifest_path + " has no argv list"};
  }
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Conditional age, entry-time, sojourn, and lifetime laws for "
               "phase-type lifetimes under randomized observation"};
  app.set_version_flag("--version", pa_version());
  app.require_subcommand(1);

  // age-dist
  auto* age = app.add_subcommand("age-dist", "Conditional age distribution at the observation");
  std::string age_model, age_grid, age_out;
  SchemeFlags age_flags;
  int age_phase = 1;
  age->add_option("--model", age_model, "Model JSON file")->required();
  add_scheme_flags(age, age_flags);
  age->add_option("--phase", age_phase, "Observed phase (1-based)")->required();
  age->add_option("--grid", age_grid, "Evaluation grid lo:hi:n");
  age->add_option("--out", age_out, "Output CSV path")->required();

  // entry-sojourn
  auto* es = app.add_subcommand("entry-sojourn",
                                "Conditional entry-time and sojourn distributions");
  std::string es_model, es_grid, es_out;
  SchemeFlags es_flags;
  int es_phase = 1;
  es->add_option("--model", es_model, "Model JSON file")->required();
  add_scheme_flags(es, es_flags);
  es->add_option("--phase", es_phase, "Observed phase (1-based)")->required();
  es->add_option("--grid", es_grid, "Evaluation grid lo:hi:n");
  es->add_option("--out", es_out, "Output CSV path")->required();

  // multi
  auto* mu = app.add_subcommand("multi", "Age (and lifetime) laws for an observed phase sequence");
  std::string mu_model, mu_seq, mu_grid, mu_out;
  double mu_gamma = 1.0;
  bool mu_death = false;
  mu->add_option("--model", mu_model, "Model JSON file")->required();
  mu->add_option("--gamma", mu_gamma, "Observation rate")->check(CLI::PositiveNumber);
  mu->add_option("--seq", mu_seq, "Observed phase sequence, e.g. 1,2,3,3,4")->required();
  mu->add_flag("--death", mu_death, "Also report lifetime given death before the next epoch");
  mu->add_option("--grid", mu_grid, "Evaluation grid lo:hi:n");
  mu->add_option("--out", mu_out, "Output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a Coxian model to a mortality table");
  std::string fit_table, fit_warm, fit_out, fit_curve;
  int fit_m = 13, fit_starts = 20;
  unsigned long long fit_seed = 7;
  fit->add_option("--table", fit_table, "Mortality CSV (age_class_start,rate)")->required();
  fit->add_option("--m", fit_m, "Number of phases")->check(CLI::PositiveNumber);
  fit->add_option("--starts", fit_starts, "Multi-start count")->check(CLI::PositiveNumber);
  fit->add_option("--seed", fit_seed, "Jitter seed");
  fit->add_option("--warm-start", fit_warm, "JSON file with lambdas/continue_probs warm start");
  fit->add_option("--out", fit_out, "Output JSON path")->required();
  fit->add_option("--curve", fit_curve, "Mortality-curve CSV path (default: <out>.curve.csv)");

  // pyramid
  auto* pyr = app.add_subcommand("pyramid", "Age pyramid from phase frequencies");
  std::string pyr_model, pyr_fp, pyr_classes, pyr_out;
  pyr->add_option("--model", pyr_model, "Model JSON file")->required();
  pyr->add_option("--fp", pyr_fp, "Phase frequency CSV (phase,frequency)")->required();
  pyr->add_option("--classes", pyr_classes, "Comma-separated class starts (default 0..10)");
  pyr->add_option("--out", pyr_out, "Output CSV path")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo empirical distribution");
  std::string sim_model, sim_target = "age", sim_seq, sim_grid, sim_out;
  SchemeFlags sim_flags;
  int sim_phase = 0;
  long long sim_n = 1000000;
  unsigned long long sim_seed = 1;
  sim->add_option("--model", sim_model, "Model JSON file")->required();
  add_scheme_flags(sim, sim_flags);
  sim->add_option("--target", sim_target,
                  "age, entry, sojourn, multi-age, or multi-lifetime");
  sim->add_option("--phase", sim_phase, "Conditioning phase for single-observation targets");
  sim->add_option("--seq", sim_seq, "Phase sequence for multi targets");
  sim->add_option("--n", sim_n, "Replications (accepted paths for multi targets)")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Simulation seed");
  sim->add_option("--grid", sim_grid, "Evaluation grid lo:hi:n");
  sim->add_option("--out", sim_out, "Output CSV path")->required();

  // rerun
  auto* rr = app.add_subcommand("rerun", "Re-execute a recorded run manifest");
  std::string rr_manifest;
  rr->add_option("--manifest", rr_manifest, "Manifest JSON path")->required();

  std::vector<char*> cargv;
  static const char* prog = "phaseage";
  cargv.push_back(const_cast<char*>(prog));
  std::vector<std::string> owned(args);
  for (auto& a : owned) cargv.push_back(a.data());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err;
    err["error"]["code"] = "PA_ERR_INVALID_ARGUMENT";
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }

  if (age->parsed())
    cmd_age_dist(args, age_model, age_flags, age_phase, age_grid, age_out);
  else if (es->parsed())
    cmd_entry_sojourn(args, es_model, es_flags, es_phase, es_grid, es_out);
  else if (mu->parsed())
    cmd_multi(args, mu_model, mu_gamma, mu_seq, mu_death, mu_grid, mu_out);
  else if (fit->parsed())
    cmd_fit(args, fit_table, fit_m, fit_starts, fit_seed, fit_warm, fit_out, fit_curve);
  else if (pyr->parsed())
    cmd_pyramid(args, pyr_model, pyr_fp, pyr_classes, pyr_out);
  else if (sim->parsed())
    cmd_simulate(args, sim_model, sim_flags, sim_target, sim_phase, sim_seq, sim_n, sim_seed,
                 sim_grid, sim_out);
  else if (rr->parsed())
    return cmd_rerun(rr_manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const ApiError& e) {
    ordered_json err;
    err["error"]["code"] = pa_status_name(e.status);
    err["error"]["message"] = e.message;
    std::cerr << err.dump() << "\n";
    return e.status == PA_ERR_INSUFFICIENT_ACCEPTANCE ? 3 : 2;
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"]["code"] = "PA_ERR_NUMERIC";
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
