// pbc: command-line front end for prediction-based control experiments on
// one-dimensional maps.  Subcommands: analyze, simulate, bifurcate, region,
// envelope, verify.  Every file-producing run also writes a <out>.meta.json
// sidecar with the full configuration so the run can be reproduced exactly.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "npbc/dynamics.hpp"
#include "npbc/io.hpp"
#include "npbc/maps.hpp"
#include "npbc/noise.hpp"
#include "npbc/stability.hpp"
#include "npbc/sweep.hpp"
#include "npbc/verify.hpp"

using nlohmann::json;
using namespace npbc;

namespace {

struct Config {
  std::string map_name = "ricker";
  std::vector<std::string> param_kv;          // repeated "k=v"
  std::string noise = "bernoulli";            // name, inline JSON, or @file
  double alpha = 0.0;
  double ell = 0.0;
  double x0 = 0.5;
  std::int64_t steps = 10000;
  int paths = 200;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;

  // Subcommand-specific grids.
  double alpha_min = 0.0, alpha_max = 0.6;
  int alpha_steps = 100;
  double ell_min = 0.0, ell_max = 0.3;
  int ell_steps = 100;
  std::int64_t transient = 1000;
  int samples = 100;
  std::string filter;
  std::optional<double> envelope_alpha;
};

void add_common_flags(CLI::App* cmd, Config& c) {
  cmd->add_option("--map", c.map_name, "Built-in map name (see --help for the list)");
  cmd->add_option("--param", c.param_kv, "Map parameter k=v (repeatable)");
  cmd->add_option("--noise", c.noise,
                  "Noise law: bernoulli, uniform, inline JSON, or @file.json");
  cmd->add_option("--alpha", c.alpha, "Mean control gain");
  cmd->add_option("--ell", c.ell, "Noise amplitude in the gain");
  cmd->add_option("--x0", c.x0, "Initial state (positive)");
  cmd->add_option("--steps", c.steps, "Iteration horizon");
  cmd->add_option("--paths", c.paths, "Sample paths per cell");
  cmd->add_option("--seed", c.seed, "Master seed (random and printed if omitted)");
  cmd->add_option("--out", c.out, "Output file path");
  cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--config", "JSON config file (flags override it)")
      ->check(CLI::ExistingFile);
}

// Precedence is CLI > config file > defaults: the config file is loaded into
// the Config before CLI11 parses, so explicitly passed flags overwrite it.
void preload_config(int argc, char** argv, Config& c) {
  std::string path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") path = argv[i + 1];
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  json doc = json::parse(in);
  auto get = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("map", c.map_name);
  get("noise", c.noise);
  get("alpha", c.alpha);
  get("ell", c.ell);
  get("x0", c.x0);
  get("steps", c.steps);
  get("paths", c.paths);
  get("out", c.out);
  get("workers", c.workers);
  get("alpha_min", c.alpha_min);
  get("alpha_max", c.alpha_max);
  get("alpha_steps", c.alpha_steps);
  get("ell_min", c.ell_min);
  get("ell_max", c.ell_max);
  get("ell_steps", c.ell_steps);
  get("transient", c.transient);
  get("samples", c.samples);
  if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("params"))
    for (auto& [k, v] : doc.at("params").items())
      c.param_kv.push_back(k + "=" + std::to_string(v.get<double>()));
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--param expects k=v, got: " + kv);
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

NoiseSpec parse_noise(const std::string& s) {
  if (s == "bernoulli") return NoiseSpec::bernoulli();
  if (s == "uniform") return NoiseSpec::uniform();
  if (!s.empty() && s[0] == '@') {
    std::ifstream in(s.substr(1));
    if (!in) throw std::runtime_error("cannot read noise file: " + s.substr(1));
    return NoiseSpec::from_json(json::parse(in));
  }
  if (!s.empty() && s[0] == '{') return NoiseSpec::from_json(json::parse(s));
  throw std::invalid_argument("unknown noise law: " + s);
}

std::uint64_t resolve_seed(Config& c) {
  if (!c.seed) {
    std::random_device rd;
    c.seed = (std::uint64_t(rd()) << 32) ^ rd();
    std::cerr << "seed: " << *c.seed << "\n";
  }
  return *c.seed;
}

int resolve_workers(const Config& c) {
  if (c.workers > 0) return c.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

json meta_json(const Config& c, const std::string& subcommand) {
  json m;
  m["subcommand"] = subcommand;
  m["map"] = c.map_name;
  json params = json::object();
  for (const auto& [k, v] : parse_params(c.param_kv)) params[k] = v;
  m["params"] = params;
  m["noise"] = parse_noise(c.noise).to_json();
  m["alpha"] = c.alpha;
  m["ell"] = c.ell;
  m["x0"] = c.x0;
  m["steps"] = c.steps;
  m["paths"] = c.paths;
  if (c.seed) m["seed"] = *c.seed;
  m["workers"] = resolve_workers(c);
  m["grid"] = {{"alpha_min", c.alpha_min}, {"alpha_max", c.alpha_max},
               {"alpha_steps", c.alpha_steps}, {"ell_min", c.ell_min},
               {"ell_max", c.ell_max},       {"ell_steps", c.ell_steps},
               {"transient", c.transient},   {"samples", c.samples}};
  return m;
}

void emit(const Config& c, const std::string& subcommand, const std::string& body) {
  if (c.out.empty()) {
    std::cout << body;
    return;
  }
  write_file(c.out, body);
  json m = meta_json(c, subcommand);
  write_file(c.out + ".meta.json", m.dump(2) + "\n");
}

int cmd_analyze(Config& c) {
  MapSpec m = make_map(c.map_name, parse_params(c.param_kv));
  MapProbe p = probe_map(m);
  NoiseSpec noise = parse_noise(c.noise);

  json out = probe_json(m, p);
  out["beta_star"] = beta_star(m, p);
  if (p.L0) {
    if (auto a0 = alpha0(*p.L0)) out["alpha0"] = *a0;
    EnvelopeDomination a3 = check_envelope_domination(m, p);
    out["envelope_domination"] = {{"applicable", a3.applicable},
                                  {"holds", a3.holds},
                                  {"max_envel", a3.max_envel}};
  }
  if (auto b0 = beta0(p.L_minus, p.L_plus)) out["beta0"] = *b0;
  if (!p.L0) {
    auto [s1, s2] = estimate_sides(
        m, p, 0.1 * std::min(p.K - p.x_max, p.f_m - p.K));
    out["sides_bound"] = sides_bound(s1, s2);
  }
  if (!m.suggested_partition.empty()) {
    try {
      CertificateResult cert = multi_interval_certificate(m, p, m.suggested_partition);
      out["certificate"] = certificate_json(cert);
      if (!cert.certified)
        out["refined_alpha"] = refine_alpha(m, p, m.suggested_partition);
    } catch (const InfeasibleError& e) {
      out["certificate"] = {{"error", e.what()}};
    }
  }
  if (c.ell > 0.0) {
    ControlSpec ctl{c.alpha, c.ell};
    ctl.validate();
    auto elog = p.L0 ? expected_log_L0(*p.L0, c.alpha, c.ell, noise)
                     : expected_log_pair(p.L_minus, p.L_plus, c.alpha, c.ell, noise);
    out["noise_criterion"] = {
        {"feasible", bool(elog)},
        {"expected_log", elog ? *elog : 0.0},
        {"holds", elog && *elog < 0.0}};
    if (p.L0 && noise.kind == NoiseSpec::Kind::Bernoulli) {
      Interval r = bernoulli_region(*p.L0, c.alpha);
      out["bernoulli_region"] = {{"lo", r.lo}, {"hi", r.hi}, {"empty", r.empty()}};
    }
    if (p.L0 && noise.kind == NoiseSpec::Kind::Uniform) {
      UniformConditionResult u = uniform_condition(*p.L0, c.alpha, c.ell);
      out["uniform_condition"] = {{"verdict", to_string(u.verdict)},
                                  {"closed_form_bound", u.sufficient_inequality},
                                  {"expected_log", u.expected_log}};
    }
  }
  if (p.L0 && *p.L0 > 1.0) {
    try {
      SymmetricGain g = construct_symmetric_gain(*p.L0, noise);
      out["symmetric_gain"] = {{"alpha", g.control.alpha},
                               {"ell", g.control.ell},
                               {"expected_log", g.expected_log}};
    } catch (const InfeasibleError&) {
    }
  }
  emit(c, "analyze", out.dump(2) + "\n");
  return 0;
}

int cmd_simulate(Config& c) {
  MapSpec m = make_map(c.map_name, parse_params(c.param_kv));
  MapProbe p = probe_map(m);
  NoiseSpec noise = parse_noise(c.noise);
  ControlSpec ctl{c.alpha, c.ell};
  ctl.validate();
  std::uint64_t seed = resolve_seed(c);
  TrajectoryResult t = run_trajectory(m, p, ctl, noise, c.x0, c.steps, seed, 0);
  emit(c, "simulate", trajectory_csv(t));
  std::cerr << "verdict: " << to_string(t.verdict) << " residual: " << t.residual
            << "\n";
  return 0;
}

int cmd_bifurcate(Config& c) {
  MapSpec m = make_map(c.map_name, parse_params(c.param_kv));
  MapProbe p = probe_map(m);
  NoiseSpec noise = parse_noise(c.noise);
  std::uint64_t seed = resolve_seed(c);
  auto rows = bifurcation_sweep(m, p, noise, c.ell, c.alpha_min, c.alpha_max,
                                c.alpha_steps, c.transient, c.samples, c.paths,
                                c.x0, seed, resolve_workers(c));
  emit(c, "bifurcate", bifurcation_csv(rows));
  return 0;
}

int cmd_region(Config& c) {
  MapSpec m = make_map(c.map_name, parse_params(c.param_kv));
  MapProbe p = probe_map(m);
  NoiseSpec noise = parse_noise(c.noise);
  std::uint64_t seed = resolve_seed(c);
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
  };
  StabilityRegion region =
      region_raster(m, p, noise, linspace(c.alpha_min, c.alpha_max, c.alpha_steps),
                    linspace(c.ell_min, c.ell_max, c.ell_steps), c.x0, c.steps,
                    c.paths, seed, resolve_workers(c));
  emit(c, "region", region_csv(region));
  return 0;
}

int cmd_envelope(Config& c) {
  MapSpec m = make_map(c.map_name, parse_params(c.param_kv));
  MapProbe p = probe_map(m);
  EnvelopeCurve curve = envelope_curve(m, p, c.envelope_alpha);
  emit(c, "envelope", envelope_curve_csv(curve));
  std::cerr << "alpha: " << curve.alpha_used << " max: " << curve.max_envel << "\n";
  return 0;
}

int cmd_verify(Config& c) {
  auto results = run_verification(c.filter, resolve_workers(c));
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-24s %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    all_ok = all_ok && r.pass;
  }
  if (results.empty()) {
    std::cerr << "no checks match filter: " << c.filter << "\n";
    return 1;
  }
  return all_ok ? 0 : 1;
}

std::string map_list() {
  std::string s = "Built-in maps:\n";
  for (const auto& [name, desc] : builtin_maps()) s += "  " + name + ": " + desc + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction-based control of one-dimensional maps: analysis, "
               "simulation, and stability-region sweeps.\n\n" +
               map_list()};
  app.require_subcommand(1);
  Config c;
  try {
    preload_config(argc, argv, c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  auto* analyze = app.add_subcommand(
      "analyze", "Structural constants, gain thresholds, and certificates");
  auto* simulate = app.add_subcommand("simulate", "Single controlled trajectory");
  auto* bifurcate =
      app.add_subcommand("bifurcate", "Post-transient states over an alpha sweep");
  auto* region =
      app.add_subcommand("region", "Analytic + empirical (alpha, ell) raster");
  auto* envelope =
      app.add_subcommand("envelope", "Local-threshold envelope curve on [x_max, K)");
  auto* verify = app.add_subcommand("verify", "Run the built-in verification suite");

  for (auto* cmd : {analyze, simulate, bifurcate, region, envelope, verify})
    add_common_flags(cmd, c);
  for (auto* cmd : {bifurcate, region}) {
    cmd->add_option("--alpha-min", c.alpha_min, "Sweep lower alpha");
    cmd->add_option("--alpha-max", c.alpha_max, "Sweep upper alpha");
    cmd->add_option("--alpha-steps", c.alpha_steps, "Alpha grid size");
  }
  region->add_option("--ell-min", c.ell_min, "Sweep lower ell");
  region->add_option("--ell-max", c.ell_max, "Sweep upper ell");
  region->add_option("--ell-steps", c.ell_steps, "Ell grid size");
  bifurcate->add_option("--transient", c.transient, "Discarded warm-up steps");
  bifurcate->add_option("--samples", c.samples, "Recorded states per path");
  envelope->add_option("--gain", c.envelope_alpha,
                       "Gain for the envelope (default: local threshold)");
  verify->add_option("--filter", c.filter, "Substring filter on check names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(c);
    if (simulate->parsed()) return cmd_simulate(c);
    if (bifurcate->parsed()) return cmd_bifurcate(c);
    if (region->parsed()) return cmd_region(c);
    if (envelope->parsed()) return cmd_envelope(c);
    if (verify->parsed()) return cmd_verify(c);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
