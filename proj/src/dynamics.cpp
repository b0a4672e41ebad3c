#include "npbc/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace npbc {

const char* to_string(TrajectoryVerdict v) {
  switch (v) {
    case TrajectoryVerdict::Converged: return "converged";
    case TrajectoryVerdict::TwoCycle: return "two_cycle";
    case TrajectoryVerdict::Unresolved: return "unresolved";
    default: return "escaped";
  }
}

double pbc_step(const MapSpec& spec, double beta, double x) {
  return (1.0 - beta) * spec.eval(x) + beta * x;
}

TrajectoryResult run_trajectory(const MapSpec& spec, const MapProbe& probe,
                                const ControlSpec& control, const NoiseSpec& noise,
                                double x0, std::int64_t horizon, std::uint64_t seed,
                                std::uint64_t stream, const RunOptions& opts) {
  control.validate();
  if (!(x0 > 0.0)) throw InfeasibleError("run_trajectory: x0 must be positive");
  if (horizon < 1) throw std::invalid_argument("run_trajectory: horizon must be >= 1");

  TrajectoryResult res;
  res.seed = seed;
  res.stream = stream;
  RngStream rng(seed, stream);

  const double tol = 1e-6 * std::max(1.0, probe.K);
  const double blowup = 1e12 * std::max(1.0, probe.K);
  const int W = opts.window;
  std::vector<double> tail(W, std::numeric_limits<double>::quiet_NaN());
  // Decimation: first/last 10^3 states plus a uniform thinning in between.
  const std::int64_t head_keep = 1000, tail_keep = 1000;
  const std::int64_t thin = std::max<std::int64_t>(1, horizon / 1000);

  auto record = [&](std::int64_t n, double x) {
    if (opts.keep_full || n < head_keep || n >= horizon - tail_keep || n % thin == 0)
      res.samples.emplace_back(n, x);
  };

  double x = x0;
  std::int64_t stable_run = 0;
  bool stopped_early = false;
  record(0, x);
  if (x >= probe.f2_m && x <= probe.f_m) res.steps_to_trap = 0;
  std::int64_t n = 0;
  for (; n < horizon; ++n) {
    double beta = control.alpha;
    if (control.ell > 0.0) beta += control.ell * sample(noise, rng);
    x = pbc_step(spec, beta, x);
    res.steps = n + 1;
    if (!std::isfinite(x) || x > blowup) {
      res.verdict = TrajectoryVerdict::Escaped;
      res.residual = std::numeric_limits<double>::infinity();
      record(n + 1, x);
      return res;
    }
    record(n + 1, x);
    if (res.steps_to_trap < 0 && x >= probe.f2_m && x <= probe.f_m)
      res.steps_to_trap = n + 1;
    tail[static_cast<size_t>((n + 1) % W)] = x;
    if (opts.early_stop) {
      stable_run = std::fabs(x - probe.K) < 1e-3 * tol ? stable_run + 1 : 0;
      if (stable_run >= W) {
        stopped_early = true;
        ++n;
        break;
      }
    }
  }
  res.residual = std::fabs(x - probe.K);

  if (stopped_early) {
    res.verdict = TrajectoryVerdict::Converged;
    return res;
  }
  if (horizon < W) {
    res.verdict = TrajectoryVerdict::Unresolved;
    return res;
  }

  // Classify the last W states.
  bool converged = true;
  for (double v : tail)
    if (!(std::fabs(v - probe.K) <= tol)) {
      converged = false;
      break;
    }
  if (converged) {
    res.verdict = TrajectoryVerdict::Converged;
    return res;
  }
  // Two-cycle test: split the window by parity of the step index and require
  // two tight clusters straddling K.
  double me = 0.0, mo = 0.0;
  int ce = 0, co = 0;
  for (std::int64_t k = n - W + 1; k <= n; ++k) {
    double v = tail[static_cast<size_t>(k % W)];
    if (k % 2 == 0) {
      me += v;
      ++ce;
    } else {
      mo += v;
      ++co;
    }
  }
  me /= ce;
  mo /= co;
  bool tight = true;
  for (std::int64_t k = n - W + 1; k <= n; ++k) {
    double v = tail[static_cast<size_t>(k % W)];
    double c = (k % 2 == 0) ? me : mo;
    if (!(std::fabs(v - c) <= tol)) {
      tight = false;
      break;
    }
  }
  if (tight && (me - probe.K) * (mo - probe.K) < 0.0 &&
      std::fabs(me - mo) > 2.0 * tol)
    res.verdict = TrajectoryVerdict::TwoCycle;
  else
    res.verdict = TrajectoryVerdict::Unresolved;
  return res;
}

double convergence_probability(const MapSpec& spec, const MapProbe& probe,
                               const ControlSpec& control, const NoiseSpec& noise,
                               double x0, std::int64_t horizon, int paths,
                               std::uint64_t master_seed, int workers) {
  if (paths < 1) throw std::invalid_argument("convergence_probability: paths >= 1");
  control.validate();
  RunOptions opts;
  opts.early_stop = true;
  std::atomic<int> next{0}, converged{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= paths) return;
      TrajectoryResult r = run_trajectory(spec, probe, control, noise, x0, horizon,
                                          master_seed, static_cast<std::uint64_t>(i),
                                          opts);
      if (r.verdict == TrajectoryVerdict::Converged) converged.fetch_add(1);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return static_cast<double>(converged.load()) / paths;
}

std::int64_t trap_bound(const MapSpec& spec, const MapProbe& probe, double beta_lo,
                        double beta_hi, double x0) {
  if (!(beta_lo > 0.0 && beta_lo <= beta_hi && beta_hi < 1.0))
    throw std::invalid_argument("trap_bound: need 0 < beta_lo <= beta_hi < 1");
  if (!(x0 > 0.0)) throw std::invalid_argument("trap_bound: x0 must be positive");
  if (x0 >= probe.f2_m && x0 <= probe.f_m) return 1;
  const int N = 10000;
  if (x0 < probe.f2_m) {
    // Monotone climb: each step gains at least (1-beta_hi) * inf(f - x).
    double delta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      double x = x0 + (probe.f2_m - x0) * i / N;
      delta = std::min(delta, spec.eval(x) - x);
    }
    if (!(delta > 0.0))
      throw std::runtime_error("trap_bound: non-positive climb increment");
    return static_cast<std::int64_t>(
               std::floor((probe.f2_m - x0) / (delta * (1.0 - beta_hi)))) +
           1;
  }
  // Monotone descent from above f_m.
  double delta = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= N; ++i) {
    double x = probe.f_m + (x0 - probe.f_m) * i / N;
    delta = std::min(delta, x - spec.eval(x));
  }
  if (!(delta > 0.0))
    throw std::runtime_error("trap_bound: non-positive descent decrement");
  return static_cast<std::int64_t>(
             std::floor((x0 - probe.f_m) / (delta * (1.0 - beta_hi)))) +
         1;
}

EmpiricalLog empirical_expected_log(double L_minus, double L_plus,
                                    const ControlSpec& control, const NoiseSpec& noise,
                                    std::int64_t draws, std::uint64_t seed) {
  control.validate();
  RngStream rng(seed, 0);
  EmpiricalLog res;
  double sum = 0.0, sumsq = 0.0;
  std::int64_t valid = 0;
  for (std::int64_t i = 0; i < draws; ++i) {
    double beta = control.alpha + control.ell * sample(noise, rng);
    double v = script_L(L_minus, beta) * script_L(L_plus, beta);
    if (!(v > 0.0)) {
      ++res.violations;
      continue;
    }
    double lv = std::log(v);
    sum += lv;
    sumsq += lv * lv;
    ++valid;
  }
  if (valid > 0) {
    res.mean = sum / valid;
    if (valid > 1) {
      double var = (sumsq - sum * sum / valid) / (valid - 1);
      res.stderr_mean = std::sqrt(std::max(0.0, var) / valid);
    }
  }
  return res;
}

}  // namespace npbc
