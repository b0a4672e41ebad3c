#include "npbc/sweep.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace npbc {

namespace {

// Per-task derived seed so every cell draws from an independent stream family.
std::uint64_t cell_seed(std::uint64_t master, std::uint64_t cell) {
  return master ^ (0xA24BAED4963EE407ULL * (cell + 1));
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

bool admissible(double alpha, double ell) {
  return alpha >= 0.0 && ell >= 0.0 && alpha - ell >= 0.0 && alpha + ell < 1.0;
}

}  // namespace

std::vector<BifurcationRow> bifurcation_sweep(
    const MapSpec& spec, const MapProbe& probe, const NoiseSpec& noise, double ell,
    double alpha_lo, double alpha_hi, int alpha_steps, std::int64_t transient,
    int samples, int paths_per_alpha, double x0, std::uint64_t master_seed,
    int workers) {
  if (alpha_steps < 2) throw std::invalid_argument("bifurcation_sweep: alpha_steps >= 2");
  if (!(x0 > 0.0)) throw InfeasibleError("bifurcation_sweep: x0 must be positive");
  std::vector<BifurcationRow> rows(alpha_steps);
  parallel_for(alpha_steps, workers, [&](int ia) {
    BifurcationRow& row = rows[ia];
    row.alpha = alpha_lo + (alpha_hi - alpha_lo) * ia / (alpha_steps - 1);
    if (!admissible(row.alpha, ell)) {
      row.skipped = true;
      return;
    }
    row.states.reserve(static_cast<size_t>(samples) * paths_per_alpha);
    for (int p = 0; p < paths_per_alpha; ++p) {
      RngStream rng(cell_seed(master_seed, static_cast<std::uint64_t>(ia)), p);
      double x = x0;
      for (std::int64_t n = 0; n < transient; ++n) {
        double beta = row.alpha;
        if (ell > 0.0) beta += ell * sample(noise, rng);
        x = pbc_step(spec, beta, x);
        if (!std::isfinite(x)) break;
      }
      for (int s = 0; s < samples && std::isfinite(x); ++s) {
        double beta = row.alpha;
        if (ell > 0.0) beta += ell * sample(noise, rng);
        x = pbc_step(spec, beta, x);
        row.states.push_back(x);
      }
    }
  });
  return rows;
}

ThresholdScan collapse_threshold(const MapSpec& spec, const MapProbe& probe,
                                 const NoiseSpec& noise, double ell, double alpha_lo,
                                 double alpha_hi, double alpha_step, double x0,
                                 std::int64_t horizon, int paths,
                                 std::uint64_t master_seed, int workers) {
  if (!(alpha_step > 0.0))
    throw std::invalid_argument("collapse_threshold: alpha_step must be positive");
  ThresholdScan scan;
  for (double a = alpha_lo; a <= alpha_hi + 1e-12; a += alpha_step)
    scan.alpha.push_back(a);
  scan.rate.assign(scan.alpha.size(), 0.0);
  parallel_for(static_cast<int>(scan.alpha.size()), workers, [&](int ia) {
    double a = scan.alpha[ia];
    if (!admissible(a, ell)) return;
    ControlSpec c{a, ell};
    scan.rate[ia] = convergence_probability(
        spec, probe, c, noise, x0, horizon, paths,
        cell_seed(master_seed, static_cast<std::uint64_t>(ia)), 1);
  });
  for (size_t i = 0; i < scan.alpha.size(); ++i)
    if (scan.rate[i] >= 0.99) {
      scan.threshold = scan.alpha[i];
      break;
    }
  return scan;
}

StabilityRegion region_raster(const MapSpec& spec, const MapProbe& probe,
                              const NoiseSpec& noise,
                              const std::vector<double>& alpha_grid,
                              const std::vector<double>& ell_grid, double x0,
                              std::int64_t horizon, int paths,
                              std::uint64_t master_seed, int workers) {
  for (size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1]))
      throw std::invalid_argument("region_raster: alpha grid must increase");
  for (size_t i = 1; i < ell_grid.size(); ++i)
    if (!(ell_grid[i] > ell_grid[i - 1]))
      throw std::invalid_argument("region_raster: ell grid must increase");

  StabilityRegion region;
  region.alpha_grid = alpha_grid;
  region.ell_grid = ell_grid;
  region.analytic.assign(alpha_grid.size() * ell_grid.size(), Verdict::Infeasible);
  region.rate.assign(alpha_grid.size() * ell_grid.size(), 0.0);
  region.beta_star_value = beta_star(spec, probe);
  if (!probe.L0) {
    auto [a1, a2] = estimate_sides(spec, probe,
                                   0.1 * std::min(probe.K - probe.x_max,
                                                  probe.f_m - probe.K));
    region.sides = sides_bound(a1, a2);
  }

  int n = static_cast<int>(alpha_grid.size() * ell_grid.size());
  parallel_for(n, workers, [&](int cell) {
    size_t ia = static_cast<size_t>(cell) / ell_grid.size();
    size_t il = static_cast<size_t>(cell) % ell_grid.size();
    double alpha = alpha_grid[ia], ell = ell_grid[il];
    if (!admissible(alpha, ell)) return;  // stays Infeasible, rate 0

    Verdict v;
    if (ell == 0.0) {
      v = alpha > region.beta_star_value ? Verdict::Holds : Verdict::Fails;
    } else {
      std::optional<double> elog =
          probe.L0 ? expected_log_L0(*probe.L0, alpha, ell, noise)
                   : expected_log_pair(probe.L_minus, probe.L_plus, alpha, ell, noise);
      if (!elog) {
        v = Verdict::Infeasible;
      } else {
        bool ok = *elog < 0.0 && alpha + ell > region.beta_star_value;
        if (region.sides) ok = ok && alpha + ell <= *region.sides;
        v = ok ? Verdict::Holds : Verdict::Fails;
      }
    }
    region.analytic[cell] = v;
    ControlSpec c{alpha, ell};
    region.rate[cell] = convergence_probability(
        spec, probe, c, noise, x0, horizon, paths,
        cell_seed(master_seed, static_cast<std::uint64_t>(cell)), 1);
  });
  return region;
}

EnvelopeCurve envelope_curve(const MapSpec& spec, const MapProbe& probe,
                             std::optional<double> alpha) {
  if (!spec.smooth || !probe.L0)
    throw std::invalid_argument("envelope_curve: map must be smooth at K");
  EnvelopeCurve res;
  res.alpha_used = alpha ? *alpha : *alpha0(*probe.L0);
  const int N = 1000;
  res.max_envel = -1e300;
  res.curve.reserve(N);
  for (int i = 0; i < N; ++i) {
    double x = probe.x_max + (probe.K - probe.x_max) * i / N;
    double gx = G_step(spec, res.alpha_used, x);
    double e = psi(-derivative_at(spec, gx, 1), -derivative_at(spec, x, 1));
    res.curve.emplace_back(x, e);
    res.max_envel = std::max(res.max_envel, e);
  }
  return res;
}

}  // namespace npbc
