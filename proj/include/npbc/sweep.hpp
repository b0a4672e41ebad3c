#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "npbc/dynamics.hpp"
#include "npbc/maps.hpp"
#include "npbc/noise.hpp"
#include "npbc/stability.hpp"

namespace npbc {

struct BifurcationRow {
  double alpha = 0.0;
  bool skipped = false;            // inadmissible (alpha, ell) cell
  std::vector<double> states;      // post-transient samples, all paths pooled
};

std::vector<BifurcationRow> bifurcation_sweep(
    const MapSpec& spec, const MapProbe& probe, const NoiseSpec& noise, double ell,
    double alpha_lo, double alpha_hi, int alpha_steps, std::int64_t transient,
    int samples, int paths_per_alpha, double x0, std::uint64_t master_seed,
    int workers = 1);

struct ThresholdScan {
  std::vector<double> alpha;
  std::vector<double> rate;               // converged fraction per alpha
  std::optional<double> threshold;        // smallest alpha with rate >= 0.99
};

ThresholdScan collapse_threshold(const MapSpec& spec, const MapProbe& probe,
                                 const NoiseSpec& noise, double ell, double alpha_lo,
                                 double alpha_hi, double alpha_step, double x0,
                                 std::int64_t horizon, int paths,
                                 std::uint64_t master_seed, int workers = 1);

struct StabilityRegion {
  std::vector<double> alpha_grid, ell_grid;
  std::vector<Verdict> analytic;   // row-major: [ia * ell_grid.size() + il]
  std::vector<double> rate;        // empirical convergence probability per cell
  double beta_star_value = 0.0;
  std::optional<double> sides = std::nullopt;  // (cond:sides)-style cap for
                                               // maps without a derivative at K
  Verdict& at(size_t ia, size_t il) { return analytic[ia * ell_grid.size() + il]; }
  double& rate_at(size_t ia, size_t il) { return rate[ia * ell_grid.size() + il]; }
};

StabilityRegion region_raster(const MapSpec& spec, const MapProbe& probe,
                              const NoiseSpec& noise,
                              const std::vector<double>& alpha_grid,
                              const std::vector<double>& ell_grid, double x0,
                              std::int64_t horizon, int paths,
                              std::uint64_t master_seed, int workers = 1);

struct EnvelopeCurve {
  double alpha_used = 0.0;
  double max_envel = 0.0;
  std::vector<std::pair<double, double>> curve;  // (x, envel(x)) on [x_max, K)
};

EnvelopeCurve envelope_curve(const MapSpec& spec, const MapProbe& probe,
                             std::optional<double> alpha = std::nullopt);

}  // namespace npbc
