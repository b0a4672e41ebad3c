#pragma once

#include <cstdint>
#include <vector>

#include "npbc/maps.hpp"
#include "npbc/noise.hpp"
#include "npbc/stability.hpp"

namespace npbc {

enum class TrajectoryVerdict { Converged, TwoCycle, Unresolved, Escaped };

const char* to_string(TrajectoryVerdict v);

struct TrajectoryResult {
  // Decimated (n, x_n) samples; full resolution behind RunOptions::keep_full.
  std::vector<std::pair<std::int64_t, double>> samples;
  TrajectoryVerdict verdict = TrajectoryVerdict::Unresolved;
  std::int64_t steps_to_trap = -1;  // first n with x_n in [f2_m, f_m]; -1 if never
  double residual = 0.0;            // |x_N - K| at the horizon
  std::int64_t steps = 0;           // number of iterations actually run
  std::uint64_t seed = 0, stream = 0;
};

struct RunOptions {
  bool keep_full = false;   // keep every state instead of decimating
  bool early_stop = false;  // stop once convergence is numerically certain
  int window = 200;         // classification window W
};

double pbc_step(const MapSpec& spec, double beta, double x);

TrajectoryResult run_trajectory(const MapSpec& spec, const MapProbe& probe,
                                const ControlSpec& control, const NoiseSpec& noise,
                                double x0, std::int64_t horizon, std::uint64_t seed,
                                std::uint64_t stream, const RunOptions& opts = {});

double convergence_probability(const MapSpec& spec, const MapProbe& probe,
                               const ControlSpec& control, const NoiseSpec& noise,
                               double x0, std::int64_t horizon, int paths,
                               std::uint64_t master_seed, int workers = 1);

// Worst-case step count to enter the trap interval [f2_m, f_m] from x0 under
// any control sequence in [beta_lo, beta_hi].
std::int64_t trap_bound(const MapSpec& spec, const MapProbe& probe, double beta_lo,
                        double beta_hi, double x0);

struct EmpiricalLog {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::int64_t violations = 0;  // draws with a non-positive factor
};

EmpiricalLog empirical_expected_log(double L_minus, double L_plus,
                                    const ControlSpec& control, const NoiseSpec& noise,
                                    std::int64_t draws, std::uint64_t seed);

}  // namespace npbc
