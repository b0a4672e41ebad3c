#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npbc/common.hpp"

namespace npbc {

// One linear piece f(x) = slope*x + intercept on [lo, hi).
struct Segment {
  double lo, hi, slope, intercept;
};

// A one-dimensional map on the non-negative half line with a single unstable
// positive fixed point K.
struct MapSpec {
  std::string name;
  std::vector<std::pair<std::string, double>> params;

  std::function<double(double)> f;
  // Analytic derivative rules; any of them may be absent.
  std::function<double(double)> df1, df2, df3;

  bool smooth = true;                  // C^3 wherever the theory needs derivatives
  std::vector<double> breakpoints;     // non-smooth points of piecewise maps

  // Populated for piecewise-linear maps; enables the exact two-cycle solver.
  bool piecewise_linear = false;
  std::vector<Segment> segments;
  double tail_value = 0.0;             // constant value past the last segment

  double bracket_lo = 0.0, bracket_hi = 0.0;  // default equilibrium bracket
  std::vector<double> suggested_partition;    // breakpoints below K used for
                                              // multi-interval certification

  double eval(double x) const;  // domain-checked f(x)
};

// Structural constants of a map needed by the stability calculators.
struct MapProbe {
  double K = 0.0;
  double residual = 0.0;   // |f(K) - K|
  double x_max = 0.0;      // largest maximizer of f on [0, K]
  double f_m = 0.0;        // max of f on [0, K]
  double f2_m = 0.0;       // inf of f on (K, f_m]
  double L_minus = 0.0;    // sup (f(x)-K)/(K-x) on (x_max, K)
  double L_plus = 0.0;     // sup (K-f(x))/(x-K) on (K, f_m)
  std::optional<double> L0;  // -f'(K) when the map is smooth at K
  bool schwarzian_ok = false;
  bool sides_swapped = false;  // set when the right side came out steeper
};

MapSpec make_map(const std::string& name,
                 const std::map<std::string, double>& params = {});
MapSpec make_piecewise_linear(const std::vector<Segment>& segments, double tail_value,
                              const std::string& name = "piecewise");
MapSpec map_from_json(const nlohmann::json& doc);
// Built-in map names with a one-line description each.
std::vector<std::pair<std::string, std::string>> builtin_maps();

double find_equilibrium(const MapSpec& spec, double lo, double hi,
                        double* residual = nullptr);
void probe_extrema(const MapSpec& spec, double K, double& x_max, double& f_m,
                   double& f2_m);
// One-sided chord-slope supremum over a grid of (lo, hi), measured against K.
// left_side: ratio (f(x)-K)/(K-x); otherwise (K-f(x))/(x-K).
double lipschitz_sup(const MapSpec& spec, double K, double lo, double hi,
                     bool left_side);
void estimate_lipschitz(const MapSpec& spec, MapProbe& probe);
double derivative_at(const MapSpec& spec, double x, int order);
double schwarzian_at(const MapSpec& spec, double x);

// Full probe: equilibrium, extrema, Lipschitz constants, L0, Schwarzian scan.
// Validates the structural invariants (f(x) > x below K, 0 < f(x) < x above).
MapProbe probe_map(const MapSpec& spec);

}  // namespace npbc
