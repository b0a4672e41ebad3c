#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "npbc/common.hpp"
#include "npbc/maps.hpp"
#include "npbc/noise.hpp"

namespace npbc {

// PBC gain pair: beta_n = alpha + ell*xi_{n+1} must stay in [0, 1).
struct ControlSpec {
  double alpha = 0.0;
  double ell = 0.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw InfeasibleError("control: alpha must lie in [0, 1)");
    if (!(ell >= 0.0)) throw InfeasibleError("control: ell must be >= 0");
    if (alpha - ell < 0.0 || alpha + ell >= 1.0)
      throw InfeasibleError("control: need alpha - ell >= 0 and alpha + ell < 1");
  }
};

// Decreasing involution phi made of linear pieces: slope -C_minus[i] on
// [a[i+1], a[i]] left of K, reciprocal slopes right of K.
struct EnvelopeSpec {
  double K = 0.0;
  std::vector<double> a;        // a[0] = K > a[1] > ... > a[m]
  std::vector<double> b;        // b[0] = K < b[1] < ... < b[m]
  std::vector<double> c_minus;  // slope magnitudes left of K, c_minus[i] on [a[i+1], a[i]]
  std::vector<double> c_plus;   // reciprocals, right of K

  double phi(double x) const;
  double lo() const { return a.back(); }
  double hi() const { return b.back(); }
};

struct EnvelopeCheck {
  bool ok = false;
  double worst_margin = 0.0;
  double witness_x = 0.0;  // location of the worst margin
};

struct CertificateResult {
  double alpha0 = 0.0;             // Psi of the constants adjacent to K
  bool certified = false;          // alpha0 dominates every interval's Psi
  std::vector<double> psi_values;  // Psi(L-_i, L+_i) for i >= 1
  std::vector<double> L_minus, L_plus;
  std::vector<double> b;           // images of the partition points under the recursion
  std::optional<EnvelopeSpec> envelope;
  EnvelopeCheck envelope_check;    // grid cross-check when certified
};

struct UniformConditionResult {
  Verdict verdict = Verdict::Infeasible;  // sign of the exact expected log
  bool sufficient_inequality = false;     // the displayed closed-form bound
  double expected_log = 0.0;              // exact quadrature value
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool empty() const { return !(lo < hi); }
  double mid() const { return 0.5 * (lo + hi); }
};

struct SymmetricGain {
  ControlSpec control;
  double ell0 = 0.0;
  double alpha0 = 0.0;
  double expected_log = 0.0;
};

struct EnvelopeDomination {
  bool applicable = false;
  bool holds = false;
  double alpha0 = 0.0;
  double max_envel = 0.0;
  std::vector<std::pair<double, double>> curve;  // (x, envel(x))
};

double psi(double u, double v);
double script_L(double L, double beta);
// Smallest root of script_L(L-,b)*script_L(L+,b) = 1; nullopt when the
// equilibrium is already locally stable (L-*L+ <= 1).
std::optional<double> beta0(double L_minus, double L_plus);
// (L0-1)/(L0+1); nullopt when L0 <= 1 (stable without control).
std::optional<double> alpha0(double L0);

// Open interval of noise amplitudes for which the Bernoulli expected-log
// criterion at derivative constant L0 holds, intersected with admissibility.
Interval bernoulli_region(double L0, double alpha);

UniformConditionResult uniform_condition(double L0, double alpha, double ell);

double mathcal_V(double L_minus, double L_plus, double alpha, double ell);

// One controlled step and its second iterate.
double G_step(const MapSpec& spec, double beta, double x);
double G2(const MapSpec& spec, double beta, double x);

// Worst signed slack of the no-two-cycle test for G(beta,.) over the trap
// interval: min of G^2(x)-x on (f2_m, K) and x-G^2(x) on (K, f_m).
double two_cycle_margin(const MapSpec& spec, const MapProbe& probe, double beta);

// Smallest beta whose margin is positive, by bisection to 1e-4.
double beta_star(const MapSpec& spec, const MapProbe& probe, double tol = 1e-4);

// Exact two-cycle machinery for piecewise-linear maps (test oracle, also
// exposed for diagnostics): does G(beta,.) have a genuine 2-cycle inside the
// trap interval, and the bisected existence threshold.
bool exact_two_cycle_exists(const MapSpec& spec, const MapProbe& probe, double beta);
double exact_two_cycle_threshold(const MapSpec& spec, const MapProbe& probe,
                                 double tol = 1e-6);

EnvelopeSpec build_envelope(double K, const std::vector<double>& breakpoints,
                            const std::vector<double>& slopes_minus);
EnvelopeCheck check_envelope(const MapSpec& spec, double alpha,
                             const EnvelopeSpec& env, double d1, double d2);

// Multi-interval global-stability certificate for a partition
// K > a_1 > ... > a_m of the left neighbourhood of K.  Constants may be given
// explicitly or grid-estimated from the map.
CertificateResult multi_interval_certificate(
    const MapSpec& spec, const MapProbe& probe, const std::vector<double>& partition,
    const std::vector<double>* L_minus = nullptr,
    const std::vector<double>* L_plus = nullptr);

// Inductive gain refinement when the certificate fails: raises alpha until
// every interval's Psi test passes against the tail constants at the running
// image points.
double refine_alpha(const MapSpec& spec, const MapProbe& probe,
                    const std::vector<double>& partition,
                    const std::vector<double>* L_minus = nullptr,
                    const std::function<double(double)>* L_plus_tail = nullptr);

EnvelopeDomination check_envelope_domination(const MapSpec& spec, const MapProbe& probe);

SymmetricGain construct_symmetric_gain(double L0, const NoiseSpec& noise);

double sides_bound(double a1, double a2);
// Grid-estimated chord-slope infima on (K-theta, K) and (K, K+theta).
std::pair<double, double> estimate_sides(const MapSpec& spec, const MapProbe& probe,
                                         double theta);

// The worked Bernoulli gain pair for L0 > 2; cond_bern reports whether the
// strict noise-interval condition holds at that pair (it does for L0 < 2.5,
// degenerates to the boundary at L0 = 2.5 and fails above).
struct ExampleGain {
  ControlSpec control;
  Verdict cond_bern = Verdict::Fails;
};
ExampleGain bernoulli_example_gain(double L0);

}  // namespace npbc
