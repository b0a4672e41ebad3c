#include "npbc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npbc/numerics.hpp"

namespace npbc {

namespace {

// Chord-slope Lipschitz constant anchored at the right endpoint:
// sup over (lo, hi) of (f(x) - f(anchor)) / (anchor - x), anchor = hi.
double chord_sup_left(const MapSpec& spec, double lo, double hi) {
  double fa = spec.eval(hi);
  auto ratio = [&](double x) { return (spec.eval(x) - fa) / (hi - x); };
  const int N = 10000;
  double best = -std::numeric_limits<double>::infinity(), best_x = lo;
  for (int i = 1; i < N; ++i) {
    double x = lo + (hi - lo) * i / N;
    double r = ratio(x);
    if (r > best) {
      best = r;
      best_x = x;
    }
  }
  double h = (hi - lo) / N;
  double a = std::max(lo, best_x - h);
  double b = std::min(hi - 1e-9 * std::max(1.0, hi), best_x + h);
  if (a < b) best = std::max(best, ratio(golden_max(ratio, a, b, 1e-10)));
  return best;
}

// Chord-slope tail constant anchored at the left endpoint z:
// sup over (z, hi) of (f(z) - f(x)) / (x - z).
double chord_sup_tail(const MapSpec& spec, double z, double hi) {
  double fz = spec.eval(z);
  auto ratio = [&](double x) { return (fz - spec.eval(x)) / (x - z); };
  const int N = 10000;
  double best = -std::numeric_limits<double>::infinity(), best_x = hi;
  for (int i = 1; i <= N; ++i) {
    double x = z + (hi - z) * i / N;
    double r = ratio(x);
    if (r > best) {
      best = r;
      best_x = x;
    }
  }
  double h = (hi - z) / N;
  double a = std::max(z + 1e-9 * std::max(1.0, z), best_x - h);
  double b = std::min(hi, best_x + h);
  if (a < b) best = std::max(best, ratio(golden_max(ratio, a, b, 1e-10)));
  return best;
}

// Lipschitz seminorm of the decreasing part of f on [z, hi]: sup of local
// downward difference quotients.
double local_slope_sup(const MapSpec& spec, double z, double hi) {
  const int N = 10000;
  double delta = (hi - z) / N;
  double best = 0.0;
  for (int i = 0; i < N; ++i) {
    double x = z + delta * i;
    double s = (spec.eval(x) - spec.eval(x + delta)) / delta;
    best = std::max(best, s);
  }
  // Difference quotients over [x, x+delta] average the slope across at most
  // two linear pieces; halving the step twice near the best point sharpens it.
  return std::max(best, chord_sup_tail(spec, z, hi));
}

}  // namespace

double psi(double u, double v) {
  if (!(u > -1.0) || !(v > -1.0))
    throw std::domain_error("psi: arguments must exceed -1");
  return (u * v - 1.0) / ((u + 1.0) * (v + 1.0));
}

double script_L(double L, double beta) { return (1.0 - beta) * L - beta; }

std::optional<double> beta0(double L_minus, double L_plus) {
  if (!(L_minus * L_plus > 1.0)) return std::nullopt;  // already locally stable
  double b = psi(L_minus, L_plus);
  if (std::fabs(script_L(L_minus, b) * script_L(L_plus, b) - 1.0) > 1e-12)
    throw std::logic_error("beta0: root identity check failed");
  return b;
}

std::optional<double> alpha0(double L0) {
  if (!(L0 > 1.0)) return std::nullopt;  // stable without control
  return (L0 - 1.0) / (L0 + 1.0);
}

Interval bernoulli_region(double L0, double alpha) {
  if (!(L0 > 1.0)) throw std::invalid_argument("bernoulli_region: L0 must exceed 1");
  double t = L0 / (L0 + 1.0) - alpha;
  Interval r;
  if (t <= 0.0) return r;  // empty
  double inv = 1.0 / (L0 + 1.0);
  double lo2 = t * t - inv * inv;
  r.lo = lo2 > 0.0 ? std::sqrt(lo2) : 0.0;
  r.hi = std::min(std::min(t, std::sqrt(std::max(0.0, alpha))),
                  std::min(alpha, 1.0 - alpha));
  if (r.hi < r.lo) r.hi = r.lo;  // normalized empty interval
  return r;
}

UniformConditionResult uniform_condition(double L0, double alpha, double ell) {
  UniformConditionResult res;
  double l0a = script_L(L0, alpha);
  if (!(l0a > 0.0) || !(alpha + ell < L0 / (L0 + 1.0))) {
    res.verdict = Verdict::Infeasible;
    return res;
  }
  double rhs = ell * (L0 + 1.0) / l0a;
  res.sufficient_inequality = std::log(l0a) < rhs * rhs / 6.0;
  auto exact = expected_log_L0(L0, alpha, ell, NoiseSpec::uniform());
  res.expected_log = *exact;  // feasibility established above
  res.verdict = res.expected_log < 0.0 ? Verdict::Holds : Verdict::Fails;
  return res;
}

double mathcal_V(double L_minus, double L_plus, double alpha, double ell) {
  auto piece = [&](double L) {
    double a = L - alpha * (L + 1.0);
    double b = ell * (L + 1.0);
    return a * a - b * b;
  };
  return piece(L_minus) * piece(L_plus);
}

double G_step(const MapSpec& spec, double beta, double x) {
  return (1.0 - beta) * spec.eval(x) + beta * x;
}

double G2(const MapSpec& spec, double beta, double x) {
  return G_step(spec, beta, G_step(spec, beta, x));
}

double two_cycle_margin(const MapSpec& spec, const MapProbe& probe, double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("two_cycle_margin: beta must lie in [0, 1)");
  const int N = 10000;
  // Stability of G^2 requires its graph above the diagonal left of K and
  // below it right of K.
  auto margin_at = [&](double x) {
    double g2 = G2(spec, beta, x);
    return x < probe.K ? g2 - x : x - g2;
  };
  double worst = std::numeric_limits<double>::infinity(), worst_x = probe.K;
  auto scan = [&](double lo, double hi) {
    for (int i = 1; i < N; ++i) {
      double x = lo + (hi - lo) * i / N;
      double m = margin_at(x);
      if (m < worst) {
        worst = m;
        worst_x = x;
      }
    }
  };
  scan(probe.f2_m, probe.K);
  scan(probe.K, probe.f_m);
  // One local refinement of the worst grid point (G^2 may have kinks, so the
  // coarse scan does the heavy lifting and this only sharpens the minimum).
  double h = (probe.f_m - probe.f2_m) / N;
  double guard = 1e-9 * std::max(1.0, probe.K);
  double a = std::max(probe.f2_m + guard, worst_x - h);
  double b = std::min(probe.f_m - guard, worst_x + h);
  if (worst_x < probe.K) b = std::min(b, probe.K - guard);
  else a = std::max(a, probe.K + guard);
  if (a < b) worst = std::min(worst, margin_at(golden_min(margin_at, a, b, 1e-12)));
  return worst;
}

double beta_star(const MapSpec& spec, const MapProbe& probe, double tol) {
  if (two_cycle_margin(spec, probe, 0.0) > 0.0) return 0.0;
  double lo = 0.0, hi = 0.999;
  if (!(two_cycle_margin(spec, probe, hi) > 0.0))
    throw std::runtime_error("beta_star: margin not positive near beta=1");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (two_cycle_margin(spec, probe, mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

bool exact_two_cycle_exists(const MapSpec& spec, const MapProbe& probe, double beta) {
  if (!spec.piecewise_linear)
    throw std::invalid_argument("exact_two_cycle_exists: needs a piecewise-linear map");
  struct Piece {
    double lo, hi, A, B;  // G(beta, x) = A*x + B on [lo, hi)
  };
  std::vector<Piece> pieces;
  for (const auto& s : spec.segments)
    pieces.push_back({s.lo, s.hi, (1.0 - beta) * s.slope + beta, (1.0 - beta) * s.intercept});
  double top = spec.segments.back().hi;
  pieces.push_back({top, std::numeric_limits<double>::infinity(), beta,
                    (1.0 - beta) * spec.tail_value});
  const double eps = 1e-9 * std::max(1.0, probe.K);
  auto in_trap = [&](double x) {
    return x >= probe.f2_m - eps && x <= probe.f_m + eps;
  };
  for (const auto& pi : pieces) {
    for (const auto& pj : pieces) {
      double prod = pi.A * pj.A;
      if (std::fabs(1.0 - prod) < 1e-12) continue;  // degenerate pair
      double x = (pj.A * pi.B + pj.B) / (1.0 - prod);
      if (!(x >= pi.lo - eps && x < pi.hi + eps)) continue;
      double y = pi.A * x + pi.B;
      if (!(y >= pj.lo - eps && y < pj.hi + eps)) continue;
      if (std::fabs(y - x) <= eps) continue;  // fixed point, not a cycle
      if (in_trap(x) && in_trap(y)) return true;
    }
  }
  return false;
}

double exact_two_cycle_threshold(const MapSpec& spec, const MapProbe& probe,
                                 double tol) {
  if (!exact_two_cycle_exists(spec, probe, 0.0)) return 0.0;
  double lo = 0.0, hi = 0.999;
  if (exact_two_cycle_exists(spec, probe, hi))
    throw std::runtime_error("exact_two_cycle_threshold: cycle persists near beta=1");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (exact_two_cycle_exists(spec, probe, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double EnvelopeSpec::phi(double x) const {
  size_t m = c_minus.size();
  if (x <= K) {
    size_t i = 0;
    while (i + 1 < m && x < a[i + 1]) ++i;
    return c_minus[i] * (a[i] - x) + b[i];
  }
  size_t i = 0;
  while (i + 1 < m && x > b[i + 1]) ++i;
  return a[i] - c_plus[i] * (x - b[i]);
}

EnvelopeSpec build_envelope(double K, const std::vector<double>& breakpoints,
                            const std::vector<double>& slopes_minus) {
  if (breakpoints.empty() || breakpoints.size() != slopes_minus.size())
    throw std::invalid_argument("build_envelope: need one slope per breakpoint");
  EnvelopeSpec env;
  env.K = K;
  env.a = {K};
  env.b = {K};
  double prev = K;
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    double ai = breakpoints[i];
    if (!(ai < prev) || !(ai >= 0.0))
      throw std::invalid_argument("build_envelope: breakpoints must decrease from K");
    if (!(slopes_minus[i] > 0.0))
      throw std::invalid_argument("build_envelope: slopes must be positive");
    env.a.push_back(ai);
    env.c_minus.push_back(slopes_minus[i]);
    env.c_plus.push_back(1.0 / slopes_minus[i]);
    env.b.push_back(slopes_minus[i] * (prev - ai) + env.b.back());
    prev = ai;
  }
  // Self-inverse check on a grid.
  const int N = 1000;
  for (int i = 0; i <= N; ++i) {
    double x = env.lo() + (env.hi() - env.lo()) * i / N;
    if (std::fabs(env.phi(env.phi(x)) - x) > 1e-10 * std::max(1.0, K))
      throw std::logic_error("build_envelope: involution check failed");
  }
  return env;
}

EnvelopeCheck check_envelope(const MapSpec& spec, double alpha,
                             const EnvelopeSpec& env, double d1, double d2) {
  if (!(d1 < env.K && env.K < d2))
    throw std::invalid_argument("check_envelope: K must lie inside (d1, d2)");
  EnvelopeCheck res;
  res.worst_margin = std::numeric_limits<double>::infinity();
  const int N = 10000;
  auto consider = [&](double m, double x) {
    if (m < res.worst_margin) {
      res.worst_margin = m;
      res.witness_x = x;
    }
  };
  for (int i = 1; i < N; ++i) {
    double x = d1 + (env.K - d1) * i / N;
    double g = G_step(spec, alpha, x);
    consider(env.phi(x) - g, x);  // envelope dominates the controlled map
    consider(g - x, x);           // controlled map above the diagonal
  }
  for (int i = 1; i < N; ++i) {
    double x = env.K + (d2 - env.K) * i / N;
    double g = G_step(spec, alpha, x);
    consider(g - env.phi(x), x);
    consider(x - g, x);
    consider(g, x);  // positivity
  }
  res.ok = res.worst_margin > 0.0;
  return res;
}

CertificateResult multi_interval_certificate(const MapSpec& spec,
                                             const MapProbe& probe,
                                             const std::vector<double>& partition,
                                             const std::vector<double>* L_minus,
                                             const std::vector<double>* L_plus) {
  if (partition.empty())
    throw std::invalid_argument("multi_interval_certificate: empty partition");
  std::vector<double> A = {probe.K};
  for (double ai : partition) {
    if (!(ai < A.back()) || !(ai > 0.0))
      throw std::invalid_argument(
          "multi_interval_certificate: partition must decrease from K");
    A.push_back(ai);
  }
  size_t m = partition.size();
  CertificateResult res;

  // Per-group left constants: chord slopes of f anchored at each a_i.
  res.L_minus.resize(m);
  for (size_t i = 0; i < m; ++i)
    res.L_minus[i] = L_minus ? (*L_minus)[i] : chord_sup_left(spec, A[i + 1], A[i]);
  double L0p = L_plus ? (*L_plus)[0] : lipschitz_sup(spec, probe.K, probe.K, probe.f_m, false);
  if (!(res.L_minus[0] * L0p > 1.0))
    throw InfeasibleError("multi_interval_certificate: constants adjacent to K "
                          "do not witness instability");
  res.alpha0 = psi(res.L_minus[0], L0p);
  res.L_plus.assign(m, 0.0);
  res.L_plus[0] = L0p;

  // b-recursion with the envelope slopes at alpha0; groups whose slope factor
  // is non-positive terminate the partition early.
  res.b = {probe.K};
  std::vector<double> slopes;
  size_t usable = m;
  for (size_t i = 0; i < m; ++i) {
    double c = script_L(res.L_minus[i], res.alpha0);
    if (!(c > 0.0)) {
      usable = i;
      break;
    }
    slopes.push_back(c);
    double bi = c * (A[i] - A[i + 1]) + res.b.back();
    if (bi > probe.f_m)
      throw std::runtime_error(
          "multi_interval_certificate: b-recursion left the map's range");
    res.b.push_back(bi);
  }

  res.certified = true;
  for (size_t i = 1; i < usable; ++i) {
    res.L_plus[i] = L_plus ? (*L_plus)[i] : local_slope_sup(spec, res.b[i], probe.f_m);
    double p = psi(res.L_minus[i], res.L_plus[i]);
    res.psi_values.push_back(p);
    if (p > res.alpha0 + 1e-9) res.certified = false;
  }
  if (usable < m) res.certified = false;

  if (usable > 0) {
    std::vector<double> bps(A.begin() + 1, A.begin() + 1 + usable);
    res.envelope = build_envelope(probe.K, bps, slopes);
    if (res.certified) {
      // Cross-check the construction: nudge alpha above alpha0 so the strict
      // grid inequalities are not spoiled by the touching segments.
      res.envelope_check = check_envelope(spec, res.alpha0 + 1e-8, *res.envelope,
                                          res.envelope->lo(), res.envelope->hi());
      if (!res.envelope_check.ok)
        throw std::runtime_error(
            "multi_interval_certificate: certified but envelope check failed");
    }
  }
  return res;
}

double refine_alpha(const MapSpec& spec, const MapProbe& probe,
                    const std::vector<double>& partition,
                    const std::vector<double>* L_minus,
                    const std::function<double(double)>* L_plus_tail) {
  if (partition.empty())
    throw std::invalid_argument("refine_alpha: empty partition");
  std::vector<double> A = {probe.K};
  for (double ai : partition) A.push_back(ai);
  size_t m = partition.size();

  std::vector<double> Lm(m);
  for (size_t i = 0; i < m; ++i)
    Lm[i] = L_minus ? (*L_minus)[i] : chord_sup_left(spec, A[i + 1], A[i]);
  double L0p = lipschitz_sup(spec, probe.K, probe.K, probe.f_m, false);
  double alpha = psi(Lm[0], L0p);

  auto tail = [&](double z) {
    if (L_plus_tail) return (*L_plus_tail)(z);
    return local_slope_sup(spec, z, probe.f_m);
  };

  for (size_t i = 1; i < m; ++i) {
    // b_i: largest image of [a_i, K] under the controlled map at the current gain.
    const int N = 10000;
    double lo = A[i], hi = probe.K, best = -1.0, best_x = lo;
    for (int k = 0; k <= N; ++k) {
      double x = lo + (hi - lo) * k / N;
      double g = G_step(spec, alpha, x);
      if (g > best) {
        best = g;
        best_x = x;
      }
    }
    double h = (hi - lo) / N;
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    if (a < b) {
      double ref = golden_max([&](double x) { return G_step(spec, alpha, x); }, a, b,
                              1e-10 * std::max(1.0, probe.K));
      best = std::max(best, G_step(spec, alpha, ref));
    }
    if (best > probe.f_m)
      throw std::runtime_error("refine_alpha: image escaped the map's range");
    alpha = std::max(alpha, psi(Lm[i], tail(best)));
  }
  return alpha;
}

EnvelopeDomination check_envelope_domination(const MapSpec& spec, const MapProbe& probe) {
  EnvelopeDomination res;
  if (!spec.smooth || !probe.L0) return res;  // not applicable
  res.alpha0 = *alpha0(*probe.L0);
  // Precondition: f' < 1 on [x_max, f_m].
  const int P = 2000;
  for (int i = 0; i <= P; ++i) {
    double x = probe.x_max + (probe.f_m - probe.x_max) * i / P;
    if (!(derivative_at(spec, x, 1) < 1.0)) return res;
  }
  res.applicable = true;
  const int N = 1000;
  res.max_envel = -std::numeric_limits<double>::infinity();
  res.curve.reserve(N);
  for (int i = 0; i < N; ++i) {
    double x = probe.x_max + (probe.K - probe.x_max) * i / N;
    double gx = G_step(spec, res.alpha0, x);
    // Psi over the reflected derivatives; the factors (1 - f') in the
    // quadratic's roots translate into -f' arguments here.
    double e = psi(-derivative_at(spec, gx, 1), -derivative_at(spec, x, 1));
    res.curve.emplace_back(x, e);
    res.max_envel = std::max(res.max_envel, e);
  }
  res.holds = res.max_envel < res.alpha0;
  return res;
}

SymmetricGain construct_symmetric_gain(double L0, const NoiseSpec& noise) {
  if (!(L0 > 1.0))
    throw std::invalid_argument("construct_symmetric_gain: L0 must exceed 1");
  double mu2 = noise.mu2;
  SymmetricGain g;
  g.alpha0 = (L0 - 1.0) / (L0 + 1.0);
  double bound = std::min({2.0 / mu2, 1.0 / (L0 + 1.0),
                           (L0 - 1.0) / ((1.0 + 0.5 * mu2) * (L0 + 1.0))});
  g.ell0 = 0.9 * bound;
  double alpha = g.alpha0 - 0.25 * g.ell0 * g.ell0 * mu2;
  double cap = std::min(alpha, 1.0 / (L0 + 1.0));
  if (!(cap > g.ell0))
    throw std::runtime_error("construct_symmetric_gain: empty ell interval");
  double ell = 0.5 * (g.ell0 + cap);
  g.control = {alpha, ell};
  g.control.validate();
  auto elog = expected_log_L0(L0, alpha, ell, noise);
  bool ok = alpha < g.alpha0 && alpha + ell > g.alpha0 &&
            alpha + ell < L0 / (L0 + 1.0) && elog && *elog < 0.0;
  if (!ok) throw std::runtime_error("construct_symmetric_gain: postcondition failed");
  g.expected_log = *elog;
  return g;
}

double sides_bound(double a1, double a2) {
  if (!(a1 > 0.0 && a2 > 0.0))
    throw std::invalid_argument("sides_bound: constants must be positive");
  return std::min(a1 / (a1 + 1.0), a2 / (a2 + 1.0));
}

std::pair<double, double> estimate_sides(const MapSpec& spec, const MapProbe& probe,
                                         double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("estimate_sides: theta must be positive");
  const int N = 10000;
  double a1 = std::numeric_limits<double>::infinity();
  double a2 = std::numeric_limits<double>::infinity();
  for (int i = 1; i < N; ++i) {
    double xl = probe.K - theta + theta * i / N;
    a1 = std::min(a1, (spec.eval(xl) - probe.K) / (probe.K - xl));
    double xr = probe.K + theta * i / N;
    a2 = std::min(a2, (probe.K - spec.eval(xr)) / (xr - probe.K));
  }
  return {a1, a2};
}

ExampleGain bernoulli_example_gain(double L0) {
  if (!(L0 > 2.0))
    throw InfeasibleError("bernoulli_example_gain: defined for L0 > 2 only");
  ExampleGain g;
  g.control.alpha = (L0 - 1.0 - 0.5 * (L0 - 2.0)) / (L0 + 1.0);
  g.control.ell = (0.5 * (L0 - 2.0) + 0.5) / (L0 + 1.0);
  g.control.validate();
  double t = L0 / (L0 + 1.0) - g.control.alpha;
  double inv = 1.0 / (L0 + 1.0);
  double e2 = g.control.ell * g.control.ell;
  bool holds = e2 > t * t - inv * inv && e2 < std::min(t * t, g.control.alpha);
  g.cond_bern = holds ? Verdict::Holds : Verdict::Fails;
  return g;
}

}  // namespace npbc
