#include "npbc/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "npbc/numerics.hpp"

namespace npbc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double piecewise_eval(const std::vector<Segment>& segs, double tail, double x) {
  for (const auto& s : segs)
    if (x >= s.lo && x < s.hi) return s.slope * x + s.intercept;
  return tail;
}

double get_param(const std::map<std::string, double>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument("missing map parameter: " + key);
  return it->second;
}

MapSpec make_ricker(double r) {
  if (r <= 0) throw std::invalid_argument("ricker: r must be positive");
  MapSpec m;
  m.name = "ricker";
  m.params = {{"r", r}};
  m.f = [r](double x) { return x * std::exp(r * (1.0 - x)); };
  m.df1 = [r](double x) { return (1.0 - r * x) * std::exp(r * (1.0 - x)); };
  m.df2 = [r](double x) { return -r * (2.0 - r * x) * std::exp(r * (1.0 - x)); };
  m.df3 = [r](double x) { return r * r * (3.0 - r * x) * std::exp(r * (1.0 - x)); };
  m.smooth = true;
  m.bracket_lo = 0.5;
  m.bracket_hi = 2.0;
  return m;
}

MapSpec make_quail() {
  MapSpec m;
  m.name = "quail";
  m.f = [](double x) {
    double x9 = std::pow(x, 9);
    return x * (0.55 + 3.45 / (1.0 + x9));
  };
  m.df1 = [](double x) {
    double x9 = std::pow(x, 9);
    double d = 1.0 + x9;
    return 0.55 + 3.45 / d - 31.05 * x9 / (d * d);
  };
  m.smooth = true;
  m.bracket_lo = 1.0;
  m.bracket_hi = 2.0;
  return m;
}

MapSpec make_exglob() {
  std::vector<Segment> segs = {
      {0.0, 28.0, 51.0 / 28.0, 0.0}, {28.0, 29.0, -6.0, 219.0},
      {29.0, 31.0, -5.0, 190.0},     {31.0, 32.0, -3.0, 128.0},
      {32.0, 33.0, -2.0, 96.0},      {33.0, 38.0, -1.4, 76.2},
      {38.0, 50.0, -1.2, 68.6}};
  MapSpec m = make_piecewise_linear(segs, 8.6, "exglob");
  m.bracket_lo = 20.0;
  m.bracket_hi = 40.0;
  m.suggested_partition = {31.0, 29.0, 28.0};
  return m;
}

MapSpec make_exnotglob() {
  std::vector<Segment> segs = {{0.0, 28.0, 50.0 / 28.0, 0.0},
                               {28.0, 31.0, -5.0, 190.0},
                               {31.0, 32.0, -3.0, 128.0},
                               {32.0, 33.0, -2.0, 96.0},
                               {33.0, 45.0, -1.7, 86.1}};
  MapSpec m = make_piecewise_linear(segs, 9.6, "exnotglob");
  m.bracket_lo = 20.0;
  m.bracket_hi = 40.0;
  m.suggested_partition = {31.0, 28.0};
  return m;
}

MapSpec make_exswitching() {
  MapSpec m;
  m.name = "exswitching";
  const double c = 1.0 - 2.0 / kPi;
  m.f = [c](double x) {
    if (x <= c) return (kPi + 2.0) / (kPi - 2.0) * x;
    if (x < 1.0) return (1.0 - x) * (1.5 + 0.5 * std::sin(1.0 / (x - 1.0))) + 1.0;
    if (x == 1.0) return 1.0;
    if (x < 1.0 + 2.0 / kPi)
      return (1.0 - x) * (1.25 + 0.25 * std::sin(1.0 / (x - 1.0))) + 1.0;
    return 1.0 - 3.0 / kPi;
  };
  m.smooth = false;
  m.breakpoints = {c, 1.0, 1.0 + 2.0 / kPi};
  m.bracket_lo = 0.5;
  m.bracket_hi = 1.5;
  return m;
}

}  // namespace

double MapSpec::eval(double x) const {
  if (!(x >= 0.0)) throw std::domain_error("map evaluated at negative (or NaN) x");
  return f(x);
}

MapSpec make_piecewise_linear(const std::vector<Segment>& segments, double tail_value,
                              const std::string& name) {
  if (segments.empty())
    throw std::invalid_argument("piecewise map needs at least one segment");
  for (size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].lo < segments[i].hi))
      throw std::invalid_argument("piecewise map: segment with lo >= hi");
    if (i > 0 && segments[i].lo != segments[i - 1].hi)
      throw std::invalid_argument("piecewise map: segments must tile contiguously");
  }
  MapSpec m;
  m.name = name;
  m.piecewise_linear = true;
  m.segments = segments;
  m.tail_value = tail_value;
  m.smooth = false;
  for (const auto& s : segments) m.breakpoints.push_back(s.hi);
  auto segs = segments;
  m.f = [segs, tail_value](double x) { return piecewise_eval(segs, tail_value, x); };
  return m;
}

MapSpec map_from_json(const nlohmann::json& doc) {
  std::vector<Segment> segs;
  for (const auto& j : doc.at("segments"))
    segs.push_back({j.at("lo").get<double>(), j.at("hi").get<double>(),
                    j.at("slope").get<double>(), j.at("intercept").get<double>()});
  MapSpec m = make_piecewise_linear(segs, doc.at("tail").get<double>(),
                                    doc.value("name", std::string("piecewise")));
  if (doc.contains("partition"))
    for (const auto& a : doc.at("partition")) m.suggested_partition.push_back(a.get<double>());
  return m;
}

MapSpec make_map(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "ricker") return make_ricker(get_param(params, "r"));
  if (name == "quail") return make_quail();
  if (name == "exglob") return make_exglob();
  if (name == "exnotglob") return make_exnotglob();
  if (name == "exswitching") return make_exswitching();
  throw std::invalid_argument("unknown map: " + name);
}

std::vector<std::pair<std::string, std::string>> builtin_maps() {
  return {
      {"ricker", "x*exp(r*(1-x)); requires r>0; K=1, f'(K)=1-r"},
      {"quail", "x*(0.55+3.45/(1+x^9)); K~1.2347"},
      {"exglob", "piecewise linear, K=32; certified globally stabilizable at alpha0=5/12"},
      {"exnotglob", "piecewise linear, K=32; locally stable gain admits a two-cycle"},
      {"exswitching", "oscillating-slope map, K=1; one-sided constants L-=2, L+=1.5"},
  };
}

double find_equilibrium(const MapSpec& spec, double lo, double hi, double* residual) {
  if (!(lo < hi) || lo < 0)
    throw std::invalid_argument("find_equilibrium: bad bracket");
  auto s = [&](double x) { return spec.eval(x) - x; };
  const int N = 997;
  double prev_x = lo, prev_s = s(lo);
  int changes = 0;
  double blo = lo, bhi = hi, exact = std::numeric_limits<double>::quiet_NaN();
  for (int i = 1; i <= N; ++i) {
    double x = lo + (hi - lo) * i / N;
    double sx = s(x);
    if (sx == 0.0) {
      exact = x;
    } else if (prev_s != 0.0 && (sx > 0) != (prev_s > 0)) {
      ++changes;
      blo = prev_x;
      bhi = x;
    }
    if (sx != 0.0) {
      prev_x = x;
      prev_s = sx;
    }
  }
  double K = exact;
  if (!std::isnan(exact) && changes > 0)
    throw std::invalid_argument("find_equilibrium: multiple sign changes in bracket");
  if (std::isnan(exact) && changes == 0)
    throw std::invalid_argument("find_equilibrium: no sign change in bracket");
  if (std::isnan(exact) && changes > 1)
    throw std::invalid_argument("find_equilibrium: multiple sign changes in bracket");
  if (std::isnan(exact)) {
    // Bisect all the way to machine precision: downstream chord-slope
    // estimators divide by (x - K), so a sloppy root poisons them.
    double a = blo, b = bhi, fa = s(a);
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (a + b), fm = s(m);
      K = m;
      if (fm == 0.0 || m == a || m == b) break;
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    // Prefer an exactly-fixed neighbour if one exists within a few ulps.
    for (double c : {std::nextafter(K, blo), K, std::nextafter(K, bhi)})
      if (s(c) == 0.0) {
        K = c;
        break;
      }
  }
  double res = std::fabs(spec.eval(K) - K);
  if (res > 1e-10 * std::max(1.0, K))
    throw std::runtime_error("find_equilibrium: failed to meet residual tolerance");
  if (residual) *residual = res;
  return K;
}

void probe_extrema(const MapSpec& spec, double K, double& x_max, double& f_m,
                   double& f2_m) {
  const int N = 10000;
  // Largest maximizer of f on [0, K].
  double best_x = 0.0, best_f = spec.eval(0.0);
  for (int i = 0; i <= N; ++i) {
    double x = K * i / N;
    double fx = spec.eval(x);
    if (fx >= best_f - 1e-12 * std::max(1.0, std::fabs(best_f))) {
      if (fx > best_f) best_f = fx;
      best_x = x;
    }
  }
  double h = K / N;
  double lo = std::max(0.0, best_x - h), hi = std::min(K, best_x + h);
  double refined = golden_max([&](double x) { return spec.eval(x); }, lo, hi,
                              1e-10 * std::max(1.0, K));
  // Candidate maximizers: refined point, grid best, breakpoints, endpoints.
  std::vector<double> cand = {refined, best_x, 0.0, K};
  for (double b : spec.breakpoints)
    if (b >= 0.0 && b <= K) cand.push_back(b);
  x_max = cand[0];
  f_m = spec.eval(cand[0]);
  for (double x : cand) {
    double fx = spec.eval(x);
    double tol = 1e-12 * std::max(1.0, std::fabs(f_m));
    if (fx > f_m + tol || (std::fabs(fx - f_m) <= tol && x > x_max)) {
      x_max = x;
      f_m = fx;
    }
  }

  // Infimum of f on (K, f_m].
  double worst_x = f_m, worst_f = spec.eval(f_m);
  for (int i = 1; i <= N; ++i) {
    double x = K + (f_m - K) * i / N;
    double fx = spec.eval(x);
    if (fx < worst_f) {
      worst_f = fx;
      worst_x = x;
    }
  }
  h = (f_m - K) / N;
  lo = std::max(K + 1e-12 * std::max(1.0, K), worst_x - h);
  hi = std::min(f_m, worst_x + h);
  double refined_min = golden_min([&](double x) { return spec.eval(x); }, lo, hi,
                                  1e-10 * std::max(1.0, K));
  std::vector<double> mcand = {refined_min, worst_x, f_m};
  for (double b : spec.breakpoints)
    if (b > K && b <= f_m) mcand.push_back(b);
  f2_m = worst_f;
  for (double x : mcand) f2_m = std::min(f2_m, spec.eval(x));
}

double lipschitz_sup(const MapSpec& spec, double K, double lo, double hi,
                     bool left_side) {
  if (!(lo < hi)) throw std::invalid_argument("lipschitz_sup: bad interval");
  auto ratio = [&](double x) {
    if (left_side) return (spec.eval(x) - K) / (K - x);
    return (K - spec.eval(x)) / (x - K);
  };
  const int N = 10000;
  double best = -std::numeric_limits<double>::infinity(), best_x = lo;
  for (int i = 1; i < N; ++i) {
    double x = lo + (hi - lo) * i / N;
    if (std::fabs(x - K) < 1e-12 * std::max(1.0, K)) continue;
    double r = ratio(x);
    if (r > best) {
      best = r;
      best_x = x;
    }
  }
  double h = (hi - lo) / N;
  double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
  // Keep the refinement bracket clear of the removable singularity at K: any
  // leftover root residual is amplified by 1/(x - K) there.
  double guard = 1e-7 * std::max(1.0, K);
  if (a < K && b > K - guard && left_side) b = K - guard;
  if (b > K && a < K + guard && !left_side) a = K + guard;
  if (a < b) {
    double rx = golden_max(ratio, a, b, 1e-10 * std::max(1.0, K));
    best = std::max(best, ratio(rx));
  }
  return best;
}

void estimate_lipschitz(const MapSpec& spec, MapProbe& probe) {
  double Lm = lipschitz_sup(spec, probe.K, probe.x_max, probe.K, true);
  double Lp = lipschitz_sup(spec, probe.K, probe.K, probe.f_m, false);
  if (spec.smooth) {
    double slope = std::fabs(derivative_at(spec, probe.K, 1));
    Lm = std::max(Lm, slope);
    Lp = std::max(Lp, slope);
  }
  if (!(Lm > 0.0) || !(Lp > 0.0))
    throw std::runtime_error("estimate_lipschitz: map does not cross K transversally");
  probe.sides_swapped = Lp > Lm;
  probe.L_minus = std::max(Lm, Lp);
  probe.L_plus = std::min(Lm, Lp);
}

double derivative_at(const MapSpec& spec, double x, int order) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("derivative_at: order must be 1, 2 or 3");
  double h = (order == 1 ? 1e-5 : 1e-4) * std::max(1.0, std::fabs(x));
  if (!spec.smooth) {
    for (double b : spec.breakpoints)
      if (std::fabs(x - b) <= 10.0 * h)
        throw std::domain_error("derivative_at: non-smooth point");
  }
  if (order == 1 && spec.df1) return spec.df1(x);
  if (order == 2 && spec.df2) return spec.df2(x);
  if (order == 3 && spec.df3) return spec.df3(x);
  auto f = [&](double y) { return spec.eval(std::max(0.0, y)); };
  switch (order) {
    case 1:
      return (f(x + h) - f(x - h)) / (2.0 * h);
    case 2:
      return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    default:
      return (f(x + 2 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2 * h)) /
             (2.0 * h * h * h);
  }
}

double schwarzian_at(const MapSpec& spec, double x) {
  double d1 = derivative_at(spec, x, 1);
  if (std::fabs(d1) <= 1e-8)
    throw std::domain_error("schwarzian_at: derivative too close to zero");
  double d2 = derivative_at(spec, x, 2);
  double d3 = derivative_at(spec, x, 3);
  double q = d2 / d1;
  return d3 / d1 - 1.5 * q * q;
}

MapProbe probe_map(const MapSpec& spec) {
  MapProbe p;
  double lo = spec.bracket_lo, hi = spec.bracket_hi;
  if (!(lo < hi)) {
    // No bracket given (user-supplied piecewise map): scan for one.
    lo = 1e-9;
    hi = spec.piecewise_linear ? spec.segments.back().hi : 100.0;
  }
  p.K = find_equilibrium(spec, lo, hi, &p.residual);
  probe_extrema(spec, p.K, p.x_max, p.f_m, p.f2_m);

  // Structural invariants: f above the diagonal below K, strictly between 0
  // and the diagonal above K.
  const int M = 2000;
  for (int i = 1; i < M; ++i) {
    double x = p.K * i / M;
    if (p.K - x <= 1e-9 * std::max(1.0, p.K)) continue;
    if (!(spec.eval(x) > x)) {
      std::ostringstream os;
      os << "map invariant violated: f(x) <= x at x=" << x << " below K";
      throw std::runtime_error(os.str());
    }
  }
  for (int i = 1; i < M; ++i) {
    double x = p.K + (2.0 * p.K) * i / M;
    double fx = spec.eval(x);
    if (!(fx > 0.0) || !(fx < x)) {
      std::ostringstream os;
      os << "map invariant violated: f(x) outside (0, x) at x=" << x << " above K";
      throw std::runtime_error(os.str());
    }
  }
  if (!(p.f2_m > 0.0 && p.f2_m < p.K && p.K < p.f_m))
    throw std::runtime_error("map invariant violated: need 0 < f2_m < K < f_m");

  estimate_lipschitz(spec, p);
  if (spec.smooth) {
    double L0 = -derivative_at(spec, p.K, 1);
    if (!(L0 > 1.0))
      throw std::runtime_error("map invariant violated: equilibrium is not unstable");
    p.L0 = L0;
    // Sample the Schwarzian derivative away from critical points.
    bool ok = true;
    const int S = 200;
    for (int i = 1; i <= S; ++i) {
      double x = 0.02 * p.K + (p.f_m - 0.02 * p.K) * i / S;
      double d1;
      try {
        d1 = derivative_at(spec, x, 1);
      } catch (const std::domain_error&) {
        continue;
      }
      if (std::fabs(d1) <= 1e-6) continue;
      if (schwarzian_at(spec, x) >= 1e-6) {
        ok = false;
        break;
      }
    }
    p.schwarzian_ok = ok;
  } else {
    if (!(p.L_minus * p.L_plus > 1.0))
      throw std::runtime_error("map invariant violated: equilibrium is not unstable");
  }
  return p;
}

}  // namespace npbc
