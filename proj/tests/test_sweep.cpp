#include <doctest.h>

#include <cmath>

#include "npbc/io.hpp"
#include "npbc/sweep.hpp"

using namespace npbc;

namespace {

struct Fixture {
  MapSpec m = make_map("ricker", {{"r", 3.5}});
  MapProbe p = probe_map(m);
};

}  // namespace

TEST_CASE("noiseless collapse threshold lands on the analytic value") {
  Fixture fx;
  ThresholdScan s = collapse_threshold(fx.m, fx.p, NoiseSpec::bernoulli(), 0.0, 0.40,
                                       0.46, 0.01, 0.5, 10000, 1, 1u, 2);
  REQUIRE(s.threshold.has_value());
  CHECK(*s.threshold == doctest::Approx(0.43).epsilon(1e-12));
  REQUIRE(s.alpha.size() == s.rate.size());
  // Rates are a step function around the true threshold 3/7.
  for (size_t i = 0; i < s.alpha.size(); ++i) {
    if (s.alpha[i] < 0.42) CHECK(s.rate[i] == doctest::Approx(0.0));
    if (s.alpha[i] > 0.44) CHECK(s.rate[i] == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(collapse_threshold(fx.m, fx.p, NoiseSpec::bernoulli(), 0.0, 0.4,
                                     0.46, 0.0, 0.5, 100, 1, 1u, 1),
                  std::invalid_argument);
}

TEST_CASE("alpha sweep: admissibility, reproducibility, dynamics") {
  Fixture fx;
  auto run = [&](std::uint64_t seed) {
    return bifurcation_sweep(fx.m, fx.p, NoiseSpec::bernoulli(), 0.1, 0.05, 0.50,
                             10, 500, 20, 2, 0.5, seed, 2);
  };
  auto rows1 = run(77u), rows2 = run(77u), rows3 = run(78u);
  REQUIRE(rows1.size() == 10);
  // alpha = 0.05 < ell = 0.1 is inadmissible and skipped.
  CHECK(rows1[0].skipped);
  CHECK_FALSE(rows1.back().skipped);
  CHECK(rows1.back().states.size() == 40);
  // Byte-identical artifacts for identical master seeds.
  CHECK(bifurcation_csv(rows1) == bifurcation_csv(rows2));
  CHECK(bifurcation_csv(rows1) != bifurcation_csv(rows3));
  // High-gain rows have settled near the fixed point.
  for (double s : rows1.back().states)
    CHECK(std::fabs(s - fx.p.K) < 0.05);
  CHECK_THROWS_AS(bifurcation_sweep(fx.m, fx.p, NoiseSpec::bernoulli(), 0.1, 0.0,
                                    0.5, 1, 10, 5, 1, 0.5, 1u, 1),
                  std::invalid_argument);
}

TEST_CASE("stability raster") {
  Fixture fx;
  std::vector<double> alphas = {0.30, 0.36, 0.40, 0.44, 0.48};
  std::vector<double> ells = {0.0, 0.1, 0.2};
  StabilityRegion r = region_raster(fx.m, fx.p, NoiseSpec::bernoulli(), alphas, ells,
                                    0.5, 5000, 40, 3u, 2);
  CHECK(r.beta_star_value == doctest::Approx(3.0 / 7.0).epsilon(1e-3));
  CHECK_FALSE(r.sides.has_value());  // smooth map: no side cap involved

  // The zero-amplitude column reduces to the deterministic classifier.
  for (size_t ia = 0; ia < alphas.size(); ++ia) {
    Verdict expect =
        alphas[ia] > r.beta_star_value ? Verdict::Holds : Verdict::Fails;
    CHECK(r.at(ia, 0) == expect);
  }
  // One-directional agreement: analytic certainty forces empirical collapse.
  for (size_t ia = 0; ia < alphas.size(); ++ia)
    for (size_t il = 0; il < ells.size(); ++il)
      if (r.analytic[ia * ells.size() + il] == Verdict::Holds)
        CHECK(r.rate_at(ia, il) >= 0.99);
  // Identical seeds give identical artifacts.
  StabilityRegion r2 = region_raster(fx.m, fx.p, NoiseSpec::bernoulli(), alphas,
                                     ells, 0.5, 5000, 40, 3u, 4);
  CHECK(region_csv(r) == region_csv(r2));

  CHECK_THROWS_AS(region_raster(fx.m, fx.p, NoiseSpec::bernoulli(), {0.4, 0.3},
                                ells, 0.5, 100, 5, 1u, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(region_raster(fx.m, fx.p, NoiseSpec::bernoulli(), alphas,
                                {0.1, 0.1}, 0.5, 100, 5, 1u, 1),
                  std::invalid_argument);
}

TEST_CASE("raster of a kinked map carries the side cap") {
  MapSpec m = make_map("exswitching");
  MapProbe p = probe_map(m);
  StabilityRegion r = region_raster(m, p, NoiseSpec::bernoulli(), {0.2, 0.3},
                                    {0.0, 0.05}, 0.5, 2000, 10, 5u, 2);
  REQUIRE(r.sides.has_value());
  CHECK(*r.sides > 0.0);
  CHECK(*r.sides < 1.0);
}

TEST_CASE("local-threshold envelope curve for the smooth poultry model") {
  MapSpec m = make_map("quail");
  MapProbe p = probe_map(m);
  EnvelopeCurve c = envelope_curve(m, p);
  CHECK(c.alpha_used == doctest::Approx(0.4321).epsilon(1e-3));
  CHECK(c.curve.size() == 1000);
  CHECK(c.max_envel < c.alpha_used);
  // The curve approaches its supremum at the equilibrium end.
  CHECK(c.curve.back().second == doctest::Approx(c.max_envel).epsilon(1e-2));
  // An explicit gain overrides the default.
  EnvelopeCurve c2 = envelope_curve(m, p, 0.45);
  CHECK(c2.alpha_used == doctest::Approx(0.45));

  MapSpec pw = make_map("exglob");
  MapProbe ppw = probe_map(pw);
  CHECK_THROWS_AS(envelope_curve(pw, ppw), std::invalid_argument);
}

TEST_CASE("csv artifacts have stable headers and shapes") {
  Fixture fx;
  ThresholdScan s = collapse_threshold(fx.m, fx.p, NoiseSpec::bernoulli(), 0.0, 0.42,
                                       0.44, 0.01, 0.5, 3000, 1, 1u, 1);
  std::string csv = threshold_csv(s);
  CHECK(csv.rfind("alpha,rate\n", 0) == 0);

  MapSpec q = make_map("quail");
  MapProbe pq = probe_map(q);
  EnvelopeCurve c = envelope_curve(q, pq);
  CHECK(envelope_curve_csv(c).rfind("x,envel\n", 0) == 0);

  TrajectoryResult t = run_trajectory(fx.m, fx.p, ControlSpec{0.44, 0.0},
                                      NoiseSpec::bernoulli(), 0.5, 500, 1u, 0u);
  std::string tc = trajectory_csv(t);
  CHECK(tc.rfind("n,x\n", 0) == 0);
  CHECK(fmt_double(0.1) == "0.10000000000000001");
}
