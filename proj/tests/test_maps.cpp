#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "npbc/maps.hpp"

using namespace npbc;

TEST_CASE("ricker structural constants") {
  MapSpec m = make_map("ricker", {{"r", 3.5}});
  MapProbe p = probe_map(m);
  CHECK(p.K == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.residual <= 1e-10);
  REQUIRE(p.L0.has_value());
  CHECK(*p.L0 == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(p.x_max == doctest::Approx(1.0 / 3.5).epsilon(1e-6));
  CHECK(p.f_m == doctest::Approx(std::exp(2.5) / 3.5).epsilon(1e-8));
  CHECK(p.f2_m > 0.0);
  CHECK(p.f2_m < p.K);
  CHECK(p.schwarzian_ok);
  // Chord constants dominate the derivative magnitude at K.
  CHECK(p.L_minus >= *p.L0 - 1e-9);
  CHECK(p.L_plus >= 1.0);
}

TEST_CASE("ricker requires a positive growth parameter") {
  CHECK_THROWS_AS(make_map("ricker", {{"r", -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_map("ricker"), std::invalid_argument);
  CHECK_THROWS_AS(make_map("no-such-map"), std::invalid_argument);
}

TEST_CASE("quail equilibrium and slope") {
  MapSpec m = make_map("quail");
  MapProbe p = probe_map(m);
  // f(K) = K forces 1 + K^9 = 23/3.
  CHECK(p.K == doctest::Approx(std::pow(20.0 / 3.0, 1.0 / 9.0)).epsilon(1e-8));
  REQUIRE(p.L0.has_value());
  CHECK(*p.L0 == doctest::Approx(2.5217).epsilon(1e-3));
  CHECK(p.schwarzian_ok);
}

TEST_CASE("finite differences agree with analytic derivatives") {
  MapSpec m = make_map("ricker", {{"r", 3.0}});
  MapSpec fd = m;
  fd.df1 = nullptr;
  fd.df2 = nullptr;
  fd.df3 = nullptr;
  for (double x : {0.2, 0.7, 1.0, 1.9, 2.8}) {
    for (int order : {1, 2, 3}) {
      double exact = derivative_at(m, x, order);
      double approx = derivative_at(fd, x, order);
      CHECK(approx ==
            doctest::Approx(exact).epsilon(order == 1 ? 1e-6 : 1e-4));
    }
  }
}

TEST_CASE("derivative queries near a kink are refused") {
  MapSpec m = make_map("exglob");
  CHECK_THROWS_AS(derivative_at(m, 28.0, 1), std::domain_error);
  CHECK_NOTHROW(derivative_at(m, 20.0, 1));
}

TEST_CASE("piecewise example: globally certifiable map") {
  MapSpec m = make_map("exglob");
  MapProbe p = probe_map(m);
  CHECK(p.K == doctest::Approx(32.0).epsilon(1e-10));
  CHECK(p.x_max == doctest::Approx(28.0).epsilon(1e-10));
  CHECK(p.f_m == doctest::Approx(51.0).epsilon(1e-10));
  CHECK(p.f2_m == doctest::Approx(8.6).epsilon(1e-9));
  CHECK(p.L_minus == doctest::Approx(4.75).epsilon(1e-6));
  CHECK(p.L_plus == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_FALSE(p.L0.has_value());
}

TEST_CASE("piecewise example: locally-but-not-globally stable map") {
  MapSpec m = make_map("exnotglob");
  MapProbe p = probe_map(m);
  CHECK(p.K == doctest::Approx(32.0).epsilon(1e-10));
  CHECK(p.f_m == doctest::Approx(50.0).epsilon(1e-10));
  CHECK(p.L_plus == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("oscillating-slope map: one-sided chord constants") {
  MapSpec m = make_map("exswitching");
  MapProbe p = probe_map(m);
  CHECK(p.K == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.f_m == doctest::Approx(1.0 + 2.0 / M_PI).epsilon(1e-9));
  CHECK(p.f2_m == doctest::Approx(1.0 - 3.0 / M_PI).epsilon(1e-6));
  CHECK(p.L_minus == doctest::Approx(2.0).epsilon(5e-3));
  CHECK(p.L_plus == doctest::Approx(1.5).epsilon(5e-3));
  CHECK_FALSE(p.L0.has_value());
}

TEST_CASE("maps whose graph violates the unimodal crossing are rejected") {
  // Below the fixed point the graph must stay above the diagonal.
  std::vector<Segment> segs = {{0.0, 1.0, 0.5, 0.0}, {1.0, 3.0, -1.5, 2.0}};
  MapSpec m = make_piecewise_linear(segs, 0.1, "bad");
  m.bracket_lo = 0.1;
  m.bracket_hi = 2.0;
  CHECK_THROWS_AS(probe_map(m), std::exception);
}

TEST_CASE("piecewise builder validates segment tiling") {
  CHECK_THROWS_AS(make_piecewise_linear({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(
      make_piecewise_linear({{0.0, 1.0, 1.0, 0.0}, {1.5, 2.0, 1.0, 0.0}}, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(make_piecewise_linear({{1.0, 1.0, 1.0, 0.0}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("json round trip for a custom piecewise map") {
  nlohmann::json doc = {
      {"name", "custom"},
      {"tail", 8.6},
      {"segments",
       {{{"lo", 0.0}, {"hi", 28.0}, {"slope", 51.0 / 28.0}, {"intercept", 0.0}},
        {{"lo", 28.0}, {"hi", 29.0}, {"slope", -6.0}, {"intercept", 219.0}},
        {{"lo", 29.0}, {"hi", 31.0}, {"slope", -5.0}, {"intercept", 190.0}},
        {{"lo", 31.0}, {"hi", 32.0}, {"slope", -3.0}, {"intercept", 128.0}},
        {{"lo", 32.0}, {"hi", 33.0}, {"slope", -2.0}, {"intercept", 96.0}},
        {{"lo", 33.0}, {"hi", 38.0}, {"slope", -1.4}, {"intercept", 76.2}},
        {{"lo", 38.0}, {"hi", 50.0}, {"slope", -1.2}, {"intercept", 68.6}}}},
      {"partition", {31.0, 29.0, 28.0}}};
  MapSpec m = map_from_json(doc);
  MapProbe p = probe_map(m);  // auto-bracket path: no bracket set
  CHECK(p.K == doctest::Approx(32.0).epsilon(1e-10));
  CHECK(m.suggested_partition.size() == 3);
  CHECK(m.eval(10.0) == doctest::Approx(make_map("exglob").eval(10.0)));
}

TEST_CASE("equilibrium finder rejects bad brackets") {
  MapSpec m = make_map("ricker", {{"r", 3.5}});
  CHECK_THROWS_AS(find_equilibrium(m, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(find_equilibrium(m, 1.5, 3.0), std::invalid_argument);  // no root
  double res = -1.0;
  double K = find_equilibrium(m, 0.5, 2.0, &res);
  CHECK(K == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res <= 1e-10);
}

TEST_CASE("map evaluation rejects negative states") {
  MapSpec m = make_map("ricker", {{"r", 3.0}});
  CHECK_THROWS_AS(m.eval(-0.5), std::domain_error);
}

TEST_CASE("built-in map list covers every registered name") {
  auto list = builtin_maps();
  CHECK(list.size() == 5);
  for (const auto& [name, desc] : list) {
    CHECK_FALSE(desc.empty());
    if (name == "ricker")
      CHECK_NOTHROW(make_map(name, {{"r", 3.0}}));
    else
      CHECK_NOTHROW(make_map(name));
  }
}
