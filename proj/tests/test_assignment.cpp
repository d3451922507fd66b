#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mixnet/assignment.hpp"
#include "mixnet/simulation.hpp"
#include "support.hpp"

using namespace mixnet;
using mixnet::test::case_study;

namespace {

RouteNode S(int i) { return RouteNode::subregion(i); }
RouteNode E(int i, int j) { return RouteNode::expressway(i, j); }

std::size_t route_index(const std::vector<Route>& routes, const std::vector<RouteNode>& nodes) {
  for (std::size_t k = 0; k < routes.size(); ++k) {
    if (routes[k].nodes == nodes) return k;
  }
  FAIL("route not found");
  return 0;
}

}  // namespace

TEST_CASE("logit probabilities") {
  SUBCASE("equal times split evenly") {
    const std::vector<double> t{300.0, 300.0, 300.0};
    for (double p : logit_probabilities(t, 0.005)) CHECK(p == doctest::Approx(1.0 / 3));
  }
  SUBCASE("mu = 0 is uniform") {
    const std::vector<double> t{100.0, 900.0};
    for (double p : logit_probabilities(t, 0.0)) CHECK(p == doctest::Approx(0.5));
  }
  SUBCASE("600 s against 900 s at mu = 0.01") {
    const std::vector<double> t{600.0, 900.0};
    const auto p = logit_probabilities(t, 0.01);
    const double oracle = 1.0 / (1.0 + std::exp(-3.0));
    CHECK(p[0] == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(p[0] == doctest::Approx(0.9526).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.0474).epsilon(1e-3));
  }
  SUBCASE("empty set and negative mu are rejected") {
    CHECK_THROWS_AS(logit_probabilities(std::vector<double>{}, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(logit_probabilities(std::vector<double>{1.0}, -1.0), std::invalid_argument);
  }
  SUBCASE("huge times do not underflow") {
    const std::vector<double> t{1e7, 1e7 + 100};
    const auto p = logit_probabilities(t, 0.01);
    CHECK(p[0] + p[1] == doctest::Approx(1.0));
    CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  }
}

TEST_CASE("logit normalisation, shift invariance and monotonicity") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3000.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> t(1 + rng() % 8);
    for (auto& x : t) x = u(rng);
    const double mu = u(rng) / 1e5;
    const auto p = logit_probabilities(t, mu);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
    auto shifted = t;
    const double c = u(rng) - 1500.0;
    for (auto& x : shifted) x += c;
    const auto q = logit_probabilities(shifted, mu);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-12);
    if (t.size() > 1 && mu > 0.0 && p[0] > 1e-9 && p[0] < 1.0 - 1e-9) {
      auto faster = t;
      faster[0] -= 10.0;
      CHECK(logit_probabilities(faster, mu)[0] > p[0]);
    }
  }
}

TEST_CASE("demand split") {
  const std::vector<double> third{1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (double q : split_demand(3000.0, third)) CHECK(q == doctest::Approx(1000.0));
  for (double q : split_demand(0.0, third)) CHECK(q == 0.0);
  const std::vector<double> theta{0.9526, 0.0474};
  const auto s = split_demand(3400.0, theta);
  CHECK(s[0] == doctest::Approx(3238.84));
  CHECK(s[1] == doctest::Approx(161.16));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t(1 + rng() % 6);
    for (auto& x : t) x = 1000 * u(rng);
    const double q = 5 * u(rng);
    const auto split = split_demand(q, logit_probabilities(t, 0.01));
    CHECK(std::accumulate(split.begin(), split.end(), 0.0) == doctest::Approx(q).epsilon(1e-15));
  }
}

TEST_CASE("route travel time from node times") {
  NodeTimes times;
  times.subregion = {{4, 100.0}, {5, 200.0}, {2, 300.0}};
  times.onramp[{4, 5}] = 10.0;
  times.mainline[{4, 5}] = 50.0;
  times.offramp[{4, 5}] = 20.0;
  times.connramp[{{4, 5}, {5, 2}}] = 15.0;
  times.mainline[{5, 2}] = 60.0;
  times.offramp[{5, 2}] = 25.0;
  CHECK(route_travel_time({4, 2, {S(4), S(5), S(2)}}, times) == 600.0);
  CHECK(route_travel_time({4, 2, {S(4), E(4, 5), S(5), S(2)}}, times) ==
        100.0 + 10.0 + 50.0 + 20.0 + 200.0 + 300.0);
  CHECK(route_travel_time({4, 2, {S(4), E(4, 5), E(5, 2), S(2)}}, times) ==
        100.0 + 10.0 + 50.0 + 15.0 + 60.0 + 25.0 + 300.0);
  CHECK_THROWS_AS(route_travel_time({4, 3, {S(4), S(3)}}, times), std::invalid_argument);
}

TEST_CASE("free-flow route times on the empty case-study network") {
  const auto& sc = case_study();
  const auto design = DesignVector::from_bits(sc.network, "01000000");  // 1-4, 6 km, 12 cells
  Simulation sim(sc, design);
  const auto& routes = sim.routes();
  const auto times = sim.route_times();
  const double t1 = 4800.0 / 15.0;
  CHECK(t1 == doctest::Approx(320.0));
  CHECK(times[route_index(routes, {S(1)})] == doctest::Approx(t1));
  const double ramp = 500.0 / (40.0 / 3.6);
  const double cell = 500.0 / (80.0 / 3.6);
  CHECK(ramp + 12 * cell == doctest::Approx(315.0));
  const double t4 = 5500.0 / 15.0;
  CHECK(times[route_index(routes, {S(1), E(1, 4), S(4)})] ==
        doctest::Approx(t1 + ramp + 12 * cell + ramp + t4));
  // the indexed fast path agrees with the map-based reference
  const auto nt = sim.node_times();
  for (std::size_t r = 0; r < routes.size(); ++r) {
    CHECK(times[r] == doctest::Approx(route_travel_time(routes[r], nt)).epsilon(1e-12));
  }
}

TEST_CASE("jammed subregion uses the speed floor") {
  auto sc = case_study();
  Simulation sim(sc, DesignVector::empty_for(sc.network));
  const auto& routes = sim.routes();
  const std::size_t r = route_index(routes, {S(1)});
  sim.set_class_accumulation(r, 0, 10000.0);
  const double t = sim.route_times()[r];
  CHECK(std::isfinite(t));
  CHECK(t == doctest::Approx(4800.0 / std::max(0.1, 620.0 / 10000.0)));
}

TEST_CASE("demand profile") {
  const auto& d = case_study().demand;
  CHECK(d.rate(1, 1, 0.0) == doctest::Approx(3400.0 / 3600.0));
  CHECK(d.rate(1, 1, 1799.0) == doctest::Approx(3400.0 / 3600.0));
  CHECK(d.rate(1, 1, 1800.0) == 0.0);
  CHECK(d.total_vehicles(3600.0) == doctest::Approx(80200.0 / 2));
  CHECK(d.problems(3600.0).empty());
  CHECK_FALSE(d.problems(4000.0).empty());
  auto gap = d;
  gap.segments[1].start = 2700.0;
  CHECK(gap.problems(3600.0).at(0).find("is not covered") != std::string::npos);
}
