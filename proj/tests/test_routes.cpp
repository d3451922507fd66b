#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mixnet/errors.hpp"
#include "mixnet/routes.hpp"
#include "support.hpp"

using namespace mixnet;
using mixnet::test::case_study;

namespace {

RouteNode S(int i) { return RouteNode::subregion(i); }
RouteNode E(int i, int j) { return RouteNode::expressway(i, j); }

bool contains(const std::vector<Route>& routes, const std::vector<RouteNode>& nodes) {
  return std::any_of(routes.begin(), routes.end(),
                     [&](const Route& r) { return r.nodes == nodes; });
}

// Oracle link predicate written from the connector definitions only.
bool oracle_linked(const MixedNetwork& net, const DesignVector& d, const RouteNode& a,
                   const RouteNode& b) {
  const bool a_sub = a.kind == RouteNode::Kind::Subregion;
  const bool b_sub = b.kind == RouteNode::Kind::Subregion;
  if (a_sub && b_sub) {
    for (const auto& l : net.boundaries) {
      if (l.from == a.a && l.to == b.a) return true;
    }
    return false;
  }
  if (a_sub) return b.a == a.a && d.built(b.a, b.b);
  if (b_sub) return a.b == b.a;
  return a.b == b.a && b.b != a.a && d.built(b.a, b.b);
}

// Brute force: every ordered selection of distinct nodes up to max_nodes long.
std::set<std::vector<RouteNode>> oracle_routes(const MixedNetwork& net, const DesignVector& d,
                                               int o, int dest, int max_nodes) {
  std::vector<RouteNode> universe;
  for (const auto& s : net.subregions) universe.push_back(S(s.id));
  for (const auto& c : net.candidates) {
    if (d.built(c.origin, c.destination)) universe.push_back(E(c.origin, c.destination));
  }
  std::set<std::vector<RouteNode>> out;
  std::vector<RouteNode> path{S(o)};
  std::vector<char> used(universe.size(), 0);
  auto rec = [&](auto&& self) -> void {
    if (path.back() == S(dest)) {
      bool ok = true;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        ok = ok && oracle_linked(net, d, path[k], path[k + 1]);
      }
      if (ok) out.insert(path);
      return;
    }
    if (static_cast<int>(path.size()) == max_nodes) return;
    for (std::size_t u = 0; u < universe.size(); ++u) {
      if (used[u] || universe[u] == S(o)) continue;
      used[u] = 1;
      path.push_back(universe[u]);
      self(self);
      path.pop_back();
      used[u] = 0;
    }
  };
  rec(rec);
  return out;
}

}  // namespace

TEST_CASE("paper route listing for OD (4,2) with E45 and E25 built") {
  const auto& net = case_study().network;
  auto d = DesignVector::empty_for(net);
  d.set(PairKey::of(4, 5), true);
  d.set(PairKey::of(2, 5), true);
  const auto routes = enumerate_routes(net, d, 4, 2, 4);
  CHECK(contains(routes, {S(4), S(5), S(2)}));
  CHECK(contains(routes, {S(4), E(4, 5), E(5, 2), S(2)}));
  CHECK(contains(routes, {S(4), E(4, 5), S(5), S(2)}));
}

TEST_CASE("internal trip is a single-node route") {
  const auto& net = case_study().network;
  for (const auto& d : {DesignVector::empty_for(net), DesignVector::full_for(net)}) {
    const auto routes = enumerate_routes(net, d, 1, 1, 5);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].nodes == std::vector<RouteNode>{S(1)});
  }
}

TEST_CASE("OD (4,2), empty design, three nodes: brute-force oracle") {
  const auto& net = case_study().network;
  const auto d = DesignVector::empty_for(net);
  const auto routes = enumerate_routes(net, d, 4, 2, 3);
  std::set<std::vector<RouteNode>> got;
  for (const auto& r : routes) got.insert(r.nodes);
  const std::set<std::vector<RouteNode>> expected{
      {S(4), S(5), S(2)}, {S(4), S(3), S(2)}, {S(4), S(1), S(2)}};
  CHECK(got == expected);
  CHECK(got == oracle_routes(net, d, 4, 2, 3));
}

TEST_CASE("enumeration equals brute force for random designs and all OD pairs") {
  const auto& net = case_study().network;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const auto d = DesignVector::from_mask(net, rng() & 0xff);
    const int max_nodes = 3 + static_cast<int>(rng() % 3);
    for (int o = 1; o <= 5; ++o) {
      for (int dest = 1; dest <= 5; ++dest) {
        const auto routes = enumerate_routes(net, d, o, dest, max_nodes);
        std::set<std::vector<RouteNode>> got;
        for (const auto& r : routes) {
          got.insert(r.nodes);
          CHECK_FALSE(check_route(net, d, r).has_value());
          CHECK(static_cast<int>(r.nodes.size()) <= max_nodes);
        }
        CHECK(got.size() == routes.size());  // no duplicates
        CHECK(got == oracle_routes(net, d, o, dest, max_nodes));
      }
    }
  }
}

TEST_CASE("routes are ordered deterministically") {
  const auto& net = case_study().network;
  const auto d = DesignVector::full_for(net);
  const auto routes = enumerate_routes(net, d, 2, 4, 5);
  for (std::size_t k = 0; k + 1 < routes.size(); ++k) {
    CHECK(std::lexicographical_compare(routes[k].nodes.begin(), routes[k].nodes.end(),
                                       routes[k + 1].nodes.begin(), routes[k + 1].nodes.end()));
  }
}

TEST_CASE("route sets grow with the design") {
  const auto& net = case_study().network;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint64_t small = rng() & 0xff;
    const std::uint64_t big = small | (rng() & 0xff);
    const auto ds = DesignVector::from_mask(net, small);
    const auto db = DesignVector::from_mask(net, big);
    const int o = 1 + static_cast<int>(rng() % 5);
    const int dest = 1 + static_cast<int>(rng() % 5);
    const auto rb = enumerate_routes(net, db, o, dest, 5);
    for (const auto& r : enumerate_routes(net, ds, o, dest, 5)) CHECK(contains(rb, r.nodes));
  }
}

TEST_CASE("no illegal transitions in any route") {
  const auto& net = case_study().network;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = DesignVector::from_mask(net, rng() & 0xff);
    for (const auto& r : enumerate_all_routes(net, d, 5)) {
      for (std::size_t k = 0; k + 1 < r.nodes.size(); ++k) {
        const auto& a = r.nodes[k];
        const auto& b = r.nodes[k + 1];
        if (a.is_expressway() && b.is_subregion()) CHECK(b.a == a.b);
        if (a.is_subregion() && b.is_expressway()) CHECK(b.a == a.a);
      }
    }
  }
}

TEST_CASE("next and previous node along a route") {
  const Route r{4, 2, {S(4), E(4, 5), S(5), S(2)}};
  CHECK(next_node(r, E(4, 5)) == S(5));
  const Route r2{4, 2, {S(4), E(4, 5), E(5, 2), S(2)}};
  CHECK(prev_node(r2, E(5, 2)) == E(4, 5));
  const Route internal{1, 1, {S(1)}};
  CHECK_FALSE(next_node(internal, S(1)).has_value());
  CHECK_FALSE(prev_node(internal, S(1)).has_value());
  CHECK_THROWS_AS(next_node(r, S(3)), std::invalid_argument);
}

TEST_CASE("route checker rejects malformed routes") {
  const auto& net = case_study().network;
  const auto d = DesignVector::from_bits(net, "00000001");  // 4-5 only
  CHECK(check_route(net, d, {4, 2, {S(4), E(4, 5), S(5), S(2)}}) == std::nullopt);
  CHECK(check_route(net, d, {4, 2, {S(4), E(4, 5), S(2)}}).has_value());  // off-ramp to 2
  CHECK(check_route(net, d, {1, 3, {S(1), S(3)}}).has_value());           // not adjacent
  CHECK(check_route(net, d, {3, 2, {S(3), E(3, 4), S(4), S(1), S(2)}}).has_value());
  CHECK(check_route(net, d, {4, 4, {S(4), S(5), S(4)}}).has_value());     // revisit
  CHECK(check_route(net, d, {4, 2, {}}).has_value());
}

TEST_CASE("unknown ids and bad limits are rejected") {
  const auto& net = case_study().network;
  const auto d = DesignVector::empty_for(net);
  CHECK_THROWS_AS(enumerate_routes(net, d, 9, 1, 5), ValidationError);
  CHECK_THROWS_AS(enumerate_routes(net, d, 1, 9, 5), ValidationError);
  CHECK_THROWS_AS(enumerate_routes(net, d, 1, 2, 0), ValidationError);
  CHECK(to_string(Route{4, 2, {S(4), E(4, 5), S(5), S(2)}}) == "4 -> E45 -> 5 -> 2");
}
