#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "mixnet/network.hpp"

namespace mixnet {

/// A route node is either a subregion or one travel direction of a built
/// expressway.
struct RouteNode {
  enum class Kind { Subregion = 0, Expressway = 1 };

  Kind kind = Kind::Subregion;
  int a = 0;  // subregion id, or expressway origin
  int b = 0;  // expressway destination (0 for subregions)

  static RouteNode subregion(int id) { return {Kind::Subregion, id, 0}; }
  static RouteNode expressway(int from, int to) { return {Kind::Expressway, from, to}; }

  bool is_subregion() const { return kind == Kind::Subregion; }
  bool is_expressway() const { return kind == Kind::Expressway; }
  DirectedPair direction() const { return {a, b}; }

  // Ordering used for deterministic route lists: by first id, subregion
  // before expressway, then second id.
  auto operator<=>(const RouteNode& o) const {
    if (auto c = a <=> o.a; c != 0) return c;
    if (auto c = static_cast<int>(kind) <=> static_cast<int>(o.kind); c != 0) return c;
    return b <=> o.b;
  }
  bool operator==(const RouteNode&) const = default;
};

std::string to_string(const RouteNode& node);

struct Route {
  int origin = 0;
  int destination = 0;
  std::vector<RouteNode> nodes;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const Route&) const = default;
};

std::string to_string(const Route& route);

constexpr int kDefaultMaxRouteNodes = 5;

/// Whether `to` may directly follow `from` under the design.
bool is_linked(const MixedNetwork& net, const DesignVector& design, const RouteNode& from,
               const RouteNode& to);

/// Empty when the route is legal, otherwise a description of the first defect.
std::optional<std::string> check_route(const MixedNetwork& net, const DesignVector& design,
                                       const Route& route);

/// All legal routes from origin to destination with at most max_nodes nodes,
/// in lexicographic node order. An internal trip yields the single-node route.
std::vector<Route> enumerate_routes(const MixedNetwork& net, const DesignVector& design, int origin,
                                    int destination, int max_nodes = kDefaultMaxRouteNodes);

/// Routes for every OD pair, origins then destinations in ascending id order.
std::vector<Route> enumerate_all_routes(const MixedNetwork& net, const DesignVector& design,
                                        int max_nodes = kDefaultMaxRouteNodes);

/// Successor of `node`; nullopt at the route end. Throws if node is absent.
std::optional<RouteNode> next_node(const Route& route, const RouteNode& node);
/// Predecessor of `node`; nullopt at the route start. Throws if node is absent.
std::optional<RouteNode> prev_node(const Route& route, const RouteNode& node);

}  // namespace mixnet
