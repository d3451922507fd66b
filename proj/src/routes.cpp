#include "mixnet/routes.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "mixnet/errors.hpp"

namespace mixnet {

std::string to_string(const RouteNode& node) {
  if (node.is_subregion()) return std::to_string(node.a);
  return "E" + std::to_string(node.a) + std::to_string(node.b);
}

std::string to_string(const Route& route) {
  std::string out;
  for (std::size_t k = 0; k < route.nodes.size(); ++k) {
    if (k) out += " -> ";
    out += to_string(route.nodes[k]);
  }
  return out;
}

bool is_linked(const MixedNetwork& net, const DesignVector& design, const RouteNode& from,
               const RouteNode& to) {
  if (from.is_subregion() && to.is_subregion()) {
    return net.boundary(from.a, to.a) != nullptr;
  }
  if (from.is_subregion()) {
    // on-ramp r_{i E_ij}
    return to.a == from.a && net.candidate(to.a, to.b) != nullptr && design.built(to.a, to.b);
  }
  if (!design.built(from.a, from.b)) return false;
  if (to.is_subregion()) return to.a == from.b;  // off-ramp
  // connecting ramp r_{E_hi E_ij}, no U-turn
  return to.a == from.b && to.b != from.a && net.candidate(to.a, to.b) != nullptr &&
         design.built(to.a, to.b);
}

std::optional<std::string> check_route(const MixedNetwork& net, const DesignVector& design,
                                       const Route& route) {
  if (route.nodes.empty()) return "route is empty";
  if (route.nodes.front() != RouteNode::subregion(route.origin)) {
    return "route does not start at its origin subregion";
  }
  if (route.nodes.back() != RouteNode::subregion(route.destination)) {
    return "route does not end at its destination subregion";
  }
  std::set<RouteNode> seen;
  for (const auto& node : route.nodes) {
    if (node.is_subregion() && !net.subregion_index(node.a)) {
      return "unknown subregion " + std::to_string(node.a);
    }
    if (node.is_expressway() &&
        (net.candidate(node.a, node.b) == nullptr || !design.built(node.a, node.b))) {
      return "expressway " + to_string(node) + " is not built";
    }
    if (!seen.insert(node).second) return "node " + to_string(node) + " visited twice";
  }
  for (std::size_t k = 0; k + 1 < route.nodes.size(); ++k) {
    if (!is_linked(net, design, route.nodes[k], route.nodes[k + 1])) {
      return "no link from " + to_string(route.nodes[k]) + " to " + to_string(route.nodes[k + 1]);
    }
  }
  return std::nullopt;
}

namespace {

struct RouteSearch {
  const MixedNetwork& net;
  const DesignVector& design;
  int destination;
  int max_nodes;
  std::vector<RouteNode> all_nodes;  // sorted
  std::vector<RouteNode> path;
  std::vector<Route> out;
  int origin;

  void extend() {
    const RouteNode last = path.back();
    if (last == RouteNode::subregion(destination)) {
      out.push_back({origin, destination, path});
      return;
    }
    if (static_cast<int>(path.size()) >= max_nodes) return;
    for (const auto& next : all_nodes) {
      if (std::find(path.begin(), path.end(), next) != path.end()) continue;
      if (!is_linked(net, design, last, next)) continue;
      path.push_back(next);
      extend();
      path.pop_back();
    }
  }
};

}  // namespace

std::vector<Route> enumerate_routes(const MixedNetwork& net, const DesignVector& design, int origin,
                                    int destination, int max_nodes) {
  if (!net.subregion_index(origin)) {
    throw ValidationError("unknown origin subregion " + std::to_string(origin));
  }
  if (!net.subregion_index(destination)) {
    throw ValidationError("unknown destination subregion " + std::to_string(destination));
  }
  if (max_nodes < 1) throw ValidationError("max_nodes must be at least 1");

  RouteSearch search{net, design, destination, max_nodes, {}, {}, {}, origin};
  for (const auto& s : net.subregions) search.all_nodes.push_back(RouteNode::subregion(s.id));
  for (const auto& d : design.built_directions()) {
    if (net.candidate(d.from, d.to) != nullptr) {
      search.all_nodes.push_back(RouteNode::expressway(d.from, d.to));
    }
  }
  std::sort(search.all_nodes.begin(), search.all_nodes.end());
  search.path.push_back(RouteNode::subregion(origin));
  search.extend();
  // Depth-first over sorted successors already yields lexicographic order.
  return search.out;
}

std::vector<Route> enumerate_all_routes(const MixedNetwork& net, const DesignVector& design,
                                        int max_nodes) {
  std::vector<int> ids;
  for (const auto& s : net.subregions) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  std::vector<Route> out;
  for (int o : ids) {
    for (int d : ids) {
      auto routes = enumerate_routes(net, design, o, d, max_nodes);
      out.insert(out.end(), routes.begin(), routes.end());
    }
  }
  return out;
}

namespace {

std::size_t position_of(const Route& route, const RouteNode& node) {
  auto it = std::find(route.nodes.begin(), route.nodes.end(), node);
  if (it == route.nodes.end()) {
    throw std::invalid_argument("node " + to_string(node) + " is not on route " + to_string(route));
  }
  return static_cast<std::size_t>(it - route.nodes.begin());
}

}  // namespace

std::optional<RouteNode> next_node(const Route& route, const RouteNode& node) {
  const auto k = position_of(route, node);
  if (k + 1 == route.nodes.size()) return std::nullopt;
  return route.nodes[k + 1];
}

std::optional<RouteNode> prev_node(const Route& route, const RouteNode& node) {
  const auto k = position_of(route, node);
  if (k == 0) return std::nullopt;
  return route.nodes[k - 1];
}

}  // namespace mixnet
