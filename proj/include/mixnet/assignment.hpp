#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mixnet/network.hpp"
#include "mixnet/routes.hpp"

namespace mixnet {

/// Piecewise-constant OD demand. Rows and columns follow `ids` (ascending
/// subregion ids); rates are veh/s.
struct DemandProfile {
  struct Segment {
    double start = 0.0;  // s, inclusive
    double end = 0.0;    // s, exclusive
    std::vector<double> rate;

    bool operator==(const Segment&) const = default;
  };

  std::vector<int> ids;
  std::vector<Segment> segments;

  /// q^{od}(t); zero outside every segment.
  double rate(int origin, int destination, double t) const;
  /// Total generated vehicles over [0, horizon).
  double total_vehicles(double horizon) const;

  /// Empty list when segments are sorted, non-overlapping, cover [0, horizon)
  /// and every rate is finite and non-negative.
  std::vector<std::string> problems(double horizon) const;

  static DemandProfile constant(std::vector<int> ids, std::vector<double> rate, double horizon);

  bool operator==(const DemandProfile&) const = default;
};

struct LogitParams {
  double mu = 0.005;  // 1/s

  bool operator==(const LogitParams&) const = default;
};

/// Instantaneous node traversal times (s) read off a network state.
struct NodeTimes {
  std::map<int, double> subregion;          // L / v(n)
  std::map<DirectedPair, double> onramp;    // Ls / V of r_{i E_ij}
  std::map<DirectedPair, double> offramp;   // Ls / V of r_{E_ij j}
  std::map<DirectedPair, double> mainline;  // sum over mainline cells
  std::map<std::pair<DirectedPair, DirectedPair>, double> connramp;
};

/// Sum of node times along the route, entry ramps charged to the node they
/// lead into. Throws std::invalid_argument if a required time is missing.
double route_travel_time(const Route& route, const NodeTimes& times);

/// exp(-mu t_r) / sum_x exp(-mu t_x), evaluated with a max shift.
std::vector<double> logit_probabilities(std::span<const double> times, double mu);

/// q_r = theta_r q; the last route absorbs round-off so the split sums to q.
std::vector<double> split_demand(double demand, std::span<const double> probabilities);

}  // namespace mixnet
