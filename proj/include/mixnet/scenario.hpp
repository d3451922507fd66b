#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixnet/assignment.hpp"
#include "mixnet/network.hpp"
#include "mixnet/routes.hpp"

namespace mixnet {

struct SimConfig {
  double ts = 10.0;            // s
  double horizon = 3600.0;     // s
  double cell_length = 500.0;  // m
  double speed_floor = 0.1;    // m/s, lower bound on speeds used in travel times
  int max_nodes = kDefaultMaxRouteNodes;

  int steps() const;

  bool operator==(const SimConfig&) const = default;
};

enum class InfeasibleMode { Repair, Penalty };

struct OptimizerConfig {
  int swarm = 30;
  int iterations = 100;
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  double velocity_clamp = 6.0;
  std::uint64_t seed = 1;
  InfeasibleMode infeasible = InfeasibleMode::Repair;
  double penalty_per_currency = 1e-3;  // veh h added per unit of budget overrun
  int exhaustive_cap = 16;             // max candidate pairs for exhaustive search

  bool operator==(const OptimizerConfig&) const = default;
};

struct Scenario {
  std::string name;
  MixedNetwork network;
  DemandProfile demand;
  SimConfig sim;
  LogitParams logit;
  OptimizerConfig optimizer;
  std::vector<double> budgets;  // currency

  bool operator==(const Scenario&) const = default;
};

/// Every invariant violation of the scenario as a whole; empty when valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Throws ValidationError listing all violations.
void require_valid(const Scenario& scenario);

}  // namespace mixnet
