#include "mixnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixnet/errors.hpp"

namespace mixnet {

int SimConfig::steps() const { return static_cast<int>(std::lround(horizon / ts)); }

std::vector<std::string> validate_scenario(const Scenario& scenario) {
  std::vector<std::string> out = validate_network(scenario.network).violations;
  const auto& net = scenario.network;
  const auto& sim = scenario.sim;

  if (!(sim.ts > 0.0)) out.push_back("time step must be positive");
  if (!(sim.horizon > 0.0)) out.push_back("horizon must be positive");
  if (sim.ts > 0.0 && sim.horizon > 0.0 &&
      std::abs(sim.horizon / sim.ts - std::round(sim.horizon / sim.ts)) > 1e-9) {
    out.push_back("horizon is not a whole number of time steps");
  }
  if (!(sim.cell_length > 0.0)) out.push_back("cell length must be positive");
  if (!(sim.speed_floor > 0.0)) out.push_back("speed floor must be positive");
  if (sim.max_nodes < 1) out.push_back("max_nodes must be at least 1");
  const double vmax = std::max(net.mainline_fd.free_flow_speed, net.ramp_fd.free_flow_speed);
  if (vmax > 0.0 && sim.ts > sim.cell_length / vmax * (1.0 + 1e-12)) {
    out.push_back("time step violates the CFL bound Ls / Vf = " +
                  std::to_string(sim.cell_length / vmax) + " s");
  }
  for (const auto& c : net.candidates) {
    if (c.cell_length != sim.cell_length) {
      out.push_back("candidate E" + std::to_string(c.origin) + "," +
                    std::to_string(c.destination) + " uses a different cell length");
    }
  }

  std::vector<int> ids;
  for (const auto& s : net.subregions) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  if (scenario.demand.ids != ids) out.push_back("demand matrix ids do not match the subregions");
  for (auto& p : scenario.demand.problems(sim.horizon)) out.push_back(std::move(p));

  if (!(scenario.logit.mu >= 0.0)) out.push_back("logit sensitivity must be non-negative");

  const auto& opt = scenario.optimizer;
  if (opt.swarm < 2) out.push_back("swarm size must be at least 2");
  if (opt.iterations < 1) out.push_back("iterations must be at least 1");
  if (!(opt.velocity_clamp > 0.0)) out.push_back("velocity clamp must be positive");
  if (opt.exhaustive_cap < 0 || opt.exhaustive_cap > 30) {
    out.push_back("exhaustive cap must be within [0, 30]");
  }
  for (double b : scenario.budgets) {
    if (!(b >= 0.0)) out.push_back("budgets must be non-negative");
  }
  return out;
}

void require_valid(const Scenario& scenario) {
  const auto problems = validate_scenario(scenario);
  if (problems.empty()) return;
  std::ostringstream os;
  os << "invalid scenario:";
  for (const auto& p : problems) os << "\n  " << p;
  throw ValidationError(os.str());
}

}  // namespace mixnet
