#include "mixnet/expressway.hpp"

#include <algorithm>
#include <string>

#include "mixnet/errors.hpp"
#include "mixnet/subregion.hpp"

namespace mixnet {

double cell_demand(const FundamentalDiagram& fd, double class_density) {
  return std::min(fd.free_flow_speed * std::max(class_density, 0.0), fd.capacity);
}

double cell_supply(const FundamentalDiagram& fd, double total_density) {
  return std::max(0.0, std::min(fd.wave_speed() * (fd.jam_density - total_density), fd.capacity));
}

double cell_speed(const FundamentalDiagram& fd, double total_density) {
  if (total_density <= fd.critical_density()) return fd.free_flow_speed;
  return std::max(0.0, fd.wave_speed() * (fd.jam_density - total_density)) / total_density;
}

double onramp_outflow(double demand, double ramp_capacity, double competing_total,
                      double first_cell_supply) {
  return proportional_min(demand, ramp_capacity, competing_total, first_cell_supply);
}

double mainline_flow(double demand, double mainline_capacity, double competing_total,
                     double downstream_supply) {
  return proportional_min(demand, mainline_capacity, competing_total, downstream_supply);
}

double offramp_entry(double demand, double ramp_capacity, double competing_total,
                     double offramp_supply) {
  return proportional_min(demand, ramp_capacity, competing_total, offramp_supply);
}

double offramp_exit(double demand, double ramp_capacity, double competing_total,
                    double receiving) {
  return proportional_min(demand, ramp_capacity, competing_total, receiving);
}

double connramp_entry(double demand, double ramp_capacity, double competing_total,
                      double connramp_supply) {
  return proportional_min(demand, ramp_capacity, competing_total, connramp_supply);
}

double advance_density(double density, double inflow, double outflow, double ts, double ls) {
  const double out = std::min(outflow, std::max(density, 0.0) * ls / ts);
  const double next = density + ts / ls * (inflow - out);
  if (next < 0.0) {
    if (next > -1e-12 * std::max(1.0, density)) return 0.0;
    throw InvariantViolation("negative density " + std::to_string(next));
  }
  return next;
}

}  // namespace mixnet
