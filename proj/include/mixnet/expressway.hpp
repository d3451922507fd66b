#pragma once

#include "mixnet/network.hpp"

// Multi-class cell transmission kernels for expressway mainline and ramp
// cells. Densities veh/m, flows veh/s.

namespace mixnet {

/// Sending flow of one class: min(V_f K_class, C).
double cell_demand(const FundamentalDiagram& fd, double class_density);

/// Receiving flow of a cell: min(w (K_j - K), C).
double cell_supply(const FundamentalDiagram& fd, double total_density);

/// Speed from the triangular diagram, V_f on the free-flow branch.
double cell_speed(const FundamentalDiagram& fd, double total_density);

/// On-ramp class -> first mainline cell. competing_total sums the on-ramp
/// class demands and every connecting-ramp class demand merging into the
/// same expressway.
double onramp_outflow(double demand, double ramp_capacity, double competing_total,
                      double first_cell_supply);

/// Mainline cell l -> l+1 for one class; competing_total is the sum of class
/// demands in cell l.
double mainline_flow(double demand, double mainline_capacity, double competing_total,
                     double downstream_supply);

/// Last mainline cell -> off-ramp, for classes that leave the expressway.
double offramp_entry(double demand, double ramp_capacity, double competing_total,
                     double offramp_supply);

/// Off-ramp -> subregion; shares the subregion receiving capacity with all
/// arterial transfers and off-ramp demands into it.
double offramp_exit(double demand, double ramp_capacity, double competing_total,
                    double receiving);

/// Last mainline cell -> connecting ramp towards the next expressway.
double connramp_entry(double demand, double ramp_capacity, double competing_total,
                      double connramp_supply);

/// K(t + ts) = K + ts / ls (inflow - outflow), outflow clamped to K ls / ts.
double advance_density(double density, double inflow, double outflow, double ts, double ls);

}  // namespace mixnet
