#pragma once

#include "mixnet/network.hpp"

// Accumulation-based dynamics of one subregion. Flows are veh/s, stocks veh.

namespace mixnet {

/// P(n) in veh m/s, clamped at zero. Throws std::domain_error for n outside [0, n_max].
double production(const SubregionParams& params, double n);

/// Space-mean speed P(n)/n; the free-flow limit a1 at n = 0.
double speed(const SubregionParams& params, double n);

/// Share of P(n_total)/L attributable to a class of size n_class (0 when empty).
double trip_completion_rate(const SubregionParams& params, double n_class, double n_total);

/// c_max (1 - n / n_max).
double receiving_capacity(const SubregionParams& params, double n);

/// min{ demand, cap, demand / competing_total * supply }, where the share
/// term is the demand itself when competing_total is zero. All the transfer
/// rules of the coupled model reduce to this form.
double proportional_min(double demand, double cap, double competing_total, double supply);

/// Arterial transfer i -> j. competing_total covers all arterial completion
/// rates and off-ramp demands into j, including this one.
double transfer_to_subregion(double flow, double boundary_capacity, double competing_total,
                             double receiving);

/// Transfer from a subregion onto the on-ramp of an expressway.
double transfer_to_onramp(double flow, double ramp_capacity, double competing_total,
                          double ramp_supply);

/// Caps an outflow so one explicit step cannot drain more than `stock`.
double clamp_outflow(double outflow, double stock, double ts);

/// n(t + ts) = n + ts (inflow - outflow) with the outflow pre-clamped.
/// Throws InvariantViolation if the result is still negative.
double advance_accumulation(double n, double inflow, double outflow, double ts);

}  // namespace mixnet
