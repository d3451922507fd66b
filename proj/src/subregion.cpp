#include "mixnet/subregion.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mixnet/errors.hpp"

namespace mixnet {

namespace {

void require_in_range(const SubregionParams& params, double n) {
  if (!(n >= 0.0) || n > params.n_max) {
    throw std::domain_error("accumulation " + std::to_string(n) + " outside [0, " +
                            std::to_string(params.n_max) + "] in subregion " +
                            std::to_string(params.id));
  }
}

}  // namespace

double production(const SubregionParams& params, double n) {
  require_in_range(params, n);
  const auto& a = params.mfd;
  return std::max(0.0, ((a[0] * n + a[1]) * n + a[2]) * n);
}

double speed(const SubregionParams& params, double n) {
  require_in_range(params, n);
  if (n == 0.0) return params.mfd[2];
  return production(params, n) / n;
}

double trip_completion_rate(const SubregionParams& params, double n_class, double n_total) {
  if (n_total <= 0.0) return 0.0;
  return n_class / n_total * production(params, n_total) / params.avg_trip_length;
}

double receiving_capacity(const SubregionParams& params, double n) {
  require_in_range(params, n);
  return params.c_max * (1.0 - n / params.n_max);
}

double proportional_min(double demand, double cap, double competing_total, double supply) {
  const double share = competing_total > 0.0 ? demand / competing_total * supply : demand;
  return std::min({demand, cap, share});
}

double transfer_to_subregion(double flow, double boundary_capacity, double competing_total,
                             double receiving) {
  return proportional_min(flow, boundary_capacity, competing_total, receiving);
}

double transfer_to_onramp(double flow, double ramp_capacity, double competing_total,
                          double ramp_supply) {
  return proportional_min(flow, ramp_capacity, competing_total, ramp_supply);
}

double clamp_outflow(double outflow, double stock, double ts) {
  return std::min(outflow, std::max(stock, 0.0) / ts);
}

double advance_accumulation(double n, double inflow, double outflow, double ts) {
  const double next = n + ts * (inflow - clamp_outflow(outflow, n, ts));
  if (next < 0.0) {
    // Only reachable through round-off; anything larger is a modelling bug.
    if (next > -1e-9 * std::max(1.0, n)) return 0.0;
    throw InvariantViolation("negative accumulation " + std::to_string(next));
  }
  return next;
}

}  // namespace mixnet
