#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mixnet/assignment.hpp"
#include "mixnet/network.hpp"
#include "mixnet/routes.hpp"
#include "mixnet/scenario.hpp"

namespace mixnet {

struct SimMetrics {
  double tts = 0.0;                      // veh h
  double average_accumulation = 0.0;     // veh, subregions only
  double average_completion_flow = 0.0;  // veh/h
  double injected = 0.0;                 // veh
  double completed = 0.0;                // veh
  double residual = 0.0;                 // veh on the network at the horizon
  double cost = 0.0;                     // currency
};

/// Densities of one built expressway direction at one instant (veh/m).
struct ExpresswaySnapshot {
  DirectedPair direction;
  std::vector<double> mainline;
  double onramp = 0.0;
  double offramp = 0.0;
  /// Connecting ramps feeding this expressway, keyed by the upstream direction.
  std::vector<std::pair<DirectedPair, double>> connramps_in;
};

struct TrajectoryFrame {
  std::vector<double> accumulation;  // per subregion, ascending id
  std::vector<ExpresswaySnapshot> expressways;
};

/// Total time spent in veh h: ts * sum over frames of subregion accumulations
/// plus ls * (mainline + on-ramp + off-ramp + incoming connecting ramp
/// densities) of every expressway built in `design`.
double tts(const MixedNetwork& net, const DesignVector& design,
           std::span<const TrajectoryFrame> frames, double ts, double ls);

struct SimResult {
  std::vector<int> subregion_ids;
  /// All candidate directions in sorted order; unbuilt ones stay at zero.
  std::vector<DirectedPair> expressways;
  std::vector<double> time;                               // s, start of each step
  std::vector<std::vector<double>> accumulation;          // [step][subregion]
  std::vector<std::vector<double>> expressway_vehicles;   // [step][expressway]
  std::vector<TrajectoryFrame> frames;                    // only with record_frames
  SimMetrics metrics;
};

struct RunOptions {
  bool record_frames = false;
  bool audit = false;
};

/// Per-step bookkeeping used to check conservation and capacity limits.
struct StepAudit {
  struct Node {
    std::string name;
    double before = 0.0;  // veh
    double after = 0.0;   // veh
    double inflow = 0.0;  // veh/s, including exogenous demand
    double outflow = 0.0; // veh/s, including completed trips
    double capacity_stock = 0.0;  // n_max or K_j * Ls
  };
  struct Link {
    double flow = 0.0;  // veh/s
    double cap = 0.0;   // veh/s, per-link cap (infinite for completions)
  };
  struct Group {
    double flow = 0.0;    // veh/s allocated
    double supply = 0.0;  // veh/s available (infinite for completions)
  };
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<Group> groups;
  double injected = 0.0;   // veh this step
  double completed = 0.0;  // veh this step
};

class CompiledModel;

/// One time-stepped run of the coupled subregion/expressway model for a fixed
/// design. Flows are computed from the state at t, then every stock advances
/// at once (explicit Euler, Jacobi order).
class Simulation {
 public:
  Simulation(const Scenario& scenario, const DesignVector& design, RunOptions options = {});
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  const std::vector<Route>& routes() const;
  int steps_taken() const { return step_; }
  int total_steps() const;
  double time() const;

  /// Advances the state by one step. Throws InvariantViolation with the
  /// offending node and step on an inadmissible state.
  void step();
  /// Steps to the horizon and returns the collected result.
  SimResult run();

  double accumulation(int subregion_id) const;
  double class_accumulation(std::size_t route, std::size_t position) const;
  void set_class_accumulation(std::size_t route, std::size_t position, double vehicles);
  double total_vehicles() const;

  TrajectoryFrame frame() const;
  NodeTimes node_times() const;
  /// Route times from the indexed fast path, in routes() order.
  std::vector<double> route_times() const;

  const StepAudit& last_audit() const { return audit_; }
  SimMetrics metrics() const;

 private:
  void record(const std::vector<double>& n, const std::vector<double>& cell_total);

  std::unique_ptr<CompiledModel> model_;
  RunOptions options_;
  std::vector<double> stock_;
  int step_ = 0;
  double tts_veh_s_ = 0.0;
  double accumulation_sum_ = 0.0;
  double injected_ = 0.0;
  double completed_ = 0.0;
  StepAudit audit_;
  SimResult result_;
  // Per-step scratch, kept to avoid reallocation.
  std::vector<double> demand_, competing_, supply_, flow_, next_;
};

SimResult simulate(const Scenario& scenario, const DesignVector& design,
                   const RunOptions& options = {});

}  // namespace mixnet
