#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixnet/network.hpp"
#include "mixnet/scenario.hpp"
#include "mixnet/simulation.hpp"

namespace mixnet {

/// Memoised TTS oracle over designs of one scenario. Thread-safe.
class Evaluator {
 public:
  struct Entry {
    SimMetrics metrics;
    /// Set when the run left the admissible region (e.g. jam accumulation
    /// exceeded); tts is then +inf.
    std::string failure;
  };

  explicit Evaluator(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const MixedNetwork& network() const { return scenario_.network; }

  /// TTS in veh h. With strict_budget set, an over-budget design throws
  /// ValidationError instead of being simulated.
  double evaluate(const DesignVector& design, std::optional<double> strict_budget = std::nullopt);
  Entry entry(const DesignVector& design);
  /// Evaluates all designs, simulating distinct uncached ones concurrently.
  std::vector<double> evaluate_batch(std::span<const DesignVector> designs);

  std::size_t simulations() const { return simulations_.load(); }
  std::size_t cached() const;

 private:
  Entry run(const DesignVector& design) const;

  Scenario scenario_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, Entry> cache_;
  std::atomic<std::size_t> simulations_{0};
};

struct DesignRecord {
  DesignVector design;
  double cost = 0.0;
  double tts = 0.0;
};

/// Orders by TTS, then cost, then bit string.
bool better_design(const DesignRecord& a, const DesignRecord& b);

struct ExhaustiveResult {
  DesignRecord best;
  std::vector<DesignRecord> table;  // every budget-feasible design, mask order
};

/// Enumerates all feasible designs. Throws ValidationError when the number of
/// candidate pairs exceeds the scenario's exhaustive cap.
ExhaustiveResult exhaustive_search(Evaluator& evaluator, double budget);

struct PsoResult {
  DesignRecord best;
  std::vector<double> trace;  // best feasible TTS after each iteration
  std::size_t distinct_designs = 0;
};

/// Drops built pairs, most expensive first, until the design fits the budget.
DesignVector repair_to_budget(const MixedNetwork& net, DesignVector design, double budget);

/// Binary particle swarm over unordered candidate pairs. `seeds` are placed in
/// the first particles of the initial swarm.
PsoResult pso_optimize(Evaluator& evaluator, double budget, const OptimizerConfig& config,
                       std::span<const DesignVector> seeds = {});

struct SweepRow {
  double budget = 0.0;
  DesignVector design;
  SimMetrics metrics;
  std::vector<double> trace;  // empty for exhaustive rows
};

struct SweepReport {
  std::string scenario;
  std::string method;  // "pso" or "exhaustive"
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;  // ascending budget
};

/// Optimal design per budget. PSO rows are warm-started with the previous
/// (smaller) budget's optimum, so reported TTS never increases with budget.
SweepReport budget_sweep(Evaluator& evaluator, std::vector<double> budgets,
                         const OptimizerConfig& config, bool exhaustive = false);

}  // namespace mixnet
