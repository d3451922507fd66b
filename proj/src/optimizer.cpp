#include "mixnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "mixnet/errors.hpp"

namespace mixnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Evaluator::Evaluator(Scenario scenario) : scenario_(std::move(scenario)) {
  require_valid(scenario_);
}

Evaluator::Entry Evaluator::run(const DesignVector& design) const {
  Entry e;
  try {
    e.metrics = simulate(scenario_, design).metrics;
  } catch (const InvariantViolation& err) {
    e.metrics.tts = kInf;
    e.metrics.cost = design_cost(scenario_.network, design);
    e.failure = err.what();
  }
  return e;
}

Evaluator::Entry Evaluator::entry(const DesignVector& design) {
  if (design.pairs() != scenario_.network.candidate_pairs()) {
    throw ValidationError("design vector does not match the network's candidate set");
  }
  const auto key = design.mask();
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Entry e = run(design);
  simulations_.fetch_add(1);
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(e)).first->second;
}

double Evaluator::evaluate(const DesignVector& design, std::optional<double> strict_budget) {
  if (strict_budget && !is_budget_feasible(scenario_.network, design, *strict_budget)) {
    throw ValidationError("design " + design.bits() + " exceeds the budget");
  }
  return entry(design).metrics.tts;
}

std::vector<double> Evaluator::evaluate_batch(std::span<const DesignVector> designs) {
  std::vector<const DesignVector*> todo;
  {
    std::lock_guard lock(mutex_);
    std::vector<std::uint64_t> seen;
    for (const auto& d : designs) {
      const auto key = d.mask();
      if (cache_.count(key) || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      todo.push_back(&d);
    }
  }
  const std::size_t workers =
      std::min<std::size_t>(todo.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < todo.size(); k = next++) entry(*todo[k]);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (const auto* d : todo) entry(*d);
  }
  std::vector<double> out;
  out.reserve(designs.size());
  for (const auto& d : designs) out.push_back(entry(d).metrics.tts);
  return out;
}

std::size_t Evaluator::cached() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

bool better_design(const DesignRecord& a, const DesignRecord& b) {
  if (a.tts != b.tts) return a.tts < b.tts;
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.design.bits() < b.design.bits();
}

ExhaustiveResult exhaustive_search(Evaluator& evaluator, double budget) {
  const auto& net = evaluator.network();
  const auto pairs = net.candidate_pairs();
  const int cap = evaluator.scenario().optimizer.exhaustive_cap;
  if (static_cast<int>(pairs.size()) > cap) {
    throw ValidationError("exhaustive search over " + std::to_string(pairs.size()) +
                          " candidate pairs exceeds the cap of " + std::to_string(cap));
  }
  std::vector<DesignVector> feasible;
  const std::uint64_t count = std::uint64_t{1} << pairs.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    auto d = DesignVector::from_mask(net, mask);
    if (is_budget_feasible(net, d, budget)) feasible.push_back(std::move(d));
  }
  const auto values = evaluator.evaluate_batch(feasible);
  ExhaustiveResult out;
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    out.table.push_back({feasible[k], design_cost(net, feasible[k]), values[k]});
  }
  out.best = *std::min_element(out.table.begin(), out.table.end(), better_design);
  return out;
}

DesignVector repair_to_budget(const MixedNetwork& net, DesignVector design, double budget) {
  std::vector<std::size_t> built;
  for (std::size_t k = 0; k < design.size(); ++k) {
    if (design.built_at(k)) built.push_back(k);
  }
  std::stable_sort(built.begin(), built.end(), [&](std::size_t a, std::size_t b) {
    const double ca = net.pair_cost(design.pairs()[a]);
    const double cb = net.pair_cost(design.pairs()[b]);
    if (ca != cb) return ca > cb;
    return a > b;
  });
  double cost = design_cost(net, design);
  for (std::size_t k : built) {
    if (cost <= budget) break;
    design.set_at(k, false);
    cost -= net.pair_cost(design.pairs()[k]);
  }
  // Re-sum to avoid drift in the running subtraction.
  if (design_cost(net, design) > budget) {
    for (std::size_t k = 0; k < design.size(); ++k) design.set_at(k, false);
  }
  return design;
}

PsoResult pso_optimize(Evaluator& evaluator, double budget, const OptimizerConfig& config,
                       std::span<const DesignVector> seeds) {
  if (config.swarm < 2) throw ValidationError("swarm size must be at least 2");
  if (config.iterations < 1) throw ValidationError("iterations must be at least 1");
  const auto& net = evaluator.network();
  const std::size_t dims = net.candidate_pairs().size();
  const auto swarm = static_cast<std::size_t>(config.swarm);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> initial_velocity(-config.velocity_clamp,
                                                          config.velocity_clamp);

  struct Particle {
    DesignVector x;
    std::vector<double> v;
    DesignVector best;
    double best_fitness = kInf;
  };
  std::vector<Particle> particles(swarm);
  for (std::size_t p = 0; p < swarm; ++p) {
    auto& pt = particles[p];
    pt.x = DesignVector::empty_for(net);
    pt.v.resize(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      pt.x.set_at(k, unit(rng) < 0.5);
      pt.v[k] = initial_velocity(rng);
    }
    if (p < seeds.size()) pt.x = seeds[p];
  }

  const bool repair = config.infeasible == InfeasibleMode::Repair;
  auto fitness_of = [&](const DesignVector& d, double tts) {
    const double cost = design_cost(net, d);
    if (cost <= budget) return tts;
    return tts + config.penalty_per_currency * (cost - budget);
  };

  // The empty design is always feasible and serves as the initial incumbent.
  const auto empty = DesignVector::empty_for(net);
  DesignRecord global{empty, 0.0, evaluator.evaluate(empty)};

  PsoResult out;
  std::vector<std::uint64_t> visited{empty.mask()};
  auto evaluate_swarm = [&]() {
    std::vector<DesignVector> designs;
    for (auto& pt : particles) {
      if (repair) pt.x = repair_to_budget(net, pt.x, budget);
      designs.push_back(pt.x);
    }
    const auto values = evaluator.evaluate_batch(designs);
    for (std::size_t p = 0; p < swarm; ++p) {
      auto& pt = particles[p];
      const auto mask = pt.x.mask();
      if (std::find(visited.begin(), visited.end(), mask) == visited.end()) visited.push_back(mask);
      const double f = fitness_of(pt.x, values[p]);
      if (f < pt.best_fitness) {
        pt.best_fitness = f;
        pt.best = pt.x;
      }
      const double cost = design_cost(net, pt.x);
      if (cost <= budget) {
        DesignRecord rec{pt.x, cost, values[p]};
        if (better_design(rec, global)) global = rec;
      }
    }
    out.trace.push_back(global.tts);
  };

  evaluate_swarm();
  for (int it = 1; it < config.iterations; ++it) {
    const double w = config.iterations > 1
                         ? config.inertia_start - (config.inertia_start - config.inertia_end) *
                                                      it / (config.iterations - 1)
                         : config.inertia_start;
    for (auto& pt : particles) {
      for (std::size_t k = 0; k < dims; ++k) {
        const double x = pt.x.built_at(k) ? 1.0 : 0.0;
        const double pb = pt.best.built_at(k) ? 1.0 : 0.0;
        const double gb = global.design.built_at(k) ? 1.0 : 0.0;
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double v = w * pt.v[k] + config.c1 * r1 * (pb - x) + config.c2 * r2 * (gb - x);
        v = std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
        pt.v[k] = v;
        pt.x.set_at(k, unit(rng) < 1.0 / (1.0 + std::exp(-v)));
      }
    }
    evaluate_swarm();
  }
  out.best = global;
  out.distinct_designs = visited.size();
  return out;
}

SweepReport budget_sweep(Evaluator& evaluator, std::vector<double> budgets,
                         const OptimizerConfig& config, bool exhaustive) {
  if (budgets.empty()) throw ValidationError("budget sweep needs at least one budget");
  std::sort(budgets.begin(), budgets.end());
  SweepReport report;
  report.scenario = evaluator.scenario().name;
  report.method = exhaustive ? "exhaustive" : "pso";
  report.seed = config.seed;
  std::vector<DesignVector> incumbents;
  for (double budget : budgets) {
    SweepRow row;
    row.budget = budget;
    if (exhaustive) {
      row.design = exhaustive_search(evaluator, budget).best.design;
    } else {
      auto res = pso_optimize(evaluator, budget, config, incumbents);
      row.design = res.best.design;
      row.trace = std::move(res.trace);
      incumbents.assign(1, row.design);
    }
    row.metrics = evaluator.entry(row.design).metrics;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace mixnet
