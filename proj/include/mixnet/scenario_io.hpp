#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "mixnet/optimizer.hpp"
#include "mixnet/scenario.hpp"
#include "mixnet/simulation.hpp"

// Scenario text format, result exports and report parsing.
//
// A scenario file is a list of named sections. Blank lines and text after '#'
// are ignored. Every physical quantity carries a unit suffix, e.g. 4800m,
// 12000veh/h, 80km/h, 375veh/km, 30min, 5Musd/km.
//
//   [network]     name=<text>
//   [subregions]  <id> trip_length=<len> n_max=<veh> [c_max=<flow>] mfd=<a3>,<a2>,<a1>
//   [adjacency]   <i>-<j> (both directions) or <i>><j> (one direction) [capacity=<flow>]
//   [candidates]  <i>-<j> or <i>><j> length=<len>
//   [fd]          mainline|ramp free_flow=<speed> capacity=<flow> [jam_density=<density>]
//   [demand]      segment from=<time> to=<time> unit=<flow unit> [fill=<number>]
//                 followed (unless fill is given) by one matrix row per origin
//   [sim]         step= horizon= cell_length= speed_floor= max_nodes= mu=
//   [optimizer]   swarm= iterations= inertia=<start>,<end> c1= c2= velocity_clamp=
//                 seed= infeasible=repair|penalty penalty= exhaustive_cap=
//   [costs]       unit_cost=<currency/len> budgets=<currency>,...

namespace mixnet {

/// Values substituted when a scenario leaves them out.
struct ScenarioDefaults {
  static constexpr double c_max = 12000.0 / 3600.0;              // veh/s
  static constexpr double boundary_capacity = 4000.0 / 3600.0;   // veh/s
  static constexpr double mainline_jam_density = 0.375;          // veh/m
  static constexpr double ramp_jam_density = 0.225;              // veh/m
};

/// Converts "<number><unit>" to SI for the given dimension ("length", "time",
/// "count", "flow", "density", "speed", "rate", "currency", "unit_cost").
double parse_quantity(std::string_view text, std::string_view dimension);

Scenario parse_scenario(std::string_view text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Normalised SI text that parses back to an identical Scenario.
std::string format_scenario(const Scenario& scenario);

/// Applies key=value overrides: mu, c_ij, c_max, kj_mainline, kj_ramp, ts.
/// Values accept unit suffixes; bare numbers are SI.
void apply_override(Scenario& scenario, std::string_view assignment);

void write_trajectory_csv(const SimResult& result, std::ostream& os);
void write_accumulation_svg(const SimResult& result, std::ostream& os,
                            const std::string& title = "Subregion accumulation");

/// JSON summary of one run: metrics with units in the key names, parameter
/// echo and conservation audit.
std::string run_summary_json(const Scenario& scenario, const DesignVector& design,
                             const SimMetrics& metrics);
SimMetrics parse_run_summary(std::string_view json);

std::string sweep_report_json(const Scenario& scenario, const SweepReport& report);
/// Table-style CSV with one row per budget.
void write_sweep_table_csv(const SweepReport& report, std::ostream& os);
void write_convergence_csv(const SweepReport& report, std::ostream& os);
std::string render_sweep_matrices(const Scenario& scenario, const SweepReport& report);

}  // namespace mixnet
