#include "mixnet/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mixnet/errors.hpp"
#include "mixnet/optimizer.hpp"
#include "mixnet/scenario_io.hpp"

namespace mixnet {

namespace {

namespace fs = std::filesystem;

constexpr const char* kBitOrderHelp =
    "Design bit strings have one character per unordered candidate pair {i,j},\n"
    "pairs sorted by (min id, max id). For the bundled five-subregion scenario\n"
    "the order is 1-2 1-4 1-5 2-3 2-5 3-4 3-5 4-5, so \"00000100\" builds only\n"
    "the 3-4 expressway (both directions).";

struct Options {
  std::string scenario;
  std::vector<std::string> params;
  std::string out_dir;
  std::string design;
  std::string od;
  int max_nodes = 0;
  std::string budget;
  std::string budgets;
  long long seed = -1;
  bool exhaustive = false;
};

Scenario load(const Options& o) {
  Scenario sc = load_scenario(o.scenario);
  for (const auto& p : o.params) apply_override(sc, p);
  if (!o.params.empty()) require_valid(sc);
  return sc;
}

double parse_budget(const std::string& text) {
  const bool bare = !text.empty() && (std::isdigit(static_cast<unsigned char>(text.back())) ||
                                      text.back() == '.');
  if (!bare) return parse_quantity(text, "currency");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ParseError("budget '" + text + "' is not a number");
  }
  return v;
}

std::vector<double> parse_budget_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_budget(item));
  return out;
}

DesignVector design_of(const Scenario& sc, const std::string& bits) {
  if (bits.empty()) return DesignVector::empty_for(sc.network);
  return DesignVector::from_bits(sc.network, bits);
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string money(double usd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "$%.6gM", usd / 1e6);
  return buf;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Scenario sc = load(o);
  out << "valid: " << sc.network.subregions.size() << " subregions, "
      << sc.network.boundaries.size() << " boundary links, " << sc.network.candidates.size()
      << " directional candidates (" << sc.network.candidate_pairs().size() << " pairs), "
      << sc.sim.steps() << " steps\n";
  return kExitOk;
}

int cmd_routes(const Options& o, std::ostream& out) {
  const Scenario sc = load(o);
  const auto comma = o.od.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--od", "expected A,B");
  int origin = 0;
  int destination = 0;
  try {
    origin = std::stoi(o.od.substr(0, comma));
    destination = std::stoi(o.od.substr(comma + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--od", "expected two integer subregion ids");
  }
  const auto design = design_of(sc, o.design);
  const int max_nodes = o.max_nodes > 0 ? o.max_nodes : sc.sim.max_nodes;
  const auto routes = enumerate_routes(sc.network, design, origin, destination, max_nodes);
  for (const auto& r : routes) out << to_string(r) << '\n';
  out << routes.size() << " route(s)\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Scenario sc = load(o);
  const auto design = design_of(sc, o.design);
  const SimResult result = simulate(sc, design);
  const std::string summary = run_summary_json(sc, design, result.metrics);
  out << summary;
  if (!o.out_dir.empty()) {
    const auto dir = out_dir(o);
    write_file(dir / "summary.json", summary);
    std::ostringstream csv;
    write_trajectory_csv(result, csv);
    write_file(dir / "trajectory.csv", csv.str());
    std::ostringstream svg;
    write_accumulation_svg(result, svg, sc.name + " design " + design.bits());
    write_file(dir / "accumulation.svg", svg.str());
  }
  return kExitOk;
}

void print_design(std::ostream& out, const Scenario& sc, const std::string& label,
                  const DesignVector& d, double tts) {
  out << label << ": design " << d.bits() << ", cost " << money(design_cost(sc.network, d))
      << ", TTS " << tts << " veh h\n"
      << render_design_matrix(sc.network, d);
}

int cmd_optimize(const Options& o, std::ostream& out) {
  Scenario sc = load(o);
  if (o.seed >= 0) sc.optimizer.seed = static_cast<std::uint64_t>(o.seed);
  const double budget = parse_budget(o.budget);
  Evaluator evaluator(sc);
  const auto pso = pso_optimize(evaluator, budget, sc.optimizer);
  out << "budget " << money(budget) << ", seed " << sc.optimizer.seed << '\n';
  print_design(out, sc, "pso", pso.best.design, pso.best.tts);
  if (o.exhaustive) {
    const auto ex = exhaustive_search(evaluator, budget);
    print_design(out, sc, "exhaustive", ex.best.design, ex.best.tts);
    out << (ex.best.design == pso.best.design ? "solvers agree\n" : "solvers differ\n");
  }
  if (!o.out_dir.empty()) {
    const auto dir = out_dir(o);
    write_file(dir / "summary.json",
               run_summary_json(sc, pso.best.design, evaluator.entry(pso.best.design).metrics));
    SweepReport rep{sc.name, "pso", sc.optimizer.seed, {{budget, pso.best.design, {}, pso.trace}}};
    std::ostringstream conv;
    write_convergence_csv(rep, conv);
    write_file(dir / "convergence.csv", conv.str());
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  Scenario sc = load(o);
  if (o.seed >= 0) sc.optimizer.seed = static_cast<std::uint64_t>(o.seed);
  const auto budgets = o.budgets.empty() ? sc.budgets : parse_budget_list(o.budgets);
  Evaluator evaluator(sc);
  const auto report = budget_sweep(evaluator, budgets, sc.optimizer, o.exhaustive);
  out << render_sweep_matrices(sc, report);
  std::ostringstream table;
  write_sweep_table_csv(report, table);
  out << table.str();
  if (!o.out_dir.empty()) {
    const auto dir = out_dir(o);
    write_file(dir / "sweep.json", sweep_report_json(sc, report));
    write_file(dir / "table.csv", table.str());
    write_file(dir / "matrices.txt", render_sweep_matrices(sc, report));
    if (!o.exhaustive) {
      std::ostringstream conv;
      write_convergence_csv(report, conv);
      write_file(dir / "convergence.csv", conv.str());
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed arterial/expressway network simulator and expressway design optimizer"};
  app.footer(kBitOrderHelp);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", o.scenario, "Scenario file")->required();
    sub->add_option("--params", o.params,
                    "Overrides key=value (mu, c_ij, c_max, kj_mainline, kj_ramp, ts); "
                    "units optional, bare numbers are SI")
        ->take_all();
  };

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  common(validate);

  auto* routes = app.add_subcommand("routes", "List the routes of one OD pair");
  common(routes);
  routes->add_option("--od", o.od, "Origin and destination ids, e.g. 4,2")->required();
  routes->add_option("--design", o.design, "Design bit string (default: nothing built)");
  routes->add_option("--max-nodes", o.max_nodes, "Route length limit in nodes");

  auto* sim = app.add_subcommand("simulate", "Simulate one design and print a JSON summary");
  common(sim);
  sim->add_option("--design", o.design, "Design bit string (default: nothing built)");
  sim->add_option("--out", o.out_dir, "Directory for summary.json, trajectory.csv, accumulation.svg");

  auto* opt = app.add_subcommand("optimize", "Best design under one budget");
  common(opt);
  opt->add_option("--budget", o.budget, "Budget, e.g. 50e6 (dollars) or 50Musd")->required();
  opt->add_option("--seed", o.seed, "PSO seed (default: from the scenario)");
  opt->add_flag("--exhaustive", o.exhaustive, "Also enumerate every design and compare");
  opt->add_option("--out", o.out_dir, "Directory for summary.json and convergence.csv");

  auto* sweep = app.add_subcommand("sweep", "Best design for each of several budgets");
  common(sweep);
  sweep->add_option("--budgets", o.budgets, "Comma-separated budgets (default: from the scenario)");
  sweep->add_option("--seed", o.seed, "PSO seed (default: from the scenario)");
  sweep->add_flag("--exhaustive", o.exhaustive, "Use exhaustive search instead of PSO");
  sweep->add_option("--out", o.out_dir,
                    "Directory for sweep.json, table.csv, matrices.txt, convergence.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (routes->parsed()) return cmd_routes(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (opt->parsed()) return cmd_optimize(o, out);
    return cmd_sweep(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mixnet
