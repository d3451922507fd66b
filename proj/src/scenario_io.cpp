#include "mixnet/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "mixnet/errors.hpp"

namespace mixnet {

namespace {

using json = nlohmann::json;

struct UnitEntry {
  std::string_view dimension;
  std::string_view unit;
  double factor;
};

constexpr UnitEntry kUnits[] = {
    {"length", "m", 1.0},           {"length", "km", 1000.0},
    {"time", "s", 1.0},             {"time", "min", 60.0},
    {"time", "h", 3600.0},          {"count", "veh", 1.0},
    {"flow", "veh/s", 1.0},         {"flow", "veh/h", 1.0 / 3600.0},
    {"density", "veh/m", 1.0},      {"density", "veh/km", 1e-3},
    {"speed", "m/s", 1.0},          {"speed", "km/h", 1.0 / 3.6},
    {"rate", "1/s", 1.0},           {"rate", "/s", 1.0},
    {"rate", "1/h", 1.0 / 3600.0},  {"rate", "/h", 1.0 / 3600.0},
    {"currency", "usd", 1.0},       {"currency", "Musd", 1e6},
    {"unit_cost", "usd/km", 1.0},   {"unit_cost", "Musd/km", 1e6},
    {"unit_cost", "usd/m", 1000.0},
};

double unit_factor(std::string_view unit, std::string_view dimension) {
  for (const auto& u : kUnits) {
    if (u.dimension == dimension && u.unit == unit) return u.factor;
  }
  bool known = false;
  for (const auto& u : kUnits) known = known || u.unit == unit;
  if (known) {
    throw ParseError("unit '" + std::string(unit) + "' is not a " + std::string(dimension) +
                     " unit");
  }
  throw ParseError("unknown unit '" + std::string(unit) + "'");
}

double parse_number(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw ParseError("missing number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError("'" + s + "' is not a number");
  }
  return v;
}

long parse_integer(std::string_view text) {
  const double v = parse_number(text);
  if (v != std::floor(v)) throw ParseError("'" + std::string(text) + "' is not an integer");
  return static_cast<long>(v);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto k = s.find(sep, start);
    out.push_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Line {
  int number = 0;
  std::vector<std::string_view> tokens;
};

/// Splits a data line into positional tokens and key=value pairs.
struct Fields {
  std::vector<std::string_view> positional;
  std::vector<std::pair<std::string_view, std::string_view>> named;

  explicit Fields(const Line& line) {
    for (auto t : line.tokens) {
      const auto eq = t.find('=');
      if (eq == std::string_view::npos) {
        positional.push_back(t);
      } else {
        named.emplace_back(t.substr(0, eq), t.substr(eq + 1));
      }
    }
  }
  std::optional<std::string_view> get(std::string_view key) const {
    for (const auto& [k, v] : named) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
  std::string_view require(std::string_view key) const {
    auto v = get(key);
    if (!v) throw ParseError("missing field '" + std::string(key) + "'");
    return *v;
  }
  void only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : named) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ParseError("unknown field '" + std::string(k) + "'");
      }
    }
  }
};

struct PairSpec {
  int a = 0;
  int b = 0;
  bool both = true;
};

PairSpec parse_pair(std::string_view t) {
  for (char sep : {'-', '>'}) {
    const auto k = t.find(sep, 1);
    if (k == std::string_view::npos) continue;
    return {static_cast<int>(parse_integer(t.substr(0, k))),
            static_cast<int>(parse_integer(t.substr(k + 1))), sep == '-'};
  }
  throw ParseError("expected a pair like 1-2 or 1>2, got '" + std::string(t) + "'");
}

class ScenarioParser {
 public:
  ScenarioParser(std::string_view text, std::string origin) : origin_(std::move(origin)) {
    int number = 0;
    for (auto raw : split(text, '\n')) {
      ++number;
      if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      Line line{number, {}};
      std::size_t k = 0;
      while (k < raw.size()) {
        while (k < raw.size() && std::isspace(static_cast<unsigned char>(raw[k]))) ++k;
        std::size_t j = k;
        while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
        if (j > k) line.tokens.push_back(raw.substr(k, j - k));
        k = j;
      }
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
    }
  }

  Scenario parse() {
    sc_.network.mainline_fd.jam_density = ScenarioDefaults::mainline_jam_density;
    sc_.network.ramp_fd.jam_density = ScenarioDefaults::ramp_jam_density;
    std::string section;
    std::vector<std::string> seen;
    for (line_ = 0; line_ < lines_.size(); ++line_) {
      const auto& line = lines_[line_];
      try {
        const auto first = line.tokens.front();
        if (first.front() == '[') {
          if (first.back() != ']' || line.tokens.size() != 1) fail("malformed section header");
          section = std::string(first.substr(1, first.size() - 2));
          if (std::find(seen.begin(), seen.end(), section) != seen.end()) {
            fail("section [" + section + "] appears twice");
          }
          seen.push_back(section);
          continue;
        }
        if (section.empty()) fail("data before the first section");
        dispatch(section, line);
      } catch (const ParseError& e) {
        const std::string msg = e.what();
        if (msg.rfind(origin_, 0) == 0) throw;
        throw ParseError(origin_ + ":" + std::to_string(line.number) + ": " + msg);
      }
    }
    for (const char* required : {"subregions", "adjacency", "fd", "demand", "sim"}) {
      if (std::find(seen.begin(), seen.end(), required) == seen.end()) {
        throw ParseError(origin_ + ": missing section [" + required + "]");
      }
    }
    for (auto& c : sc_.network.candidates) c.cell_length = sc_.sim.cell_length;
    for (auto& [from, to] : pending_boundaries_) {
      sc_.network.boundaries.push_back(
          {from, to, to_capacity_.count({from, to}) ? to_capacity_[{from, to}]
                                                    : ScenarioDefaults::boundary_capacity});
    }
    return std::move(sc_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg); }

  void dispatch(const std::string& section, const Line& line) {
    Fields f(line);
    if (section == "network") {
      f.only({"name"});
      if (!f.positional.empty()) fail("unexpected token '" + std::string(f.positional[0]) + "'");
      if (auto v = f.get("name")) sc_.name = std::string(*v);
    } else if (section == "subregions") {
      subregion(f);
    } else if (section == "adjacency") {
      adjacency(f);
    } else if (section == "candidates") {
      candidate(f);
    } else if (section == "fd") {
      fundamental_diagram(f);
    } else if (section == "demand") {
      demand(line, f);
    } else if (section == "sim") {
      sim(f);
    } else if (section == "optimizer") {
      optimizer(f);
    } else if (section == "costs") {
      costs(f);
    } else {
      fail("unknown section [" + section + "]");
    }
  }

  void subregion(const Fields& f) {
    f.only({"trip_length", "n_max", "c_max", "mfd"});
    if (f.positional.size() != 1) fail("expected exactly one subregion id");
    SubregionParams p;
    p.id = static_cast<int>(parse_integer(f.positional[0]));
    p.avg_trip_length = parse_quantity(f.require("trip_length"), "length");
    p.n_max = parse_quantity(f.require("n_max"), "count");
    p.c_max = f.get("c_max") ? parse_quantity(*f.get("c_max"), "flow") : ScenarioDefaults::c_max;
    const auto coeffs = split(f.require("mfd"), ',');
    if (coeffs.size() != 3) fail("mfd needs three coefficients a3,a2,a1");
    for (std::size_t k = 0; k < 3; ++k) p.mfd[k] = parse_number(coeffs[k]);
    sc_.network.subregions.push_back(p);
  }

  void adjacency(const Fields& f) {
    f.only({"capacity"});
    if (f.positional.empty()) fail("expected at least one pair");
    std::optional<double> capacity;
    if (auto c = f.get("capacity")) capacity = parse_quantity(*c, "flow");
    for (auto t : f.positional) {
      const auto p = parse_pair(t);
      add_boundary(p.a, p.b, capacity);
      if (p.both) add_boundary(p.b, p.a, capacity);
    }
  }

  void add_boundary(int from, int to, std::optional<double> capacity) {
    pending_boundaries_.emplace_back(from, to);
    if (capacity) to_capacity_[{from, to}] = *capacity;
  }

  void candidate(const Fields& f) {
    f.only({"length"});
    if (f.positional.size() != 1) fail("expected exactly one pair per candidate line");
    const auto p = parse_pair(f.positional[0]);
    const double length = parse_quantity(f.require("length"), "length");
    sc_.network.candidates.push_back({p.a, p.b, length, 0.0});
    if (p.both) sc_.network.candidates.push_back({p.b, p.a, length, 0.0});
  }

  void fundamental_diagram(const Fields& f) {
    f.only({"free_flow", "capacity", "jam_density"});
    if (f.positional.size() != 1) fail("expected 'mainline' or 'ramp'");
    FundamentalDiagram* fd = nullptr;
    if (f.positional[0] == "mainline") {
      fd = &sc_.network.mainline_fd;
    } else if (f.positional[0] == "ramp") {
      fd = &sc_.network.ramp_fd;
    } else {
      fail("expected 'mainline' or 'ramp'");
    }
    fd->free_flow_speed = parse_quantity(f.require("free_flow"), "speed");
    fd->capacity = parse_quantity(f.require("capacity"), "flow");
    if (auto k = f.get("jam_density")) fd->jam_density = parse_quantity(*k, "density");
  }

  void demand(const Line& line, const Fields& f) {
    auto& profile = sc_.demand;
    if (profile.ids.empty()) {
      for (const auto& s : sc_.network.subregions) profile.ids.push_back(s.id);
      std::sort(profile.ids.begin(), profile.ids.end());
      if (profile.ids.empty()) fail("[demand] must follow [subregions]");
    }
    const std::size_t n = profile.ids.size();
    if (!f.positional.empty() && f.positional[0] == "segment") {
      if (rows_pending_ > 0) fail("previous segment has missing matrix rows");
      f.only({"from", "to", "unit", "fill"});
      if (f.positional.size() != 1) fail("unexpected token after 'segment'");
      DemandProfile::Segment seg;
      seg.start = parse_quantity(f.require("from"), "time");
      seg.end = parse_quantity(f.require("to"), "time");
      segment_factor_ = unit_factor(f.require("unit"), "flow");
      if (auto fill = f.get("fill")) {
        seg.rate.assign(n * n, parse_number(*fill) * segment_factor_);
      } else {
        rows_pending_ = n;
      }
      profile.segments.push_back(std::move(seg));
      return;
    }
    if (rows_pending_ == 0) fail("matrix row outside a segment");
    if (!f.named.empty() || line.tokens.size() != n) {
      fail("matrix row needs " + std::to_string(n) + " numbers");
    }
    auto& seg = profile.segments.back();
    for (auto t : line.tokens) seg.rate.push_back(parse_number(t) * segment_factor_);
    --rows_pending_;
  }

  void sim(const Fields& f) {
    f.only({"step", "horizon", "cell_length", "speed_floor", "max_nodes", "mu"});
    if (!f.positional.empty()) fail("unexpected token '" + std::string(f.positional[0]) + "'");
    auto& s = sc_.sim;
    if (auto v = f.get("step")) s.ts = parse_quantity(*v, "time");
    if (auto v = f.get("horizon")) s.horizon = parse_quantity(*v, "time");
    if (auto v = f.get("cell_length")) s.cell_length = parse_quantity(*v, "length");
    if (auto v = f.get("speed_floor")) s.speed_floor = parse_quantity(*v, "speed");
    if (auto v = f.get("max_nodes")) s.max_nodes = static_cast<int>(parse_integer(*v));
    if (auto v = f.get("mu")) sc_.logit.mu = parse_quantity(*v, "rate");
  }

  void optimizer(const Fields& f) {
    f.only({"swarm", "iterations", "inertia", "c1", "c2", "velocity_clamp", "seed", "infeasible",
            "penalty", "exhaustive_cap"});
    if (!f.positional.empty()) fail("unexpected token '" + std::string(f.positional[0]) + "'");
    auto& o = sc_.optimizer;
    if (auto v = f.get("swarm")) o.swarm = static_cast<int>(parse_integer(*v));
    if (auto v = f.get("iterations")) o.iterations = static_cast<int>(parse_integer(*v));
    if (auto v = f.get("inertia")) {
      const auto parts = split(*v, ',');
      if (parts.size() != 2) fail("inertia needs start,end");
      o.inertia_start = parse_number(parts[0]);
      o.inertia_end = parse_number(parts[1]);
    }
    if (auto v = f.get("c1")) o.c1 = parse_number(*v);
    if (auto v = f.get("c2")) o.c2 = parse_number(*v);
    if (auto v = f.get("velocity_clamp")) o.velocity_clamp = parse_number(*v);
    if (auto v = f.get("seed")) {
      const long seed = parse_integer(*v);
      if (seed < 0) fail("seed must be non-negative");
      o.seed = static_cast<std::uint64_t>(seed);
    }
    if (auto v = f.get("infeasible")) {
      if (*v == "repair") {
        o.infeasible = InfeasibleMode::Repair;
      } else if (*v == "penalty") {
        o.infeasible = InfeasibleMode::Penalty;
      } else {
        fail("infeasible must be 'repair' or 'penalty'");
      }
    }
    if (auto v = f.get("penalty")) o.penalty_per_currency = parse_number(*v);
    if (auto v = f.get("exhaustive_cap")) o.exhaustive_cap = static_cast<int>(parse_integer(*v));
  }

  void costs(const Fields& f) {
    f.only({"unit_cost", "budgets"});
    if (!f.positional.empty()) fail("unexpected token '" + std::string(f.positional[0]) + "'");
    if (auto v = f.get("unit_cost")) sc_.network.cost_per_km = parse_quantity(*v, "unit_cost");
    if (auto v = f.get("budgets")) {
      sc_.budgets.clear();
      for (auto b : split(*v, ',')) sc_.budgets.push_back(parse_quantity(b, "currency"));
    }
  }

  std::string origin_;
  std::vector<Line> lines_;
  std::size_t line_ = 0;
  Scenario sc_;
  std::size_t rows_pending_ = 0;
  double segment_factor_ = 1.0;
  std::vector<std::pair<int, int>> pending_boundaries_;
  std::map<std::pair<int, int>, double> to_capacity_;
};

json metrics_json(const SimMetrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"tts_veh_h", num(m.tts)},
              {"average_accumulation_veh", num(m.average_accumulation)},
              {"average_completion_flow_veh_per_h", num(m.average_completion_flow)},
              {"construction_cost_usd", num(m.cost)}};
}

json audit_json(const SimMetrics& m) {
  const double imbalance =
      m.injected > 0.0 ? std::abs(m.injected - m.completed - m.residual) / m.injected : 0.0;
  return json{{"injected_veh", m.injected},
              {"completed_veh", m.completed},
              {"residual_veh", m.residual},
              {"relative_imbalance", imbalance}};
}

json parameters_json(const Scenario& sc) {
  json caps = json::object();
  for (const auto& b : sc.network.boundaries) {
    caps[std::to_string(b.from) + ">" + std::to_string(b.to)] = b.capacity * 3600.0;
  }
  json cmax = json::object();
  for (const auto& s : sc.network.subregions) cmax[std::to_string(s.id)] = s.c_max * 3600.0;
  return json{{"step_s", sc.sim.ts},
              {"horizon_s", sc.sim.horizon},
              {"cell_length_m", sc.sim.cell_length},
              {"speed_floor_m_per_s", sc.sim.speed_floor},
              {"max_route_nodes", sc.sim.max_nodes},
              {"logit_mu_per_s", sc.logit.mu},
              {"boundary_capacity_veh_per_h", caps},
              {"c_max_veh_per_h", cmax},
              {"mainline_jam_density_veh_per_km", sc.network.mainline_fd.jam_density * 1000.0},
              {"ramp_jam_density_veh_per_km", sc.network.ramp_fd.jam_density * 1000.0},
              {"unit_cost_usd_per_km", sc.network.cost_per_km}};
}

json pair_order_json(const MixedNetwork& net) {
  json out = json::array();
  for (const auto& p : net.candidate_pairs()) {
    out.push_back(std::to_string(p.lo) + "-" + std::to_string(p.hi));
  }
  return out;
}

json matrix_json(const MixedNetwork& net, const DesignVector& d) {
  json rows = json::array();
  std::istringstream is(render_design_matrix(net, d));
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    std::string row;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    while (ls >> tok) row += tok;
    rows.push_back(row);
  }
  return rows;
}

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

double parse_quantity(std::string_view text, std::string_view dimension) {
  std::size_t k = 0;
  while (k < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[k])) || text[k] == '.' || text[k] == '-' ||
          text[k] == '+' ||
          ((text[k] == 'e' || text[k] == 'E') && k > 0 && k + 1 < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[k + 1])) || text[k + 1] == '-' ||
            text[k + 1] == '+')))) {
    ++k;
  }
  const auto number = text.substr(0, k);
  const auto unit = text.substr(k);
  if (unit.empty()) {
    throw ParseError("'" + std::string(text) + "' needs a " + std::string(dimension) + " unit");
  }
  return parse_number(number) * unit_factor(unit, dimension);
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Scenario sc = ScenarioParser(text, origin).parse();
  const auto problems = validate_scenario(sc);
  if (!problems.empty()) {
    std::ostringstream os;
    os << origin << ": invalid scenario:";
    for (const auto& p : problems) os << "\n  " << p;
    throw ValidationError(os.str());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream os;
  const auto& net = sc.network;
  if (!sc.name.empty()) os << "[network]\nname=" << sc.name << "\n\n";
  os << "[subregions]\n";
  for (const auto& s : net.subregions) {
    os << s.id << " trip_length=" << fmt(s.avg_trip_length) << "m n_max=" << fmt(s.n_max)
       << "veh c_max=" << fmt(s.c_max) << "veh/s mfd=" << fmt(s.mfd[0]) << ',' << fmt(s.mfd[1])
       << ',' << fmt(s.mfd[2]) << '\n';
  }
  os << "\n[adjacency]\n";
  for (const auto& b : net.boundaries) {
    os << b.from << '>' << b.to << " capacity=" << fmt(b.capacity) << "veh/s\n";
  }
  os << "\n[candidates]\n";
  for (const auto& c : net.candidates) {
    os << c.origin << '>' << c.destination << " length=" << fmt(c.mainline_length) << "m\n";
  }
  os << "\n[fd]\n";
  auto fd = [&](const char* name, const FundamentalDiagram& d) {
    os << name << " free_flow=" << fmt(d.free_flow_speed) << "m/s capacity=" << fmt(d.capacity)
       << "veh/s jam_density=" << fmt(d.jam_density) << "veh/m\n";
  };
  fd("mainline", net.mainline_fd);
  fd("ramp", net.ramp_fd);
  os << "\n[demand]\n";
  const std::size_t n = sc.demand.ids.size();
  for (const auto& seg : sc.demand.segments) {
    os << "segment from=" << fmt(seg.start) << "s to=" << fmt(seg.end) << "s unit=veh/s\n";
    for (std::size_t o = 0; o < n; ++o) {
      for (std::size_t d = 0; d < n; ++d) os << (d ? " " : "") << fmt(seg.rate[o * n + d]);
      os << '\n';
    }
  }
  os << "\n[sim]\nstep=" << fmt(sc.sim.ts) << "s horizon=" << fmt(sc.sim.horizon)
     << "s cell_length=" << fmt(sc.sim.cell_length) << "m speed_floor=" << fmt(sc.sim.speed_floor)
     << "m/s max_nodes=" << sc.sim.max_nodes << " mu=" << fmt(sc.logit.mu) << "/s\n";
  const auto& o = sc.optimizer;
  os << "\n[optimizer]\nswarm=" << o.swarm << " iterations=" << o.iterations
     << " inertia=" << fmt(o.inertia_start) << ',' << fmt(o.inertia_end) << " c1=" << fmt(o.c1)
     << " c2=" << fmt(o.c2) << " velocity_clamp=" << fmt(o.velocity_clamp) << " seed=" << o.seed
     << " infeasible=" << (o.infeasible == InfeasibleMode::Repair ? "repair" : "penalty")
     << " penalty=" << fmt(o.penalty_per_currency) << " exhaustive_cap=" << o.exhaustive_cap
     << '\n';
  os << "\n[costs]\nunit_cost=" << fmt(net.cost_per_km) << "usd/km";
  if (!sc.budgets.empty()) {
    os << " budgets=";
    for (std::size_t k = 0; k < sc.budgets.size(); ++k) {
      os << (k ? "," : "") << fmt(sc.budgets[k]) << "usd";
    }
  }
  os << '\n';
  return os.str();
}

void apply_override(Scenario& sc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ParseError("override '" + std::string(assignment) + "' is not key=value");
  }
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  auto quantity = [&](std::string_view dimension) {
    const bool bare = !value.empty() && (std::isdigit(static_cast<unsigned char>(value.back())) ||
                                         value.back() == '.');
    return bare ? parse_number(value) : parse_quantity(value, dimension);
  };
  if (key == "mu") {
    sc.logit.mu = quantity("rate");
  } else if (key == "c_ij") {
    const double c = quantity("flow");
    for (auto& b : sc.network.boundaries) b.capacity = c;
  } else if (key == "c_max") {
    const double c = quantity("flow");
    for (auto& s : sc.network.subregions) s.c_max = c;
  } else if (key == "kj_mainline") {
    sc.network.mainline_fd.jam_density = quantity("density");
  } else if (key == "kj_ramp") {
    sc.network.ramp_fd.jam_density = quantity("density");
  } else if (key == "ts") {
    sc.sim.ts = quantity("time");
  } else {
    throw ParseError("unknown override '" + std::string(key) +
                     "' (expected mu, c_ij, c_max, kj_mainline, kj_ramp, ts)");
  }
}

void write_trajectory_csv(const SimResult& r, std::ostream& os) {
  os << "time_s";
  for (int id : r.subregion_ids) os << ",n" << id << "_veh";
  for (const auto& e : r.expressways) os << ",E" << e.from << e.to << "_veh";
  os << '\n';
  for (std::size_t t = 0; t < r.time.size(); ++t) {
    os << fmt(r.time[t]);
    for (double v : r.accumulation[t]) os << ',' << fmt(v);
    for (double v : r.expressway_vehicles[t]) os << ',' << fmt(v);
    os << '\n';
  }
}

void write_accumulation_svg(const SimResult& r, std::ostream& os, const std::string& title) {
  constexpr double width = 720, height = 420, left = 70, right = 110, top = 40, bottom = 50;
  static constexpr const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double t_max = r.time.empty() ? 1.0 : std::max(r.time.back(), 1.0);
  double n_max = 1.0;
  for (const auto& row : r.accumulation) {
    for (double v : row) n_max = std::max(n_max, v);
  }
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto x = [&](double t) { return left + plot_w * t / t_max; };
  auto y = [&](double n) { return top + plot_h * (1.0 - n / n_max); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
     << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double n = n_max * k / 4;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y(n) + 4 << "\" text-anchor=\"end\">"
       << std::lround(n) << "</text>\n";
    const double t = t_max * k / 4;
    os << "<text x=\"" << x(t) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
       << std::lround(t / 60.0) << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\">time (min)</text>\n";
  os << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 "
     << top + plot_h / 2 << ")\" text-anchor=\"middle\">vehicles</text>\n";
  for (std::size_t i = 0; i < r.subregion_ids.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < r.time.size(); ++t) {
      os << std::fixed << std::setprecision(1) << x(r.time[t]) << ',' << y(r.accumulation[t][i])
         << ' ';
    }
    os << std::defaultfloat << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\""
       << width - right + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << width - right + 36 << "\" y=\"" << ly + 4 << "\">subregion "
       << r.subregion_ids[i] << "</text>\n";
  }
  os << "</svg>\n";
}

std::string run_summary_json(const Scenario& sc, const DesignVector& design,
                             const SimMetrics& metrics) {
  json j{{"scenario", sc.name},
         {"design",
          {{"bits", design.bits()},
           {"pair_order", pair_order_json(sc.network)},
           {"matrix", matrix_json(sc.network, design)}}},
         {"metrics", metrics_json(metrics)},
         {"audit", audit_json(metrics)},
         {"parameters", parameters_json(sc)}};
  return j.dump(2) + "\n";
}

SimMetrics parse_run_summary(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run summary: ") + e.what());
  }
  SimMetrics m;
  try {
    const auto& mj = j.at("metrics");
    m.tts = number_or_inf(mj.at("tts_veh_h"));
    m.average_accumulation = number_or_inf(mj.at("average_accumulation_veh"));
    m.average_completion_flow = number_or_inf(mj.at("average_completion_flow_veh_per_h"));
    m.cost = number_or_inf(mj.at("construction_cost_usd"));
    const auto& a = j.at("audit");
    m.injected = a.at("injected_veh").get<double>();
    m.completed = a.at("completed_veh").get<double>();
    m.residual = a.at("residual_veh").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("incomplete run summary: ") + e.what());
  }
  return m;
}

std::string sweep_report_json(const Scenario& sc, const SweepReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = metrics_json(row.metrics);
    r["budget_usd"] = row.budget;
    r["design_bits"] = row.design.bits();
    r["matrix"] = matrix_json(sc.network, row.design);
    if (!row.trace.empty()) r["convergence_tts_veh_h"] = row.trace;
    rows.push_back(std::move(r));
  }
  json j{{"scenario", report.scenario},
         {"method", report.method},
         {"seed", report.seed},
         {"pair_order", pair_order_json(sc.network)},
         {"parameters", parameters_json(sc)},
         {"rows", rows}};
  return j.dump(2) + "\n";
}

void write_sweep_table_csv(const SweepReport& report, std::ostream& os) {
  os << "Scheme,Budget (dollar),Average accumulations (veh),Average travel completion flow "
        "(veh/h),TTS (veh·h),Construction cost (dollar),Design\n";
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    os << k + 1 << ',' << fmt(r.budget) << ',' << fmt(r.metrics.average_accumulation) << ','
       << fmt(r.metrics.average_completion_flow) << ',' << fmt(r.metrics.tts) << ','
       << fmt(r.metrics.cost) << ',' << r.design.bits() << '\n';
  }
}

void write_convergence_csv(const SweepReport& report, std::ostream& os) {
  os << "budget_usd,iteration,best_tts_veh_h\n";
  for (const auto& r : report.rows) {
    for (std::size_t it = 0; it < r.trace.size(); ++it) {
      os << fmt(r.budget) << ',' << it << ',' << fmt(r.trace[it]) << '\n';
    }
  }
}

std::string render_sweep_matrices(const Scenario& sc, const SweepReport& report) {
  std::ostringstream os;
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    os << "Scheme " << k + 1 << ": budget $" << fmt(r.budget / 1e6) << "M, cost $"
       << fmt(r.metrics.cost / 1e6) << "M, TTS " << fmt(r.metrics.tts) << " veh h\n";
    os << render_design_matrix(sc.network, r.design) << '\n';
  }
  return os.str();
}

}  // namespace mixnet
