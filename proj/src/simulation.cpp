#include "mixnet/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mixnet/errors.hpp"
#include "mixnet/expressway.hpp"
#include "mixnet/subregion.hpp"

namespace mixnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNone = -1;

enum class SupplyKind : std::uint8_t { Receiving, Cell, Unlimited };

struct Group {
  SupplyKind kind = SupplyKind::Unlimited;
  int index = kNone;  // subregion index or cell index
};

enum class CellKind : std::uint8_t { OnRamp, Mainline, OffRamp, ConnRamp };

struct Cell {
  CellKind kind = CellKind::Mainline;
  int expressway = kNone;  // owning expressway (downstream one for connecting ramps)
  int position = 0;        // 1-based for mainline cells
  int upstream = kNone;    // connecting ramps: upstream expressway
  bool ramp = false;
  int slot_begin = 0;
  int slot_end = 0;
  std::string name;
};

struct Expressway {
  DirectedPair direction;
  int from = 0;  // subregion index
  int to = 0;
  int cells = 0;
  int onramp = kNone;  // cell ids
  int first_mainline = kNone;
  int offramp = kNone;
  std::vector<int> connramps_in;
  std::vector<int> connramps_out;
};

/// Class of vehicles travelling on an expressway: a route and the position of
/// the expressway in it.
struct ExClass {
  int route = 0;
  int pos = 0;
  int expressway = 0;
  int onramp_slot = kNone;
  int conn_slot = kNone;
  int mainline_offset = 0;  // slot index within each mainline cell
  int offramp_slot = kNone;
};

}  // namespace

/// Index-based form of (scenario, design): every per-class stock has exactly
/// one outgoing link and belongs to exactly one competition group.
class CompiledModel {
 public:
  CompiledModel(const Scenario& scenario, const DesignVector& design);

  Scenario scenario;
  DesignVector design;
  std::vector<SubregionParams> subs;  // ascending id
  std::vector<Route> routes;
  std::vector<int> od_begin;          // routes of OD (o, d) are [od_begin[k], od_begin[k+1])
  std::vector<Expressway> expressways;
  std::vector<Cell> cells;
  std::vector<Group> groups;

  int sub_stocks = 0;
  int stocks = 0;
  std::vector<int> owner;   // subregion index, or cell index for slots
  std::vector<int> target;  // kNone for completions
  std::vector<int> group;
  std::vector<double> cap;
  std::vector<double> slot_rate;      // cell slots: V_f / L_s, i.e. demand per vehicle
  std::vector<double> slot_capacity;  // cell slots: C of the cell's diagram
  std::vector<std::vector<int>> route_stock;  // [route][pos] sub stock, kNone on expressways
  std::vector<int> origin_stock;

  // Time terms: subregion, off-ramp, on-ramp, mainline, connecting ramp.
  int term_count = 0;
  std::vector<std::vector<int>> route_terms;
  std::vector<int> all_candidate_dirs_index;  // expressway -> column in SimResult
  std::vector<DirectedPair> all_candidate_dirs;

  int n() const { return static_cast<int>(subs.size()); }
  int e() const { return static_cast<int>(expressways.size()); }
  int term_offramp(int x) const { return n() + x; }
  int term_onramp(int x) const { return n() + e() + x; }
  int term_mainline(int x) const { return n() + 2 * e() + x; }
  int term_connramp(int c) const { return n() + 3 * e() + c; }
  std::vector<int> connramp_cells;  // cell ids in term order

  int sub_index(int id) const {
    for (int k = 0; k < n(); ++k) {
      if (subs[k].id == id) return k;
    }
    throw ValidationError("unknown subregion id " + std::to_string(id));
  }
  int expressway_index(DirectedPair d) const {
    for (int k = 0; k < e(); ++k) {
      if (expressways[k].direction == d) return k;
    }
    return kNone;
  }
  const FundamentalDiagram& fd(const Cell& c) const {
    return c.ramp ? scenario.network.ramp_fd : scenario.network.mainline_fd;
  }
};

CompiledModel::CompiledModel(const Scenario& sc, const DesignVector& d)
    : scenario(sc), design(d) {
  require_valid(scenario);
  const auto& net = scenario.network;
  if (design.pairs() != net.candidate_pairs()) {
    throw ValidationError("design vector does not match the network's candidate set");
  }
  const double ls = scenario.sim.cell_length;

  subs = net.subregions;
  std::sort(subs.begin(), subs.end(),
            [](const SubregionParams& a, const SubregionParams& b) { return a.id < b.id; });

  for (const auto& c : net.candidates) all_candidate_dirs.push_back(c.direction());
  std::sort(all_candidate_dirs.begin(), all_candidate_dirs.end());

  for (const auto& dir : design.built_directions()) {
    Expressway x;
    x.direction = dir;
    x.from = sub_index(dir.from);
    x.to = sub_index(dir.to);
    x.cells = net.candidate(dir.from, dir.to)->cell_count();
    expressways.push_back(x);
    all_candidate_dirs_index.push_back(static_cast<int>(
        std::find(all_candidate_dirs.begin(), all_candidate_dirs.end(), dir) -
        all_candidate_dirs.begin()));
  }

  // Routes, grouped by OD in ascending (origin, destination) order.
  od_begin.push_back(0);
  for (const auto& o : subs) {
    for (const auto& dd : subs) {
      auto r = enumerate_routes(net, design, o.id, dd.id, scenario.sim.max_nodes);
      if (r.empty() && scenario.demand.total_vehicles(scenario.sim.horizon) > 0.0) {
        for (const auto& seg : scenario.demand.segments) {
          const std::size_t k = static_cast<std::size_t>(sub_index(o.id)) * subs.size() +
                                static_cast<std::size_t>(sub_index(dd.id));
          if (seg.rate[k] > 0.0) {
            throw ValidationError("OD " + std::to_string(o.id) + "->" + std::to_string(dd.id) +
                                  " has demand but no route within " +
                                  std::to_string(scenario.sim.max_nodes) + " nodes");
          }
        }
      }
      routes.insert(routes.end(), r.begin(), r.end());
      od_begin.push_back(static_cast<int>(routes.size()));
    }
  }

  // Subregion stocks come first.
  route_stock.resize(routes.size());
  std::vector<std::vector<int>> route_exclass(routes.size());
  for (std::size_t r = 0; r < routes.size(); ++r) {
    route_stock[r].assign(routes[r].size(), kNone);
    route_exclass[r].assign(routes[r].size(), kNone);
    for (std::size_t p = 0; p < routes[r].size(); ++p) {
      if (routes[r].nodes[p].is_subregion()) {
        route_stock[r][p] = sub_stocks++;
        owner.push_back(sub_index(routes[r].nodes[p].a));
      }
    }
    origin_stock.push_back(route_stock[r][0]);
  }

  // Expressway classes.
  std::vector<std::vector<int>> classes_of(expressways.size());
  std::vector<ExClass> exclasses;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    for (std::size_t p = 0; p < routes[r].size(); ++p) {
      const auto& node = routes[r].nodes[p];
      if (!node.is_expressway()) continue;
      const int x = expressway_index(node.direction());
      ExClass c;
      c.route = static_cast<int>(r);
      c.pos = static_cast<int>(p);
      c.expressway = x;
      c.mainline_offset = static_cast<int>(classes_of[x].size());
      route_exclass[r][p] = static_cast<int>(exclasses.size());
      classes_of[x].push_back(static_cast<int>(exclasses.size()));
      exclasses.push_back(c);
    }
  }

  // Cells and slots.
  int slot = sub_stocks;
  auto add_cell = [&](Cell c, int slots) {
    c.slot_begin = slot;
    c.slot_end = slot + slots;
    slot += slots;
    cells.push_back(std::move(c));
    return static_cast<int>(cells.size()) - 1;
  };
  auto name_of = [](DirectedPair dp) {
    return "E" + std::to_string(dp.from) + std::to_string(dp.to);
  };
  for (int x = 0; x < e(); ++x) {
    auto& ex = expressways[x];
    const auto& cls = classes_of[x];
    int on_slots = 0;
    int off_slots = 0;
    for (int id : cls) {
      const auto& route = routes[exclasses[id].route];
      const int p = exclasses[id].pos;
      if (route.nodes[p - 1].is_subregion()) exclasses[id].onramp_slot = on_slots++;
      if (route.nodes[p + 1].is_subregion()) exclasses[id].offramp_slot = off_slots++;
    }
    ex.onramp = add_cell({CellKind::OnRamp, x, 0, kNone, true, 0, 0, "on-ramp " + name_of(ex.direction)},
                         on_slots);
    for (int l = 1; l <= ex.cells; ++l) {
      const int id = add_cell({CellKind::Mainline, x, l, kNone, false, 0, 0,
                               name_of(ex.direction) + " cell " + std::to_string(l)},
                              static_cast<int>(cls.size()));
      if (l == 1) ex.first_mainline = id;
    }
    ex.offramp = add_cell(
        {CellKind::OffRamp, x, 0, kNone, true, 0, 0, "off-ramp " + name_of(ex.direction)},
        off_slots);
  }
  for (const auto& ramp : connecting_ramps(net, design)) {
    const int up = expressway_index(ramp.upstream);
    const int down = expressway_index(ramp.downstream);
    int slots = 0;
    for (int id : classes_of[down]) {
      const auto& route = routes[exclasses[id].route];
      const auto& prev = route.nodes[exclasses[id].pos - 1];
      if (prev.is_expressway() && prev.direction() == ramp.upstream) exclasses[id].conn_slot = slots++;
    }
    const int cell = add_cell({CellKind::ConnRamp, down, 0, up, true, 0, 0,
                               "connecting ramp " + name_of(ramp.upstream) + "->" +
                                   name_of(ramp.downstream)},
                              slots);
    expressways[down].connramps_in.push_back(cell);
    expressways[up].connramps_out.push_back(cell);
    connramp_cells.push_back(cell);
  }
  stocks = slot;
  owner.resize(stocks);
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    for (int s = cells[c].slot_begin; s < cells[c].slot_end; ++s) owner[s] = c;
  }

  // Competition groups.
  auto add_group = [&](SupplyKind kind, int index) {
    groups.push_back({kind, index});
    return static_cast<int>(groups.size()) - 1;
  };
  for (int i = 0; i < n(); ++i) add_group(SupplyKind::Receiving, i);
  const int unlimited = add_group(SupplyKind::Unlimited, kNone);
  std::vector<int> onramp_group(e()), merge_group(e());
  std::vector<int> cell_group(cells.size(), kNone);  // mainline l -> supply of l + 1
  std::vector<int> diverge_group(cells.size(), kNone);
  for (int x = 0; x < e(); ++x) {
    const auto& ex = expressways[x];
    onramp_group[x] = add_group(SupplyKind::Cell, ex.onramp);
    merge_group[x] = add_group(SupplyKind::Cell, ex.first_mainline);
    for (int l = 1; l < ex.cells; ++l) {
      cell_group[ex.first_mainline + l - 1] = add_group(SupplyKind::Cell, ex.first_mainline + l);
    }
    diverge_group[ex.offramp] = add_group(SupplyKind::Cell, ex.offramp);
  }
  for (int c : connramp_cells) diverge_group[c] = add_group(SupplyKind::Cell, c);

  // Links.
  const double cr = net.ramp_fd.capacity;
  const double cm = net.mainline_fd.capacity;
  target.assign(stocks, kNone);
  group.assign(stocks, unlimited);
  cap.assign(stocks, kInf);

  auto mainline_slot = [&](const ExClass& c, int l) {
    return cells[expressways[c.expressway].first_mainline + l - 1].slot_begin + c.mainline_offset;
  };
  auto conn_cell_between = [&](int up, int down) {
    for (int cell : expressways[down].connramps_in) {
      if (cells[cell].upstream == up) return cell;
    }
    throw InvariantViolation("missing connecting ramp");
  };

  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& route = routes[r];
    for (std::size_t p = 0; p < route.size(); ++p) {
      const int s = route_stock[r][p];
      if (s == kNone) continue;
      if (p + 1 == route.size()) continue;  // completion
      const auto& next = route.nodes[p + 1];
      if (next.is_subregion()) {
        target[s] = route_stock[r][p + 1];
        group[s] = sub_index(next.a);
        cap[s] = net.boundary(route.nodes[p].a, next.a)->capacity;
      } else {
        const auto& c = exclasses[route_exclass[r][p + 1]];
        const auto& ex = expressways[c.expressway];
        target[s] = cells[ex.onramp].slot_begin + c.onramp_slot;
        group[s] = onramp_group[c.expressway];
        cap[s] = cr;
      }
    }
  }
  for (const auto& c : exclasses) {
    const auto& ex = expressways[c.expressway];
    const auto& route = routes[c.route];
    if (c.onramp_slot != kNone) {
      const int s = cells[ex.onramp].slot_begin + c.onramp_slot;
      target[s] = mainline_slot(c, 1);
      group[s] = merge_group[c.expressway];
      cap[s] = cr;
    }
    if (c.conn_slot != kNone) {
      const auto& prev = route.nodes[c.pos - 1];
      const int cell = conn_cell_between(expressway_index(prev.direction()), c.expressway);
      const int s = cells[cell].slot_begin + c.conn_slot;
      target[s] = mainline_slot(c, 1);
      group[s] = merge_group[c.expressway];
      cap[s] = cr;
    }
    for (int l = 1; l < ex.cells; ++l) {
      const int s = mainline_slot(c, l);
      target[s] = mainline_slot(c, l + 1);
      group[s] = cell_group[ex.first_mainline + l - 1];
      cap[s] = cm;
    }
    const int last = mainline_slot(c, ex.cells);
    const auto& next = route.nodes[c.pos + 1];
    if (next.is_subregion()) {
      const int off = cells[ex.offramp].slot_begin + c.offramp_slot;
      target[last] = off;
      group[last] = diverge_group[ex.offramp];
      cap[last] = cr;
      target[off] = route_stock[c.route][c.pos + 1];
      group[off] = ex.to;
      cap[off] = cr;
    } else {
      const auto& nc = exclasses[route_exclass[c.route][c.pos + 1]];
      const int cell = conn_cell_between(c.expressway, nc.expressway);
      target[last] = cells[cell].slot_begin + nc.conn_slot;
      group[last] = diverge_group[cell];
      cap[last] = cr;
    }
  }

  // Travel-time terms.
  term_count = n() + 3 * e() + static_cast<int>(connramp_cells.size());
  route_terms.resize(routes.size());
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& route = routes[r];
    for (std::size_t p = 0; p < route.size(); ++p) {
      const auto& node = route.nodes[p];
      if (node.is_subregion()) {
        route_terms[r].push_back(sub_index(node.a));
        if (p > 0 && route.nodes[p - 1].is_expressway()) {
          route_terms[r].push_back(term_offramp(expressway_index(route.nodes[p - 1].direction())));
        }
        continue;
      }
      const int x = expressway_index(node.direction());
      if (route.nodes[p - 1].is_subregion()) {
        route_terms[r].push_back(term_onramp(x));
      } else {
        const int cell = conn_cell_between(expressway_index(route.nodes[p - 1].direction()), x);
        const auto it = std::find(connramp_cells.begin(), connramp_cells.end(), cell);
        route_terms[r].push_back(term_connramp(static_cast<int>(it - connramp_cells.begin())));
      }
      route_terms[r].push_back(term_mainline(x));
    }
  }
  slot_rate.assign(stocks, 0.0);
  slot_capacity.assign(stocks, 0.0);
  for (const auto& c : cells) {
    for (int k = c.slot_begin; k < c.slot_end; ++k) {
      slot_rate[k] = fd(c).free_flow_speed / ls;
      slot_capacity[k] = fd(c).capacity;
    }
  }
}

namespace {

/// Scratch state for one step, computed from the stocks at time t.
struct StepState {
  std::vector<double> n;            // subregion totals
  std::vector<double> cell_total;   // vehicles per cell
  std::vector<double> terms;        // travel-time terms
};

void totals(const CompiledModel& m, const std::vector<double>& stock, StepState& st) {
  st.n.assign(m.n(), 0.0);
  for (int s = 0; s < m.sub_stocks; ++s) st.n[m.owner[s]] += stock[s];
  st.cell_total.assign(m.cells.size(), 0.0);
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    double sum = 0.0;
    for (int s = m.cells[c].slot_begin; s < m.cells[c].slot_end; ++s) sum += stock[s];
    st.cell_total[c] = sum;
  }
}

void compute_terms(const CompiledModel& m, StepState& st) {
  const double ls = m.scenario.sim.cell_length;
  const double floor = m.scenario.sim.speed_floor;
  st.terms.assign(m.term_count, 0.0);
  for (int i = 0; i < m.n(); ++i) {
    const double n = std::min(st.n[i], m.subs[i].n_max);
    st.terms[i] = m.subs[i].avg_trip_length / std::max(speed(m.subs[i], n), floor);
  }
  auto cell_time = [&](int c) {
    const auto& fd = m.fd(m.cells[c]);
    return ls / std::max(cell_speed(fd, st.cell_total[c] / ls), floor);
  };
  for (int x = 0; x < m.e(); ++x) {
    const auto& ex = m.expressways[x];
    st.terms[m.term_offramp(x)] = cell_time(ex.offramp);
    st.terms[m.term_onramp(x)] = cell_time(ex.onramp);
    double main = 0.0;
    for (int l = 0; l < ex.cells; ++l) main += cell_time(ex.first_mainline + l);
    st.terms[m.term_mainline(x)] = main;
  }
  for (std::size_t k = 0; k < m.connramp_cells.size(); ++k) {
    st.terms[m.term_connramp(static_cast<int>(k))] = cell_time(m.connramp_cells[k]);
  }
}

std::vector<double> times_from_terms(const CompiledModel& m, const std::vector<double>& terms) {
  std::vector<double> out(m.routes.size(), 0.0);
  for (std::size_t r = 0; r < m.routes.size(); ++r) {
    double t = 0.0;
    for (int k : m.route_terms[r]) t += terms[k];
    out[r] = t;
  }
  return out;
}

}  // namespace

Simulation::Simulation(const Scenario& scenario, const DesignVector& design, RunOptions options)
    : model_(std::make_unique<CompiledModel>(scenario, design)), options_(options) {
  stock_.assign(model_->stocks, 0.0);
  const auto& m = *model_;
  result_.subregion_ids.reserve(m.subs.size());
  for (const auto& s : m.subs) result_.subregion_ids.push_back(s.id);
  result_.expressways = m.all_candidate_dirs;
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

const std::vector<Route>& Simulation::routes() const { return model_->routes; }
int Simulation::total_steps() const { return model_->scenario.sim.steps(); }
double Simulation::time() const { return step_ * model_->scenario.sim.ts; }

double Simulation::accumulation(int subregion_id) const {
  const int i = model_->sub_index(subregion_id);
  double n = 0.0;
  for (int s = 0; s < model_->sub_stocks; ++s) {
    if (model_->owner[s] == i) n += stock_[s];
  }
  return n;
}

double Simulation::class_accumulation(std::size_t route, std::size_t position) const {
  const int s = model_->route_stock.at(route).at(position);
  if (s == kNone) throw std::invalid_argument("route position is not a subregion");
  return stock_[s];
}

void Simulation::set_class_accumulation(std::size_t route, std::size_t position, double vehicles) {
  const int s = model_->route_stock.at(route).at(position);
  if (s == kNone) throw std::invalid_argument("route position is not a subregion");
  if (!(vehicles >= 0.0)) throw std::invalid_argument("accumulation must be non-negative");
  stock_[s] = vehicles;
}

double Simulation::total_vehicles() const {
  return std::accumulate(stock_.begin(), stock_.end(), 0.0);
}

TrajectoryFrame Simulation::frame() const {
  const auto& m = *model_;
  const double ls = m.scenario.sim.cell_length;
  StepState st;
  totals(m, stock_, st);
  TrajectoryFrame f;
  f.accumulation = st.n;
  for (const auto& ex : m.expressways) {
    ExpresswaySnapshot snap;
    snap.direction = ex.direction;
    for (int l = 0; l < ex.cells; ++l) snap.mainline.push_back(st.cell_total[ex.first_mainline + l] / ls);
    snap.onramp = st.cell_total[ex.onramp] / ls;
    snap.offramp = st.cell_total[ex.offramp] / ls;
    for (int c : ex.connramps_in) {
      snap.connramps_in.emplace_back(m.expressways[m.cells[c].upstream].direction,
                                     st.cell_total[c] / ls);
    }
    f.expressways.push_back(std::move(snap));
  }
  return f;
}

NodeTimes Simulation::node_times() const {
  const auto& m = *model_;
  StepState st;
  totals(m, stock_, st);
  compute_terms(m, st);
  NodeTimes t;
  for (int i = 0; i < m.n(); ++i) t.subregion[m.subs[i].id] = st.terms[i];
  for (int x = 0; x < m.e(); ++x) {
    const auto dir = m.expressways[x].direction;
    t.offramp[dir] = st.terms[m.term_offramp(x)];
    t.onramp[dir] = st.terms[m.term_onramp(x)];
    t.mainline[dir] = st.terms[m.term_mainline(x)];
  }
  for (std::size_t k = 0; k < m.connramp_cells.size(); ++k) {
    const auto& cell = m.cells[m.connramp_cells[k]];
    t.connramp[{m.expressways[cell.upstream].direction, m.expressways[cell.expressway].direction}] =
        st.terms[m.term_connramp(static_cast<int>(k))];
  }
  return t;
}

std::vector<double> Simulation::route_times() const {
  StepState st;
  totals(*model_, stock_, st);
  compute_terms(*model_, st);
  return times_from_terms(*model_, st.terms);
}

void Simulation::record(const std::vector<double>& n, const std::vector<double>& cell_total) {
  const auto& m = *model_;
  result_.time.push_back(time());
  result_.accumulation.push_back(n);
  std::vector<double> ex(m.all_candidate_dirs.size(), 0.0);
  for (int x = 0; x < m.e(); ++x) {
    const auto& e = m.expressways[x];
    double v = cell_total[e.onramp] + cell_total[e.offramp];
    for (int l = 0; l < e.cells; ++l) v += cell_total[e.first_mainline + l];
    for (int c : e.connramps_in) v += cell_total[c];
    ex[m.all_candidate_dirs_index[x]] = v;
  }
  result_.expressway_vehicles.push_back(std::move(ex));
  if (options_.record_frames) result_.frames.push_back(frame());
}

void Simulation::step() {
  const auto& m = *model_;
  const auto& sim = m.scenario.sim;
  const double ts = sim.ts;
  const double ls = sim.cell_length;
  const auto& net = m.scenario.network;

  StepState st;
  totals(m, stock_, st);

  for (int i = 0; i < m.n(); ++i) {
    if (st.n[i] > m.subs[i].n_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "subregion " << m.subs[i].id << " accumulation " << st.n[i]
         << " exceeds jam accumulation " << m.subs[i].n_max << " at step " << step_;
      throw InvariantViolation(os.str());
    }
  }
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    const double kj = m.fd(m.cells[c]).jam_density;
    if (st.cell_total[c] / ls > kj * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << m.cells[c].name << " density " << st.cell_total[c] / ls << " exceeds jam density "
         << kj << " at step " << step_;
      throw InvariantViolation(os.str());
    }
  }

  if (step_ < sim.steps()) record(st.n, st.cell_total);

  // Metrics use the state at t.
  const double vehicles = std::accumulate(stock_.begin(), stock_.end(), 0.0);
  tts_veh_s_ += ts * vehicles;
  accumulation_sum_ += std::accumulate(st.n.begin(), st.n.end(), 0.0);

  // Subregion production per vehicle.
  std::vector<double> rate_per_vehicle(m.n(), 0.0);  // P(n) / (L n)
  for (int i = 0; i < m.n(); ++i) {
    const double n = std::min(st.n[i], m.subs[i].n_max);
    if (n > 0.0) rate_per_vehicle[i] = production(m.subs[i], n) / m.subs[i].avg_trip_length / n;
  }

  // Route choice for newly generated demand.
  compute_terms(m, st);
  const auto route_time = times_from_terms(m, st.terms);
  std::vector<double> injection(m.routes.size(), 0.0);
  const double t = time();
  for (int o = 0; o < m.n(); ++o) {
    for (int d = 0; d < m.n(); ++d) {
      const int k = o * m.n() + d;
      const int b = m.od_begin[k];
      const int e = m.od_begin[k + 1];
      if (b == e) continue;
      const double q = m.scenario.demand.rate(m.subs[o].id, m.subs[d].id, t);
      if (q <= 0.0) continue;
      const std::span<const double> times(route_time.data() + b, static_cast<std::size_t>(e - b));
      const auto split = split_demand(q, logit_probabilities(times, m.scenario.logit.mu));
      for (int r = b; r < e; ++r) injection[r] = split[r - b];
    }
  }

  // Demands and group denominators. Slot demand min(V_f k, C) is the
  // per-class cell demand written out for speed.
  auto& demand = demand_;
  demand.assign(m.stocks, 0.0);
  auto& competing = competing_;
  competing.assign(m.groups.size(), 0.0);
  for (int s = 0; s < m.sub_stocks; ++s) {
    if (stock_[s] <= 0.0) continue;
    demand[s] = stock_[s] * rate_per_vehicle[m.owner[s]];
    competing[m.group[s]] += demand[s];
  }
  for (int s = m.sub_stocks; s < m.stocks; ++s) {
    if (stock_[s] <= 0.0) continue;
    demand[s] = std::min(stock_[s] * m.slot_rate[s], m.slot_capacity[s]);
    competing[m.group[s]] += demand[s];
  }
  auto& supply = supply_;
  supply.assign(m.groups.size(), kInf);
  for (std::size_t g = 0; g < m.groups.size(); ++g) {
    const auto& grp = m.groups[g];
    if (grp.kind == SupplyKind::Receiving) {
      const auto& p = m.subs[grp.index];
      supply[g] = std::max(0.0, receiving_capacity(p, std::min(st.n[grp.index], p.n_max)));
    } else if (grp.kind == SupplyKind::Cell) {
      supply[g] = cell_supply(m.fd(m.cells[grp.index]), st.cell_total[grp.index] / ls);
    }
  }

  // Flows clamped so no stock drains below zero in one step, then a
  // simultaneous advance.
  auto& flow = flow_;
  flow.assign(m.stocks, 0.0);
  auto& next = next_;
  next = stock_;
  double completed = 0.0;
  double injected = 0.0;
  for (std::size_t r = 0; r < m.routes.size(); ++r) {
    next[m.origin_stock[r]] += ts * injection[r];
    injected += ts * injection[r];
  }
  for (int s = 0; s < m.stocks; ++s) {
    if (demand[s] <= 0.0) continue;
    const int g = m.group[s];
    flow[s] = clamp_outflow(proportional_min(demand[s], m.cap[s], competing[g], supply[g]),
                            stock_[s], ts);
    const double moved = ts * flow[s];
    next[s] -= moved;
    if (m.target[s] == kNone) {
      completed += moved;
    } else {
      next[m.target[s]] += moved;
    }
  }
  for (int s = 0; s < m.stocks; ++s) {
    if (next[s] < 0.0) {
      if (next[s] < -1e-9 * std::max(1.0, stock_[s])) {
        std::ostringstream os;
        os << "negative stock " << next[s] << " in "
           << (s < m.sub_stocks ? "subregion " + std::to_string(m.subs[m.owner[s]].id)
                                : m.cells[m.owner[s]].name)
           << " at step " << step_;
        throw InvariantViolation(os.str());
      }
      next[s] = 0.0;
    }
  }

  if (options_.audit) {
    audit_ = StepAudit{};
    audit_.injected = injected;
    audit_.completed = completed;
    const std::size_t nodes = m.subs.size() + m.cells.size();
    audit_.nodes.resize(nodes);
    auto node_of = [&](int s) {
      return s < m.sub_stocks ? static_cast<std::size_t>(m.owner[s])
                              : m.subs.size() + static_cast<std::size_t>(m.owner[s]);
    };
    for (int i = 0; i < m.n(); ++i) {
      audit_.nodes[i].name = "subregion " + std::to_string(m.subs[i].id);
      audit_.nodes[i].capacity_stock = m.subs[i].n_max;
    }
    for (std::size_t c = 0; c < m.cells.size(); ++c) {
      audit_.nodes[m.subs.size() + c].name = m.cells[c].name;
      audit_.nodes[m.subs.size() + c].capacity_stock = m.fd(m.cells[c]).jam_density * ls;
    }
    for (int s = 0; s < m.stocks; ++s) {
      auto& node = audit_.nodes[node_of(s)];
      node.before += stock_[s];
      node.after += next[s];
      node.outflow += flow[s];
      if (m.target[s] != kNone) audit_.nodes[node_of(m.target[s])].inflow += flow[s];
      audit_.links.push_back({flow[s], m.cap[s]});
    }
    for (std::size_t r = 0; r < m.routes.size(); ++r) {
      audit_.nodes[node_of(m.origin_stock[r])].inflow += injection[r];
    }
    audit_.groups.resize(m.groups.size());
    for (std::size_t g = 0; g < m.groups.size(); ++g) audit_.groups[g].supply = supply[g];
    for (int s = 0; s < m.stocks; ++s) audit_.groups[m.group[s]].flow += flow[s];
  }
  (void)net;

  std::swap(stock_, next);
  injected_ += injected;
  completed_ += completed;
  ++step_;
}

SimMetrics Simulation::metrics() const {
  const auto& m = *model_;
  SimMetrics out;
  out.tts = tts_veh_s_ / 3600.0;
  const double elapsed = step_ * m.scenario.sim.ts;
  out.average_accumulation = step_ > 0 ? accumulation_sum_ / step_ : 0.0;
  out.average_completion_flow = elapsed > 0.0 ? completed_ / (elapsed / 3600.0) : 0.0;
  out.injected = injected_;
  out.completed = completed_;
  out.residual = total_vehicles();
  out.cost = design_cost(m.scenario.network, m.design);
  return out;
}

SimResult Simulation::run() {
  while (step_ < total_steps()) step();
  result_.metrics = metrics();
  return result_;
}

SimResult simulate(const Scenario& scenario, const DesignVector& design, const RunOptions& options) {
  Simulation sim(scenario, design, options);
  return sim.run();
}

double tts(const MixedNetwork& net, const DesignVector& design,
           std::span<const TrajectoryFrame> frames, double ts, double ls) {
  (void)net;
  double total = 0.0;
  for (const auto& f : frames) {
    double v = std::accumulate(f.accumulation.begin(), f.accumulation.end(), 0.0);
    for (const auto& x : f.expressways) {
      if (!design.built(x.direction.from, x.direction.to)) continue;
      double k = std::accumulate(x.mainline.begin(), x.mainline.end(), 0.0) + x.onramp + x.offramp;
      for (const auto& [up, density] : x.connramps_in) {
        if (design.built(up.from, up.to)) k += density;
      }
      v += ls * k;
    }
    total += ts * v;
  }
  return total / 3600.0;
}

}  // namespace mixnet
