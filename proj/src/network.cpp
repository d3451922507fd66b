#include "mixnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mixnet/errors.hpp"

namespace mixnet {

namespace {

constexpr int kMfdSamples = 1000;

bool is_cell_multiple(double length, double cell) {
  if (!(cell > 0.0) || !(length > 0.0)) return false;
  const double ratio = length / cell;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

std::string pair_name(int a, int b) {
  return "E" + std::to_string(a) + "," + std::to_string(b);
}

}  // namespace

int CandidateExpressway::cell_count() const {
  return static_cast<int>(std::lround(mainline_length / cell_length));
}

std::optional<std::size_t> MixedNetwork::subregion_index(int id) const {
  for (std::size_t k = 0; k < subregions.size(); ++k) {
    if (subregions[k].id == id) return k;
  }
  return std::nullopt;
}

const SubregionParams& MixedNetwork::subregion(int id) const {
  auto idx = subregion_index(id);
  if (!idx) throw ValidationError("unknown subregion id " + std::to_string(id));
  return subregions[*idx];
}

const BoundaryLink* MixedNetwork::boundary(int from, int to) const {
  for (const auto& b : boundaries) {
    if (b.from == from && b.to == to) return &b;
  }
  return nullptr;
}

const CandidateExpressway* MixedNetwork::candidate(int from, int to) const {
  for (const auto& c : candidates) {
    if (c.origin == from && c.destination == to) return &c;
  }
  return nullptr;
}

std::vector<PairKey> MixedNetwork::candidate_pairs() const {
  std::set<PairKey> keys;
  for (const auto& c : candidates) keys.insert(PairKey::of(c.origin, c.destination));
  return {keys.begin(), keys.end()};
}

double MixedNetwork::pair_cost(PairKey pair) const {
  const CandidateExpressway* c = candidate(pair.lo, pair.hi);
  if (c == nullptr) c = candidate(pair.hi, pair.lo);
  if (c == nullptr) {
    throw ValidationError("no candidate expressway for pair " + pair_name(pair.lo, pair.hi));
  }
  return cost_per_km * c->mainline_length / 1000.0;
}

ValidationReport validate_network(const MixedNetwork& net) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  if (net.subregions.empty()) fail("network has no subregions");

  std::set<int> ids;
  for (const auto& s : net.subregions) {
    const std::string who = "subregion " + std::to_string(s.id);
    if (!ids.insert(s.id).second) fail("duplicate subregion id " + std::to_string(s.id));
    if (!(s.avg_trip_length > 0.0)) fail(who + ": average trip length must be positive");
    if (!(s.n_max > 0.0)) fail(who + ": jam accumulation must be positive");
    if (!(s.c_max > 0.0)) fail(who + ": maximum receiving capacity must be positive");
    if (s.n_max > 0.0) {
      for (int k = 0; k <= kMfdSamples; ++k) {
        const double n = s.n_max * k / kMfdSamples;
        const double p = ((s.mfd[0] * n + s.mfd[1]) * n + s.mfd[2]) * n;
        if (p < 0.0) {
          fail(who + ": production negative at n = " + std::to_string(n));
          break;
        }
      }
    }
  }

  auto known = [&](int id) { return ids.count(id) != 0; };

  std::set<DirectedPair> links;
  for (const auto& b : net.boundaries) {
    const std::string who = "boundary " + std::to_string(b.from) + "->" + std::to_string(b.to);
    if (!known(b.from) || !known(b.to)) fail(who + ": dangling subregion id");
    if (b.from == b.to) fail(who + ": self loop");
    if (!(b.capacity >= 0.0)) fail(who + ": capacity must be non-negative");
    if (!links.insert({b.from, b.to}).second) fail(who + ": duplicate boundary link");
  }
  for (const auto& l : links) {
    if (!links.count(l.reversed())) {
      fail("adjacency asymmetry: " + std::to_string(l.from) + "->" + std::to_string(l.to) +
           " has no reverse link");
    }
  }
  for (int id : ids) {
    const bool has_neighbor = std::any_of(links.begin(), links.end(),
                                          [id](const DirectedPair& l) { return l.from == id; });
    if (!has_neighbor) fail("subregion " + std::to_string(id) + " has no neighbouring subregion");
  }

  std::set<DirectedPair> dirs;
  for (const auto& c : net.candidates) {
    const std::string who = pair_name(c.origin, c.destination);
    if (!known(c.origin) || !known(c.destination)) fail(who + ": dangling subregion id");
    if (c.origin == c.destination) fail(who + ": origin equals destination");
    if (!dirs.insert(c.direction()).second) fail(who + ": duplicate candidate");
    if (!is_cell_multiple(c.mainline_length, c.cell_length)) {
      fail(who + ": mainline length is not a cell multiple");
    }
  }
  for (const auto& c : net.candidates) {
    const CandidateExpressway* twin = net.candidate(c.destination, c.origin);
    if (twin == nullptr) {
      fail("candidate asymmetry: " + pair_name(c.origin, c.destination) + " has no reverse twin");
    } else if (c.origin < c.destination && twin->mainline_length != c.mainline_length) {
      fail("candidate asymmetry: " + pair_name(c.origin, c.destination) +
           " and its twin differ in length");
    }
  }
  if (net.candidates.size() > 64 * 2) fail("too many candidate expressways (max 64 pairs)");

  auto check_fd = [&](const FundamentalDiagram& fd, const char* name) {
    const std::string who = std::string(name) + " fundamental diagram";
    if (!(fd.free_flow_speed > 0.0) || !(fd.capacity >= 0.0) || !(fd.jam_density > 0.0)) {
      fail(who + ": speed and jam density must be positive, capacity non-negative");
      return;
    }
    if (!(fd.critical_density() < fd.jam_density)) {
      fail(who + ": critical density must be below jam density");
    }
  };
  check_fd(net.mainline_fd, "mainline");
  check_fd(net.ramp_fd, "ramp");

  if (!(net.cost_per_km >= 0.0)) fail("unit construction cost must be non-negative");
  return report;
}

void require_valid(const MixedNetwork& net) {
  const auto report = validate_network(net);
  if (report.ok()) return;
  std::ostringstream os;
  os << "invalid network:";
  for (const auto& v : report.violations) os << "\n  " << v;
  throw ValidationError(os.str());
}

DesignVector::DesignVector(std::vector<PairKey> pairs)
    : pairs_(std::move(pairs)), built_(pairs_.size(), 0) {
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end()) {
    throw ValidationError("design vector has duplicate pairs");
  }
}

DesignVector DesignVector::empty_for(const MixedNetwork& net) {
  return DesignVector(net.candidate_pairs());
}

DesignVector DesignVector::full_for(const MixedNetwork& net) {
  DesignVector d = empty_for(net);
  std::fill(d.built_.begin(), d.built_.end(), 1);
  return d;
}

DesignVector DesignVector::from_mask(const MixedNetwork& net, std::uint64_t mask) {
  DesignVector d = empty_for(net);
  if (d.size() < 64 && (mask >> d.size()) != 0) {
    throw ValidationError("design mask has bits beyond the candidate set");
  }
  for (std::size_t k = 0; k < d.size(); ++k) d.built_[k] = (mask >> k) & 1u;
  return d;
}

DesignVector DesignVector::from_bits(const MixedNetwork& net, const std::string& bits) {
  DesignVector d = empty_for(net);
  if (bits.size() != d.size()) {
    throw ParseError("design string has " + std::to_string(bits.size()) + " bits, expected " +
                     std::to_string(d.size()));
  }
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != '0' && bits[k] != '1') throw ParseError("design string must contain only 0/1");
    d.built_[k] = bits[k] == '1';
  }
  return d;
}

std::optional<std::size_t> DesignVector::find(PairKey pair) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), pair);
  if (it == pairs_.end() || *it != pair) return std::nullopt;
  return static_cast<std::size_t>(it - pairs_.begin());
}

bool DesignVector::built(PairKey pair) const {
  auto k = find(pair);
  return k && built_[*k] != 0;
}

void DesignVector::set(PairKey pair, bool value) {
  auto k = find(pair);
  if (!k) throw ValidationError("pair " + pair_name(pair.lo, pair.hi) + " is not a candidate");
  built_[*k] = value ? 1 : 0;
}

std::uint64_t DesignVector::mask() const {
  std::uint64_t m = 0;
  for (std::size_t k = 0; k < built_.size(); ++k) {
    if (built_[k]) m |= std::uint64_t{1} << k;
  }
  return m;
}

std::string DesignVector::bits() const {
  std::string s;
  for (auto b : built_) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t DesignVector::count() const {
  return static_cast<std::size_t>(std::count(built_.begin(), built_.end(), 1));
}

std::vector<DirectedPair> DesignVector::built_directions() const {
  std::vector<DirectedPair> out;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    if (!built_[k]) continue;
    out.push_back({pairs_[k].lo, pairs_[k].hi});
    out.push_back({pairs_[k].hi, pairs_[k].lo});
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void require_matching(const MixedNetwork& net, const DesignVector& design) {
  if (design.pairs() != net.candidate_pairs()) {
    throw ValidationError("design vector does not match the network's candidate set");
  }
}

}  // namespace

double design_cost(const MixedNetwork& net, const DesignVector& design) {
  require_matching(net, design);
  double total = 0.0;
  for (std::size_t k = 0; k < design.size(); ++k) {
    if (design.built_at(k)) total += net.pair_cost(design.pairs()[k]);
  }
  return total;
}

bool is_budget_feasible(const MixedNetwork& net, const DesignVector& design, double budget) {
  return design_cost(net, design) <= budget;
}

std::vector<ConnectingRamp> connecting_ramps(const MixedNetwork& net, const DesignVector& design) {
  require_matching(net, design);
  const auto dirs = design.built_directions();
  std::vector<ConnectingRamp> out;
  for (const auto& up : dirs) {
    for (const auto& down : dirs) {
      if (up.to == down.from && up.from != down.to) out.push_back({up, down});
    }
  }
  return out;
}

std::string render_design_matrix(const MixedNetwork& net, const DesignVector& design) {
  std::vector<int> ids;
  for (const auto& s : net.subregions) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  std::ostringstream os;
  os << "eps";
  for (int j : ids) os << '\t' << j;
  os << '\n';
  for (int i : ids) {
    os << i;
    for (int j : ids) {
      os << '\t';
      if (i == j || net.candidate(i, j) == nullptr) {
        os << 'x';
      } else {
        os << (design.built(i, j) ? '1' : '0');
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mixnet
