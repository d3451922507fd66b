#include "mixnet/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixnet {

namespace {

std::size_t id_position(const std::vector<int>& ids, int id) {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw std::invalid_argument("demand has no subregion " + std::to_string(id));
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

double DemandProfile::rate(int origin, int destination, double t) const {
  const std::size_t o = id_position(ids, origin);
  const std::size_t d = id_position(ids, destination);
  for (const auto& s : segments) {
    if (t >= s.start && t < s.end) return s.rate[o * ids.size() + d];
  }
  return 0.0;
}

double DemandProfile::total_vehicles(double horizon) const {
  double total = 0.0;
  for (const auto& s : segments) {
    const double len = std::max(0.0, std::min(s.end, horizon) - s.start);
    for (double q : s.rate) total += q * len;
  }
  return total;
}

std::vector<std::string> DemandProfile::problems(double horizon) const {
  std::vector<std::string> out;
  const std::size_t cells = ids.size() * ids.size();
  double cursor = 0.0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    const std::string who = "demand segment " + std::to_string(k + 1);
    if (s.rate.size() != cells) out.push_back(who + ": matrix has the wrong number of entries");
    for (double q : s.rate) {
      if (!std::isfinite(q) || q < 0.0) {
        out.push_back(who + ": rates must be finite and non-negative");
        break;
      }
    }
    if (!(s.end > s.start)) out.push_back(who + ": end must be after start");
    if (s.start > cursor) {
      out.push_back("demand gap [" + std::to_string(cursor) + " s, " + std::to_string(s.start) +
                    " s) is not covered");
    } else if (s.start < cursor) {
      out.push_back(who + ": overlaps the previous segment");
    }
    cursor = std::max(cursor, s.end);
  }
  if (cursor < horizon) {
    out.push_back("demand gap [" + std::to_string(cursor) + " s, " + std::to_string(horizon) +
                  " s) is not covered");
  }
  return out;
}

DemandProfile DemandProfile::constant(std::vector<int> ids, std::vector<double> rate,
                                      double horizon) {
  DemandProfile p;
  p.ids = std::move(ids);
  p.segments.push_back({0.0, horizon, std::move(rate)});
  return p;
}

double route_travel_time(const Route& route, const NodeTimes& times) {
  auto lookup = [&](const auto& map, const auto& key, const char* what) {
    auto it = map.find(key);
    if (it == map.end()) {
      throw std::invalid_argument(std::string("no ") + what + " time for route " +
                                  to_string(route));
    }
    return it->second;
  };
  double total = 0.0;
  for (std::size_t k = 0; k < route.nodes.size(); ++k) {
    const RouteNode& node = route.nodes[k];
    const RouteNode* prev = k > 0 ? &route.nodes[k - 1] : nullptr;
    if (node.is_subregion()) {
      total += lookup(times.subregion, node.a, "subregion");
      if (prev != nullptr && prev->is_expressway()) {
        total += lookup(times.offramp, prev->direction(), "off-ramp");
      }
      continue;
    }
    if (prev == nullptr) throw std::invalid_argument("route starts on an expressway");
    if (prev->is_subregion()) {
      total += lookup(times.onramp, node.direction(), "on-ramp");
    } else {
      total += lookup(times.connramp, std::make_pair(prev->direction(), node.direction()),
                      "connecting ramp");
    }
    total += lookup(times.mainline, node.direction(), "mainline");
  }
  return total;
}

std::vector<double> logit_probabilities(std::span<const double> times, double mu) {
  if (times.empty()) throw std::invalid_argument("logit choice over an empty route set");
  if (mu < 0.0) throw std::invalid_argument("logit sensitivity must be non-negative");
  const double best = *std::min_element(times.begin(), times.end());
  std::vector<double> out(times.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    out[k] = std::exp(-mu * (times[k] - best));
    sum += out[k];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::vector<double> split_demand(double demand, std::span<const double> probabilities) {
  std::vector<double> out(probabilities.size());
  double assigned = 0.0;
  for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
    out[k] = probabilities[k] * demand;
    assigned += out[k];
  }
  if (!out.empty()) out.back() = std::max(0.0, demand - assigned);
  return out;
}

}  // namespace mixnet
