#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Static topology of a mixed arterial/expressway network. All quantities are
// SI: vehicles, metres, seconds. Subregions are referred to by their external
// integer id everywhere in this header; the simulator maps ids to indices.

namespace mixnet {

struct SubregionParams {
  int id = 0;
  // Production P(n) = a3 n^3 + a2 n^2 + a1 n  [veh m/s]
  std::array<double, 3> mfd{0.0, 0.0, 0.0};  // {a3, a2, a1}
  double avg_trip_length = 0.0;               // m
  double n_max = 0.0;                         // veh
  double c_max = 0.0;                         // veh/s

  bool operator==(const SubregionParams&) const = default;
};

struct BoundaryLink {
  int from = 0;
  int to = 0;
  double capacity = 0.0;  // veh/s

  bool operator==(const BoundaryLink&) const = default;
};

/// Triangular fundamental diagram.
struct FundamentalDiagram {
  double free_flow_speed = 0.0;  // m/s
  double capacity = 0.0;         // veh/s
  double jam_density = 0.0;      // veh/m

  double critical_density() const { return capacity / free_flow_speed; }
  double wave_speed() const { return capacity / (jam_density - critical_density()); }

  bool operator==(const FundamentalDiagram&) const = default;
};

/// Ordered pair of subregion ids naming one travel direction of an expressway.
struct DirectedPair {
  int from = 0;
  int to = 0;
  auto operator<=>(const DirectedPair&) const = default;
  DirectedPair reversed() const { return {to, from}; }
};

/// Unordered candidate pair, normalised so lo < hi.
struct PairKey {
  int lo = 0;
  int hi = 0;
  auto operator<=>(const PairKey&) const = default;
  static PairKey of(int a, int b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }
};

struct CandidateExpressway {
  int origin = 0;
  int destination = 0;
  double mainline_length = 0.0;  // m
  double cell_length = 0.0;      // m

  DirectedPair direction() const { return {origin, destination}; }
  /// Number of mainline cells; only meaningful once validated.
  int cell_count() const;

  bool operator==(const CandidateExpressway&) const = default;
};

struct MixedNetwork {
  std::vector<SubregionParams> subregions;
  std::vector<BoundaryLink> boundaries;
  std::vector<CandidateExpressway> candidates;
  FundamentalDiagram mainline_fd;
  FundamentalDiagram ramp_fd;
  double cost_per_km = 5e6;  // currency per km, both directions together

  std::optional<std::size_t> subregion_index(int id) const;
  const SubregionParams& subregion(int id) const;
  const BoundaryLink* boundary(int from, int to) const;
  const CandidateExpressway* candidate(int from, int to) const;

  /// Unordered candidate pairs sorted by (lo, hi). This is the bit order of
  /// design strings.
  std::vector<PairKey> candidate_pairs() const;

  /// Construction cost lambda of one pair (both directions).
  double pair_cost(PairKey pair) const;

  bool operator==(const MixedNetwork&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_network(const MixedNetwork& net);

/// Throws ValidationError listing every violation.
void require_valid(const MixedNetwork& net);

/// Symmetric 0/1 build decision, one entry per unordered candidate pair.
class DesignVector {
 public:
  DesignVector() = default;
  explicit DesignVector(std::vector<PairKey> pairs);

  static DesignVector empty_for(const MixedNetwork& net);
  static DesignVector full_for(const MixedNetwork& net);
  /// Bit k of mask is pair k in candidate_pairs() order.
  static DesignVector from_mask(const MixedNetwork& net, std::uint64_t mask);
  /// String of '0'/'1', character k is pair k.
  static DesignVector from_bits(const MixedNetwork& net, const std::string& bits);

  const std::vector<PairKey>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  bool built(PairKey pair) const;
  bool built(int from, int to) const { return built(PairKey::of(from, to)); }
  bool built_at(std::size_t k) const { return built_[k] != 0; }
  void set(PairKey pair, bool value);
  void set_at(std::size_t k, bool value) { built_.at(k) = value ? 1 : 0; }

  std::uint64_t mask() const;
  std::string bits() const;
  std::size_t count() const;
  std::vector<DirectedPair> built_directions() const;

  bool operator==(const DesignVector&) const = default;

 private:
  std::optional<std::size_t> find(PairKey pair) const;

  std::vector<PairKey> pairs_;
  std::vector<std::uint8_t> built_;
};

/// Total construction cost of the built pairs.
double design_cost(const MixedNetwork& net, const DesignVector& design);

bool is_budget_feasible(const MixedNetwork& net, const DesignVector& design, double budget);

struct ConnectingRamp {
  DirectedPair upstream;    // E_hi
  DirectedPair downstream;  // E_ij
  auto operator<=>(const ConnectingRamp&) const = default;
};

/// Every (E_hi, E_ij) with both built and h != j, sorted.
std::vector<ConnectingRamp> connecting_ramps(const MixedNetwork& net, const DesignVector& design);

/// Fig-5 style matrix: 'x' outside the candidate set, otherwise '0'/'1'.
std::string render_design_matrix(const MixedNetwork& net, const DesignVector& design);

}  // namespace mixnet
