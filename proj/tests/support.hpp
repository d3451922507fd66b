#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mixnet/network.hpp"
#include "mixnet/scenario.hpp"
#include "mixnet/scenario_io.hpp"

namespace mixnet::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(MIXNET_DATA_DIR) / name;
}

inline const Scenario& case_study() {
  static const Scenario sc = load_scenario(data_path("yokohama5.scn"));
  return sc;
}

inline const Scenario& case_study_table6() {
  static const Scenario sc = load_scenario(data_path("yokohama5_table6.scn"));
  return sc;
}

/// Base MFD of the case study.
inline SubregionParams yokohama_subregion(int id, double trip_length) {
  return {id, {1.4877e-7, -2.9815e-3, 15.0}, trip_length, 10000.0, 12000.0 / 3600.0};
}

/// Two adjacent subregions with one 1.5 km candidate pair, constant demand.
inline Scenario two_region_scenario(double q12_veh_h = 1800.0, double horizon = 600.0) {
  Scenario sc;
  sc.name = "two";
  auto& net = sc.network;
  net.subregions = {yokohama_subregion(1, 3000.0), yokohama_subregion(2, 3000.0)};
  net.boundaries = {{1, 2, 4000.0 / 3600.0}, {2, 1, 4000.0 / 3600.0}};
  net.candidates = {{1, 2, 1500.0, 500.0}, {2, 1, 1500.0, 500.0}};
  net.mainline_fd = {80.0 / 3.6, 6000.0 / 3600.0, 0.375};
  net.ramp_fd = {40.0 / 3.6, 3000.0 / 3600.0, 0.225};
  sc.sim.horizon = horizon;
  sc.demand = DemandProfile::constant({1, 2}, {0.0, q12_veh_h / 3600.0, 0.0, 0.0}, horizon);
  return sc;
}

/// Bit strings of the six published schemes, pair order 12 14 15 23 25 34 35 45.
inline const char* const kSchemeBits[6] = {"00000000", "00000100", "10010100",
                                           "00101111", "10101111", "11111111"};

}  // namespace mixnet::test
