#include <doctest.h>

#include <random>

#include "mixnet/expressway.hpp"
#include "support.hpp"

using namespace mixnet;

namespace {

constexpr double kmh = 1.0 / 3.6;
constexpr double vph = 1.0 / 3600.0;
constexpr double per_km = 1e-3;

const FundamentalDiagram kMain{80 * kmh, 6000 * vph, 375 * per_km};
const FundamentalDiagram kRamp{40 * kmh, 3000 * vph, 225 * per_km};

// Oracle triangular diagram, written directly in km and h.
double oracle_demand_vph(double vf_kmh, double c_vph, double k_vpkm) {
  return std::min(vf_kmh * k_vpkm, c_vph);
}
double oracle_supply_vph(double w_kmh, double kj, double c_vph, double k) {
  return std::max(0.0, std::min(w_kmh * (kj - k), c_vph));
}

}  // namespace

TEST_CASE("wave speed defaults to 20 km/h on both diagrams") {
  CHECK(kMain.wave_speed() / kmh == doctest::Approx(20.0));
  CHECK(kRamp.wave_speed() / kmh == doctest::Approx(20.0));
  CHECK(kMain.critical_density() / per_km == doctest::Approx(75.0));
}

TEST_CASE("class demand") {
  CHECK(cell_demand(kMain, 0.0) == 0.0);
  CHECK(cell_demand(kMain, 20 * per_km) / vph == doctest::Approx(1600.0));
  CHECK(cell_demand(kMain, 100 * per_km) / vph == doctest::Approx(6000.0));
  for (int k = 0; k <= 375; k += 5) {
    CHECK(cell_demand(kMain, k * per_km) / vph ==
          doctest::Approx(oracle_demand_vph(80, 6000, k)));
    if (k <= 225) {
      CHECK(cell_demand(kRamp, k * per_km) / vph ==
            doctest::Approx(oracle_demand_vph(40, 3000, k)));
    }
  }
}

TEST_CASE("cell supply") {
  CHECK(cell_supply(kMain, 375 * per_km) == 0.0);
  CHECK(cell_supply(kMain, 50 * per_km) / vph == doctest::Approx(6000.0));
  CHECK(cell_supply(kMain, 300 * per_km) / vph == doctest::Approx(1500.0));
  for (int k = 0; k <= 375; k += 5) {
    CHECK(cell_supply(kMain, k * per_km) / vph ==
          doctest::Approx(oracle_supply_vph(20, 375, 6000, k)));
  }
}

TEST_CASE("cell speed") {
  CHECK(cell_speed(kMain, 0.0) / kmh == doctest::Approx(80.0));
  CHECK(cell_speed(kMain, 75 * per_km) / kmh == doctest::Approx(80.0));
  CHECK(cell_speed(kMain, 300 * per_km) / kmh == doctest::Approx(5.0));
  CHECK(cell_speed(kMain, 375 * per_km) == 0.0);
}

TEST_CASE("on-ramp merge") {
  const double z = cell_supply(kMain, 0.0);
  CHECK(onramp_outflow(0.2, kRamp.capacity, 0.2, z) == 0.2);
  // on-ramp and connecting ramp each 1000 veh/h into 1000 veh/h of supply
  CHECK(onramp_outflow(1000 * vph, kRamp.capacity, 2000 * vph, 1000 * vph) / vph ==
        doctest::Approx(500.0));
  CHECK(onramp_outflow(0.2, kRamp.capacity, 0.2, cell_supply(kMain, kMain.jam_density)) == 0.0);
}

TEST_CASE("mainline flow") {
  const double d = cell_demand(kMain, kMain.critical_density());
  CHECK(mainline_flow(d, kMain.capacity, d, cell_supply(kMain, 0.0)) == doctest::Approx(d));
  CHECK(mainline_flow(d, kMain.capacity, d, 0.0) == 0.0);
  // classes at 2:1 density share 900 veh/h of supply
  const double d1 = cell_demand(kMain, 20 * per_km);
  const double d2 = cell_demand(kMain, 10 * per_km);
  CHECK(mainline_flow(d1, kMain.capacity, d1 + d2, 900 * vph) / vph == doctest::Approx(600.0));
  CHECK(mainline_flow(d2, kMain.capacity, d1 + d2, 900 * vph) / vph == doctest::Approx(300.0));
}

TEST_CASE("off-ramp entry and exit") {
  CHECK(offramp_entry(0.3, kRamp.capacity, 0.3, cell_supply(kRamp, 0.0)) == 0.3);
  CHECK(offramp_entry(0.3, kRamp.capacity, 0.3, cell_supply(kRamp, kRamp.jam_density)) == 0.0);
  CHECK(offramp_entry(4000 * vph, kRamp.capacity, 4000 * vph, 1.0e9) / vph ==
        doctest::Approx(3000.0));
  CHECK(offramp_exit(0.3, kRamp.capacity, 0.3, 1e9) == 0.3);
  CHECK(offramp_exit(0.3, kRamp.capacity, 0.3, 0.0) == 0.0);
  // off-ramp 0.5 and arterial 0.5 share c_i = 0.6
  CHECK(offramp_exit(0.5, kRamp.capacity, 1.0, 0.6) == doctest::Approx(0.3));
}

TEST_CASE("connecting ramp entry") {
  CHECK(connramp_entry(0.2, kRamp.capacity, 0.2, cell_supply(kRamp, 0.0)) == 0.2);
  CHECK(connramp_entry(0.2, kRamp.capacity, 0.2, 0.0) == 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d(2 + rng() % 4);
    double total = 0.0;
    for (auto& x : d) total += (x = u(rng));
    const double z = u(rng);
    double sum = 0.0;
    for (double x : d) {
      const double f = connramp_entry(x, 1e9, total, z);
      CHECK(f == doctest::Approx(std::min(x, x / total * z)));
      sum += f;
    }
    // a binding supply is fully allocated, never exceeded
    CHECK(sum <= z + 1e-12);
    if (z < total) CHECK(sum == doctest::Approx(z));
  }
}

TEST_CASE("density update") {
  CHECK(advance_density(0.05, 1.0, 1.0, 10.0, 500.0) == doctest::Approx(0.05));
  CHECK(advance_density(0.0, 1.0, 0.0, 10.0, 500.0) == doctest::Approx(0.02));
  // outflow clamped at the stored vehicles
  CHECK(advance_density(0.01, 0.0, 10.0, 10.0, 500.0) == 0.0);
}

TEST_CASE("one-cell CFL sweep never exceeds jam density") {
  // Chain of cells fed at capacity into a blocked exit; Ts = Ls / V_f.
  const double ls = 500.0;
  const double ts = ls / kMain.free_flow_speed;
  std::vector<double> k(8, 0.0);
  for (int step = 0; step < 2000; ++step) {
    std::vector<double> f(k.size() + 1, 0.0);
    f[0] = std::min(kMain.capacity, cell_supply(kMain, k[0]));
    for (std::size_t c = 0; c + 1 < k.size(); ++c) {
      const double d = cell_demand(kMain, k[c]);
      f[c + 1] = mainline_flow(d, kMain.capacity, d, cell_supply(kMain, k[c + 1]));
    }
    double before = 0.0, after = 0.0;
    for (std::size_t c = 0; c < k.size(); ++c) {
      before += k[c] * ls;
      k[c] = advance_density(k[c], f[c], f[c + 1], ts, ls);
      CHECK(k[c] <= kMain.jam_density * (1 + 1e-12));
      after += k[c] * ls;
    }
    CHECK(after - before == doctest::Approx(ts * f[0]).epsilon(1e-9));
  }
}
