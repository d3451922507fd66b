#include <doctest.h>

#include <cmath>
#include <random>

#include "mixnet/errors.hpp"
#include "mixnet/subregion.hpp"
#include "support.hpp"

using namespace mixnet;

namespace {

const SubregionParams kSub = mixnet::test::yokohama_subregion(1, 4800.0);

// Straight-line oracle of the base production polynomial.
double oracle_P(double n) { return 1.4877e-7 * n * n * n - 2.9815e-3 * n * n + 15.0 * n; }

// Analytic maximiser: root of P'(n) = 3 a3 n^2 + 2 a2 n + a1 on the rising branch.
double oracle_argmax() {
  const double a = 3 * 1.4877e-7;
  const double b = 2 * -2.9815e-3;
  const double c = 15.0;
  return (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a);
}

}  // namespace

TEST_CASE("production at reference accumulations") {
  CHECK(production(kSub, 0.0) == 0.0);
  const double nstar = oracle_argmax();
  CHECK(nstar == doctest::Approx(3361).epsilon(1e-3));
  CHECK(production(kSub, nstar) == doctest::Approx(oracle_P(nstar)).epsilon(1e-12));
  CHECK(production(kSub, 3361.0) == doctest::Approx(22384).epsilon(1e-3));
  CHECK(production(kSub, 10000.0) == doctest::Approx(620.0).epsilon(1e-9));
  CHECK_THROWS_AS(production(kSub, -1.0), std::domain_error);
  CHECK_THROWS_AS(production(kSub, 10001.0), std::domain_error);
}

TEST_CASE("production matches the oracle polynomial on a grid") {
  for (int k = 0; k <= 100; ++k) {
    const double n = 100.0 * k;
    CHECK(production(kSub, n) == doctest::Approx(oracle_P(n)).epsilon(1e-12));
  }
}

TEST_CASE("space-mean speed") {
  CHECK(speed(kSub, 0.0) == doctest::Approx(15.0));
  CHECK(speed(kSub, 1e-9) == doctest::Approx(15.0));
  CHECK(speed(kSub, 3361.0) == doctest::Approx(oracle_P(3361.0) / 3361.0));
  CHECK(speed(kSub, 3361.0) == doctest::Approx(6.66).epsilon(1e-3));
  CHECK(speed(kSub, 10000.0) == doctest::Approx(0.062));
}

TEST_CASE("trip completion rate") {
  CHECK(trip_completion_rate(kSub, 0.0, 0.0) == 0.0);
  CHECK(trip_completion_rate(kSub, 3361.0, 3361.0) ==
        doctest::Approx(oracle_P(3361.0) / 4800.0));
  CHECK(trip_completion_rate(kSub, 3361.0, 3361.0) == doctest::Approx(4.663).epsilon(1e-3));
  const double whole = trip_completion_rate(kSub, 4000.0, 4000.0);
  CHECK(trip_completion_rate(kSub, 2000.0, 4000.0) == doctest::Approx(whole / 2));
}

TEST_CASE("class completion rates partition P(n)/L") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2000.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> classes(1 + rng() % 6);
    double total = 0.0;
    for (auto& c : classes) total += (c = u(rng));
    double sum = 0.0;
    for (double c : classes) sum += trip_completion_rate(kSub, c, total);
    CHECK(sum == doctest::Approx(oracle_P(total) / 4800.0).epsilon(1e-12));
  }
}

TEST_CASE("receiving capacity") {
  CHECK(receiving_capacity(kSub, 10000.0) == 0.0);
  CHECK(receiving_capacity(kSub, 0.0) == doctest::Approx(kSub.c_max));
  CHECK(receiving_capacity(kSub, 5000.0) == doctest::Approx(kSub.c_max / 2));
}

TEST_CASE("transfer to a neighbouring subregion") {
  CHECK(transfer_to_subregion(2.0, 1e9, 2.0, 1e9) == 2.0);
  CHECK(transfer_to_subregion(2.0, 1.0, 2.0, 1e9) == 1.0);
  // two equal competitors share c_j = 1
  CHECK(transfer_to_subregion(1.0, 10.0, 2.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("transfer onto an on-ramp") {
  const double cr = 3000.0 / 3600.0;
  CHECK(transfer_to_onramp(0.5, cr, 0.5, cr) == 0.5);
  CHECK(transfer_to_onramp(2 * cr, cr, 2 * cr, cr) == doctest::Approx(cr));
  CHECK(transfer_to_onramp(0.5, cr, 0.5, 0.0) == 0.0);
}

TEST_CASE("transfers respect the min structure") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double m = u(rng);
    const double total = m + u(rng);
    const double cap = u(rng);
    const double supply = u(rng);
    const double f = transfer_to_subregion(m, cap, total, supply);
    CHECK(f >= 0.0);
    CHECK(f <= m);
    CHECK(f <= cap);
    CHECK(f <= m / total * supply + 1e-15);
  }
}

TEST_CASE("accumulation update cases") {
  // internal trips in balance
  CHECK(advance_accumulation(100.0, 1.0, 1.0, 10.0) == doctest::Approx(100.0));
  // pure inflow
  CHECK(advance_accumulation(0.0, 1.0, 0.0, 10.0) == doctest::Approx(10.0));
  // off-ramp inflow 0.5, completion 0.2
  CHECK(advance_accumulation(50.0, 0.5, 0.2, 10.0) == doctest::Approx(53.0));
  // an outflow larger than the stock can support is clamped, never negative
  CHECK(advance_accumulation(1.0, 0.0, 1.0, 10.0) == 0.0);
}

TEST_CASE("outflow clamp") {
  CHECK(clamp_outflow(5.0, 10.0, 10.0) == 1.0);
  CHECK(clamp_outflow(0.5, 10.0, 10.0) == 0.5);
  CHECK(clamp_outflow(0.5, 0.0, 10.0) == 0.0);
}
