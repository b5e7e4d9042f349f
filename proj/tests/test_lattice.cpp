#include <doctest.h>

#include <cmath>

#include "shuttle/constants.hpp"
#include "shuttle/lattice.hpp"
#include "support.hpp"

using namespace shuttle;
using testing::paper;
using testing::rel_diff;

TEST_CASE("cesium lattice frequency and Lamb-Dicke ratio") {
  const auto& p = paper();
  CHECK(std::abs(p.omega0 / (2 * constants::pi * 116e3) - 1.0) < 0.01);
  CHECK(std::abs(p.lamb_dicke_ratio - 58.0) < 1.0);
  // Harmonic expansion of a sin^2(kx): hbar omega0 / E_R = 2 sqrt(a / E_R).
  CHECK(rel_diff(p.lamb_dicke_ratio, 2.0 * std::sqrt(850.0)) < 1e-12);
  CHECK(rel_diff(p.period, 2 * constants::pi / p.omega0) < 1e-15);
}

TEST_CASE("depth scaling") {
  auto cfg = testing::cesium();
  const double w = derive_params(cfg).omega0;
  cfg.depth *= 4.0;
  CHECK(rel_diff(derive_params(cfg).omega0, 2.0 * w) < 1e-14);
}

TEST_CASE("invalid lattice configs") {
  auto cfg = testing::cesium();
  auto bad = cfg;
  bad.mass = 0.0;
  CHECK_THROWS_AS(derive_params(bad), InvalidConfig);
  bad = cfg;
  bad.depth = -1.0;
  CHECK_THROWS_AS(derive_params(bad), InvalidConfig);
  bad = cfg;
  bad.wavelength = 0.0;
  CHECK_THROWS_AS(derive_params(bad), InvalidConfig);
  bad = cfg;
  bad.distance = -1e-9;
  CHECK_THROWS_AS(validate(bad), InvalidConfig);
}

TEST_CASE("final energy of an unexcited state") {
  const auto& p = paper();
  const double d = 433e-9;
  for (int n : {0, 1, 4, 17}) {
    FinalState<double> fs;
    fs.qc = d;
    fs.n = n;
    CHECK(final_energy(fs, p, d) == doctest::Approx(constants::hbar * p.omega0 * (n + 0.5)).epsilon(1e-15));
    CHECK(excess_energy(fs, p, d) == 0.0);
  }
}

TEST_CASE("width excitation matches its series") {
  const auto& p = paper();
  const double d = 433e-9;
  FinalState<double> fs;
  fs.rho = 1.01;
  fs.qc = d;
  const double e = final_energy(fs, p, d);
  const double hw = constants::hbar * p.omega0;
  CHECK(e >= hw / 2);
  // (hw/4)(1 + rho^4)/rho^2 around rho = 1 + x: hw/2 + hw x^2 - hw x^3 + O(x^4).
  const double x = 0.01;
  const double series = hw * (x * x - x * x * x + 1.25 * x * x * x * x);
  CHECK(rel_diff(excess_energy(fs, p, d), series) < 1e-5);
  CHECK(rel_diff(excess_energy(fs, p, d), hw * x * x) < 0.011);

  // Direct form of the same expression, fine at this size of excitation.
  const double direct = hw / 4 * (1 + std::pow(1.01, 4)) / (1.01 * 1.01);
  CHECK(rel_diff(e, direct) < 1e-14);
}

TEST_CASE("final energy is even in the velocities and rejects rho <= 0") {
  const auto& p = paper();
  const double d = 433e-9;
  FinalState<double> fs{1.02, 3e3, d + 1e-9, 2e-3, 2};
  FinalState<double> flipped = fs;
  flipped.rho_dot = -fs.rho_dot;
  flipped.qc_dot = -fs.qc_dot;
  CHECK(final_energy(fs, p, d) == final_energy(flipped, p, d));
  // Pure function: repeated calls agree bit for bit.
  CHECK(final_energy(fs, p, d) == final_energy(fs, p, d));
  fs.rho = 0.0;
  CHECK_THROWS_AS(final_energy(fs, p, d), DomainError);
  fs.rho = -0.5;
  CHECK_THROWS_AS(final_energy(fs, p, d), DomainError);
}

TEST_CASE("excess energy templated on long double") {
  const auto& p = paper();
  FinalState<long double> fs;
  fs.rho = 1.0L + 1e-9L;
  const long double e = excess_energy(fs, p, 0.0L);
  const long double hw = constants::hbar * p.omega0;
  CHECK(static_cast<double>(e / (hw * 1e-18L)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("minimal shuttling time") {
  auto cfg = testing::cesium();
  const auto p = derive_params(cfg);
  cfg.distance = constants::pi / p.wavenumber;
  const double t = min_shuttle_time(p, cfg);
  CHECK(std::abs(t / (0.5 * p.period) - 1.0) < 0.1);
  // 6 m d^2 / (T^4 omega0^2 a) = 1 at the bound.
  const double d = *cfg.distance;
  CHECK(6 * p.mass * d * d / (std::pow(t, 4) * p.omega0 * p.omega0 * cfg.depth) ==
        doctest::Approx(1.0).epsilon(1e-13));

  auto doubled = cfg;
  doubled.distance = 2 * d;
  CHECK(rel_diff(min_shuttle_time(p, doubled), std::sqrt(2.0) * t) < 1e-14);
  auto none = cfg;
  none.distance = 0.0;
  CHECK(min_shuttle_time(p, none) == 0.0);
}
