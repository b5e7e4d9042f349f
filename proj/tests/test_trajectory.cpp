#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "shuttle/constants.hpp"
#include "shuttle/trajectory.hpp"
#include "support.hpp"

using namespace shuttle;
using testing::paper;
using testing::rel_diff;

namespace {

// Solve the six boundary conditions for a quintic directly.
Eigen::Matrix<double, 6, 1> quintic_from_boundary_solve() {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs;
  for (int j = 0; j < 6; ++j) {
    A(0, j) = j == 0;
    A(1, j) = j == 1;
    A(2, j) = j == 2 ? 2.0 : 0.0;
    A(3, j) = 1.0;
    A(4, j) = j;
    A(5, j) = j * (j - 1.0);
  }
  rhs << 0, 0, 0, 1, 0, 0;
  return A.fullPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("quintic coefficients match a direct boundary solve") {
  const auto oracle = quintic_from_boundary_solve();
  const auto traj = design_polynomial(1.0, 1.0);
  REQUIRE(traj.degree() == 5);
  for (int j = 0; j < 6; ++j) CHECK(std::abs(traj.shape()(j) - oracle(j)) < 1e-12);
  CHECK(traj.shape()(3) == 10.0);
  CHECK(traj.shape()(4) == -15.0);
  CHECK(traj.shape()(5) == 6.0);
}

TEST_CASE("boundary conditions hold in physical units") {
  const auto& p = paper();
  const double d = 433e-9;
  for (double T_over : {0.1, 0.63, 1.0, 3.0, 100.0}) {
    const double T = T_over * p.period;
    for (const auto& traj : {design_polynomial(T, d), design_septic(T, d)}) {
      CHECK(std::abs(traj.position(0.0)) <= 1e-12 * d);
      CHECK(std::abs(traj.velocity(0.0)) <= 1e-12 * d / T);
      CHECK(std::abs(traj.acceleration(0.0)) <= 1e-12 * d / (T * T));
      CHECK(std::abs(traj.position(T) - d) <= 1e-12 * d);
      CHECK(std::abs(traj.velocity(T)) <= 1e-12 * d / T);
      CHECK(std::abs(traj.acceleration(T)) <= 1e-12 * d / (T * T));
    }
  }
}

TEST_CASE("trajectory values at landmarks") {
  const double T = 2e-6, d = 433e-9;
  const auto traj = design_polynomial(T, d);
  CHECK(traj.position(T) == doctest::Approx(d).epsilon(1e-15));
  CHECK(traj.acceleration(0.0) == 0.0);
  CHECK(rel_diff(traj.velocity(T / 2), 15.0 / 8.0 * d / T) < 1e-14);
  CHECK(rel_diff(traj.position(T / 2), d / 2) < 1e-15);

  const auto zero = design_polynomial(T, 0.0);
  CHECK(zero.coefficients().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SI coefficients reproduce the scaled shape") {
  const double T = 3e-6, d = 4e-7;
  const auto traj = design_septic(T, d);
  const Eigen::VectorXd b = traj.coefficients();
  for (double t : {0.0, 0.3e-6, 1.7e-6, 3e-6})
    CHECK(rel_diff(poly::evaluate(b, t), traj.position(t)) < 1e-13);
}

TEST_CASE("antisymmetry about the midpoint") {
  const double T = 1.3e-6, d = 433e-9;
  const auto traj = design_polynomial(T, d);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, T);
  for (int i = 0; i < 200; ++i) {
    const double t = u(gen);
    CHECK(std::abs(traj.position(t) + traj.position(T - t) - d) < 1e-15 * d * 4);
    CHECK(std::abs(traj.velocity(t) - traj.velocity(T - t)) < 1e-12 * d / T);
    CHECK(std::abs(traj.acceleration(t) + traj.acceleration(T - t)) < 1e-11 * d / (T * T));
  }
}

TEST_CASE("derivatives agree with finite differences") {
  const double T = 1.0, d = 1.0;
  const auto traj = design_polynomial(T, d);
  const double h = 1e-4;
  for (double t : {0.1, 0.25, 0.5, 0.77, 0.9}) {
    const double fd1 = (traj.position(t + h) - traj.position(t - h)) / (2 * h);
    const double fd2 =
        (traj.position(t + h) - 2 * traj.position(t) + traj.position(t - h)) / (h * h);
    CHECK(std::abs(fd1 - traj.velocity(t)) < 1e-7);
    CHECK(std::abs(fd2 - traj.acceleration(t)) < 1e-5);
  }
}

TEST_CASE("trap trajectory and accordion forcing") {
  const auto& p = paper();
  const double d = testing::cesium().transport_distance();
  const double T = p.period;
  const auto traj = design_polynomial(T, d);
  CHECK(trap_trajectory(traj, p, 0.0) == 0.0);
  CHECK(rel_diff(trap_trajectory(traj, p, T), d) < 1e-14);
  CHECK(rel_diff(trap_trajectory(traj, p, T / 2), d / 2) < 1e-13);

  // s = 1/4: p = 106/1024 and p'' = 45/8, with omega0^2 T0^2 = 4 pi^2.
  const double q0 = d * (106.0 / 1024.0 + 45.0 / 8.0 / (4 * constants::pi * constants::pi));
  CHECK(rel_diff(trap_trajectory(traj, p, T / 4), q0) < 1e-12);
  CHECK(rel_diff(q0, 1.06517367602217e-7) < 1e-9);

  CHECK(forcing_kernel_B(traj, p, 0.0) == 0.0);
  CHECK(rel_diff(forcing_kernel_B(traj, p, T), -p.omega0 * p.omega0 * d) < 1e-14);
}

TEST_CASE("forcing B = omega0^2 (q0 - 2 q_c) and the Newton residual vanish at random times") {
  const auto& p = paper();
  const double d = 433e-9;
  const double w2 = p.omega0 * p.omega0;
  std::mt19937_64 gen(20200915);
  for (double T_over : {0.3, 1.0, 7.0}) {
    const double T = T_over * p.period;
    const auto traj = design_polynomial(T, d);
    std::uniform_real_distribution<double> u(0.0, T);
    double worst_identity = 0.0, worst_residual = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = u(gen);
      const double q0 = trap_trajectory(traj, p, t);
      const double B = forcing_kernel_B(traj, p, t);
      const double scale = w2 * d + std::abs(traj.acceleration(t));
      worst_identity = std::max(worst_identity, std::abs(B - w2 * (q0 - 2 * traj.position(t))) / scale);
      // Newton's equation for the atom in a trap centred at q0.
      const double residual = traj.acceleration(t) + w2 * (traj.position(t) - q0);
      worst_residual = std::max(worst_residual, std::abs(residual) / scale);
    }
    CHECK(worst_identity < 1e-12);
    CHECK(worst_residual < 1e-12);
  }
}

TEST_CASE("B and -omega0^2 q0 differ by 2 q_c'' and agree where the acceleration vanishes") {
  const auto& p = paper();
  const double d = 433e-9, T = p.period;
  const double w2 = p.omega0 * p.omega0;
  const auto traj = design_polynomial(T, d);
  for (double t : {0.0, T / 2, T})
    CHECK(std::abs(forcing_kernel_B(traj, p, t) + w2 * trap_trajectory(traj, p, t)) <= 1e-12 * w2 * d);
  for (int i = 1; i < 100; ++i) {
    const double t = T * i / 100.0;
    const double gap = forcing_kernel_B(traj, p, t) + w2 * trap_trajectory(traj, p, t);
    CHECK(std::abs(gap - 2 * traj.acceleration(t)) <= 1e-12 * (w2 * d + std::abs(traj.acceleration(t))));
  }
}

TEST_CASE("trajectory errors") {
  CHECK_THROWS_AS(design_polynomial(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(design_polynomial(-1.0, 1.0), InvalidArgument);
  const auto traj = design_polynomial(1.0, 1.0);
  CHECK_THROWS_AS(traj.evaluate(1.0 + 1e-9, 0), RangeError);
  CHECK_THROWS_AS(traj.evaluate(-1e-12, 1), RangeError);
  CHECK_THROWS_AS(traj.evaluate(0.5, 3), UnsupportedOperation);

  Eigen::VectorXd bad(6);
  bad << 0, 0, 0, 10, -15, 6.001;
  CHECK_THROWS_AS(Trajectory(1.0, 1.0, bad), InvalidArgument);
}

TEST_CASE("trajectory in long double") {
  const auto traj = design_polynomial<long double>(1.0L, 1.0L);
  CHECK(static_cast<double>(traj.velocity(0.5L)) == doctest::Approx(15.0 / 8.0).epsilon(1e-18));
  static_assert(TransportTrajectory<PolynomialTrajectory<long double>>);
}
