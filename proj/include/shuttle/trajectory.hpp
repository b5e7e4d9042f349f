#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <string>

#include "shuttle/errors.hpp"
#include "shuttle/lattice.hpp"
#include "shuttle/polynomial.hpp"

namespace shuttle {

/// Anything that can play the role of the classical center-of-mass path q_c(t).
template <typename T>
concept TransportTrajectory = requires(const T& traj, typename T::Scalar t, int order) {
  typename T::Scalar;
  { traj.duration() } -> std::convertible_to<typename T::Scalar>;
  { traj.distance() } -> std::convertible_to<typename T::Scalar>;
  { traj.evaluate(t, order) } -> std::convertible_to<typename T::Scalar>;
};

/// Center-of-mass path q_c(t) = d * sum_j c_j (t/T)^j on [0, T].
///
/// The dimensionless shape c must reproduce the transport boundary conditions
/// p(0) = p'(0) = p''(0) = 0 and p(1) = 1, p'(1) = p''(1) = 0, which keeps the
/// trap path continuous and leaves the atom at rest at both ends.
template <typename Scalar_ = double>
class PolynomialTrajectory {
 public:
  using Scalar = Scalar_;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr double kBoundaryTolerance = 1e-12;

  PolynomialTrajectory(Scalar duration, Scalar distance, Vector shape)
      : duration_(duration), distance_(distance), shape_(std::move(shape)) {
    if (!(duration_ > Scalar(0)) || !std::isfinite(double(duration_)))
      throw InvalidArgument("trajectory: transport time must be positive");
    if (!std::isfinite(double(distance_)))
      throw InvalidArgument("trajectory: distance must be finite");
    if (shape_.size() < 6)
      throw InvalidArgument("trajectory: shape needs at least six coefficients");
    check_boundaries();
  }

  Scalar duration() const { return duration_; }
  Scalar distance() const { return distance_; }
  int degree() const { return static_cast<int>(shape_.size()) - 1; }

  /// Dimensionless shape coefficients c_j.
  const Vector& shape() const { return shape_; }

  /// SI coefficients b_j of q_c(t) = sum_j b_j t^j.
  Vector coefficients() const {
    Vector b(shape_.size());
    Scalar scale = distance_;
    for (Eigen::Index j = 0; j < shape_.size(); ++j) {
      b(j) = shape_(j) * scale;
      scale /= duration_;
    }
    return b;
  }

  /// d^order q_c / dt^order at t, for order 0, 1 or 2.
  Scalar evaluate(Scalar t, int order) const {
    if (order < 0 || order > 2)
      throw UnsupportedOperation("trajectory: only derivatives up to order 2 are supported");
    if (!(t >= Scalar(0) && t <= duration_))
      throw RangeError("trajectory: t = " + std::to_string(double(t)) + " outside [0, T]");
    return evaluate_unchecked(t / duration_, order);
  }

  Scalar position(Scalar t) const { return evaluate(t, 0); }
  Scalar velocity(Scalar t) const { return evaluate(t, 1); }
  Scalar acceleration(Scalar t) const { return evaluate(t, 2); }

  /// Derivative in physical time at scaled time s = t/T, no range check.
  Scalar evaluate_unchecked(Scalar s, int order) const {
    Scalar scale = distance_;
    for (int r = 0; r < order; ++r) scale /= duration_;
    return scale * poly::evaluate_derivative(shape_, s, order);
  }

 private:
  void check_boundaries() const {
    const Scalar tol(kBoundaryTolerance);
    const Scalar targets_start[3] = {0, 0, 0};
    const Scalar targets_end[3] = {1, 0, 0};
    for (int r = 0; r < 3; ++r) {
      const Scalar at0 = poly::evaluate_derivative(shape_, Scalar(0), r);
      const Scalar at1 = poly::evaluate_derivative(shape_, Scalar(1), r);
      if (std::abs(at0 - targets_start[r]) > tol || std::abs(at1 - targets_end[r]) > tol)
        throw InvalidArgument("trajectory: shape violates the boundary condition on derivative " +
                              std::to_string(r));
    }
  }

  Scalar duration_;
  Scalar distance_;
  Vector shape_;
};

using Trajectory = PolynomialTrajectory<double>;

/// Minimal-degree (quintic) transport: q_c = d (10 s^3 - 15 s^4 + 6 s^5).
template <typename Scalar = double>
PolynomialTrajectory<Scalar> design_polynomial(Scalar duration, Scalar distance) {
  if (!(duration > Scalar(0))) throw InvalidArgument("design_polynomial: T must be positive");
  typename PolynomialTrajectory<Scalar>::Vector shape(6);
  shape << 0, 0, 0, 10, -15, 6;
  return PolynomialTrajectory<Scalar>(duration, distance, shape);
}

/// Septic transport that also starts and stops with zero jerk:
/// q_c = d (35 s^4 - 84 s^5 + 70 s^6 - 20 s^7).
template <typename Scalar = double>
PolynomialTrajectory<Scalar> design_septic(Scalar duration, Scalar distance) {
  if (!(duration > Scalar(0))) throw InvalidArgument("design_septic: T must be positive");
  typename PolynomialTrajectory<Scalar>::Vector shape(8);
  shape << 0, 0, 0, 0, 35, -84, 70, -20;
  return PolynomialTrajectory<Scalar>(duration, distance, shape);
}

/// Trap center q0 = q_c + q_c'' / omega0^2 that drives the atom along q_c.
template <TransportTrajectory Traj>
typename Traj::Scalar trap_trajectory(const Traj& traj, const DerivedParams& p,
                                      typename Traj::Scalar t) {
  using Scalar = typename Traj::Scalar;
  const Scalar w2 = Scalar(p.omega0) * Scalar(p.omega0);
  return traj.evaluate(t, 0) + traj.evaluate(t, 2) / w2;
}

/// Accordion forcing B(t) = q_c'' - omega0^2 q_c = omega0^2 (q0 - 2 q_c).
template <TransportTrajectory Traj>
typename Traj::Scalar forcing_kernel_B(const Traj& traj, const DerivedParams& p,
                                       typename Traj::Scalar t) {
  using Scalar = typename Traj::Scalar;
  const Scalar w2 = Scalar(p.omega0) * Scalar(p.omega0);
  return traj.evaluate(t, 2) - w2 * traj.evaluate(t, 0);
}

}  // namespace shuttle
