#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "shuttle/lattice.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/trajectory.hpp"

namespace shuttle {

/// First-order (in lambda) deviations of the width and center at the final time.
struct FirstOrderResponse {
  double rho = 0.0;      // dimensionless
  double rho_dot = 0.0;  // 1/s
  double qc = 0.0;       // m
  double qc_dot = 0.0;   // m/s
};

/// Second-order energy E^(2) implied by a first-order response, split as (G1, G2) terms.
struct SecondOrderEnergy {
  double width = 0.0;   // rho part
  double center = 0.0;  // q_c part
  double total() const { return width + center; }
};

SecondOrderEnergy second_order_energy(const FirstOrderResponse& r, const DerivedParams& p, int n);

struct ResponseOptions {
  /// Grids coarser than this many points per trap period are rejected.
  double min_points_per_period = 20.0;
};

/// Trapezoid weights of the four convolution integrals on one realization grid.
///
/// Each output is a dot product with the noise values, so a batch of paths on the
/// same grid reuses one set of kernels.
class ResponseKernels {
 public:
  ResponseKernels(const Trajectory& traj, const DerivedParams& p, double duration,
                  Eigen::Index intervals, Channel channel, const ResponseOptions& opts = {});

  FirstOrderResponse apply(const Eigen::Ref<const Eigen::VectorXd>& xi) const;

  Channel channel() const { return channel_; }
  Eigen::Index intervals() const { return rho_.size() - 1; }

 private:
  Channel channel_;
  Eigen::VectorXd rho_;
  Eigen::VectorXd rho_dot_;
  Eigen::VectorXd qc_;
  Eigen::VectorXd qc_dot_;
};

/// Convolution solutions of the linearized Ermakov and Newton equations at t = T.
FirstOrderResponse first_order_response(const Trajectory& traj, const DerivedParams& p,
                                        const NoiseRealization& real, Channel channel,
                                        const ResponseOptions& opts = {});

struct McOptions {
  double points_per_period = 1000.0;
  /// Zero picks the hardware concurrency (or SHUTTLE_WORKERS when set).
  unsigned workers = 0;
};

struct McEstimate {
  double mean = 0.0;       // J
  double std_error = 0.0;  // J, jackknife over paths
  double width_mean = 0.0;
  double center_mean = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

/// Monte-Carlo G from N OU paths; path i is sampled with seed ^ i.
McEstimate estimate_sensitivity_mc(const Trajectory& traj, const DerivedParams& p,
                                   const NoiseSpec& spec, Channel channel, int n,
                                   std::size_t paths, std::uint64_t seed,
                                   const McOptions& opts = {});

struct NonlinearOptions {
  /// Upper bound on the RK4 step in trap periods.
  double max_step_periods = 1e-3;
  /// Extra refinement on top of the bound, used by step-halving checks.
  int refinement = 1;
};

struct NonlinearOutcome {
  FinalState<double> state;
  double energy = 0.0;  // J
  double excess = 0.0;  // energy - hbar omega0 (n + 1/2), computed without cancellation
};

/// Integrates the Ermakov and Newton equations under noisy Omega(t), Q(t) with RK4.
NonlinearOutcome simulate_nonlinear(const Trajectory& traj, const DerivedParams& p,
                                    const NoiseRealization& real, Channel channel, double lambda,
                                    int n, const NonlinearOptions& opts = {});

struct ScalingFit {
  enum class Status { ok, insufficient_signal };
  Status status = Status::ok;
  double exponent = 0.0;
  double exponent_std_error = 0.0;
  double coefficient = 0.0;            // fitted lambda^2 coefficient, J
  double coefficient_std_error = 0.0;  // jackknife over paths, J
  std::vector<double> lambdas;
  std::vector<double> mean_excess;  // J, per lambda
};

struct ScalingOptions {
  McOptions mc{};
  NonlinearOptions nonlinear{};
};

/// Fits log(E - E0) against log(lambda) with the same paths reused at every lambda.
ScalingFit lambda_scaling_check(const Trajectory& traj, const DerivedParams& p,
                                const NoiseSpec& spec, Channel channel, int n,
                                std::span<const double> lambdas, std::size_t paths,
                                std::uint64_t seed, const ScalingOptions& opts = {});

/// Sum with pairwise splitting; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

/// Worker count: SHUTTLE_WORKERS if set, otherwise hardware concurrency.
unsigned default_workers();

}  // namespace shuttle
