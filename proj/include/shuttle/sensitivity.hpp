#pragma once

#include "shuttle/lattice.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/quadrature.hpp"
#include "shuttle/trajectory.hpp"

namespace shuttle {

struct SensitivityOptions {
  QuadratureOptions quadrature{};
  /// OU noise with tau below this many trap periods is evaluated as white noise.
  double white_tau_threshold = 1e-6;
};

/// Second-order energy coefficient G = G1 + G2 of one noise channel.
///
/// G1 collects the width (rho) response and G2 the center-of-mass (q_c) response.
/// For accordion and amplitude noise G1 is the static part and G2 the dynamical
/// part; position noise has only G2, and it is static.
struct SensitivityResult {
  Channel channel = Channel::accordion;
  int n = 0;
  double g1 = 0.0;  // J
  double g2 = 0.0;  // J
  double total = 0.0;
  double g0 = 0.0;     // hbar omega0^2 D
  double error = 0.0;  // quadrature error estimate on total, J

  double static_part() const { return channel == Channel::position ? g2 : g1; }
  double dynamical_part() const { return channel == Channel::position ? 0.0 : g2; }

  double g1_normalized() const { return g1 / g0; }
  double g2_normalized() const { return g2 / g0; }
  double total_normalized() const { return total / g0; }
};

SensitivityResult sensitivity_accordion(const DerivedParams& p, const Trajectory& traj,
                                        const NoiseSpec& spec, int n,
                                        const SensitivityOptions& opts = {});
SensitivityResult sensitivity_amplitude(const DerivedParams& p, const Trajectory& traj,
                                        const NoiseSpec& spec, int n,
                                        const SensitivityOptions& opts = {});
/// Independent of the trajectory (beyond its duration) and of n.
SensitivityResult sensitivity_position(const DerivedParams& p, const Trajectory& traj,
                                       const NoiseSpec& spec, int n,
                                       const SensitivityOptions& opts = {});

/// Dispatches on spec.channel.
SensitivityResult sensitivity(const DerivedParams& p, const Trajectory& traj,
                              const NoiseSpec& spec, int n, const SensitivityOptions& opts = {});

/// White-noise sensitivities of the quintic protocol in closed form.
SensitivityResult white_closed_forms(const DerivedParams& p, double duration, double distance,
                                     int n, Channel channel, double strength);

/// Shuttling time minimizing the white-noise accordion G2 (about 0.63 T0 for any d, D).
double find_g2k_minimum(const DerivedParams& p, double distance, double strength);

/// Time where the white-noise amplitude G1 and G2 are equal:
/// T* = [240 m d^2 / (7 hbar omega0^3 (2n+1))]^(1/4).
double find_amplitude_crossing(const DerivedParams& p, double distance, int n, double strength);

/// Long-time heating rate dE_n/dT of a static trap (valid for T much longer than tau).
double heating_rate(const DerivedParams& p, const NoiseSpec& spec, int n, Channel channel);

/// int_0^T alpha(s) (T - s) cos(beta s) ds, the static-term integral.
QuadratureResult static_correlation_integral(const DerivedParams& p, const CorrelationModel& model,
                                             double duration, double beta,
                                             const SensitivityOptions& opts = {});

}  // namespace shuttle
