#include "shuttle/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"

namespace shuttle {

namespace {

using constants::hbar;

// Strength D when the model acts as a delta correlation, nothing otherwise.
std::optional<double> white_strength(const DerivedParams& p, const CorrelationModel& model,
                                     const SensitivityOptions& opts) {
  if (const auto* w = std::get_if<WhiteNoise>(&model)) return w->strength;
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&model))
    if (ou->correlation_time < opts.white_tau_threshold * p.period) return ou->strength;
  return std::nullopt;
}

/// int_0^T alpha(s) g(s) ds. A delta correlation contributes (D/2) g(0).
template <typename G>
QuadratureResult integrate_correlated(const DerivedParams& p, const CorrelationModel& model,
                                      double duration, G&& g, const SensitivityOptions& opts) {
  if (auto D = white_strength(p, model, opts)) return {0.5 * *D * g(0.0), 0.0, 1, true};

  std::vector<double> breaks{0.0, duration};
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&model)) {
    for (double m : {1.0, 5.0, 20.0, 50.0})
      if (m * ou->correlation_time < duration) breaks.push_back(m * ou->correlation_time);
    // cos(2 omega0 s) completes a cycle every half period
    const double spacing = 0.5 * p.period;
    for (double s = spacing; s < duration; s += spacing) breaks.push_back(s);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const double variance = ou->variance();
    const double tau = ou->correlation_time;
    return integrate_adaptive([&](double s) { return variance * std::exp(-s / tau) * g(s); },
                              std::span<const double>(breaks), opts.quadrature);
  }

  const auto& tab = std::get<TabulatedCorrelation>(model);
  if (duration > tab.max_time())
    throw RangeError("tabulated correlation ends at " + std::to_string(tab.max_time()) +
                     " s, before the transport time");
  for (Eigen::Index i = 1; i < tab.times.size() && tab.times(i) < duration; ++i)
    breaks.push_back(tab.times(i));
  std::sort(breaks.begin(), breaks.end());
  NoiseSpec lookup{Channel::accordion, tab};
  return integrate_adaptive([&](double s) { return correlation(lookup, std::min(s, duration)) * g(s); },
                            std::span<const double>(breaks), opts.quadrature);
}

void require_channel(const NoiseSpec& spec, Channel expected) {
  if (spec.channel != expected)
    throw InvalidArgument("sensitivity: expected " + std::string(to_string(expected)) +
                          " noise, got " + std::string(to_string(spec.channel)));
}

SensitivityResult assemble(Channel channel, int n, double g1, double g2, double g0, double error) {
  SensitivityResult r;
  r.channel = channel;
  r.n = n;
  r.g1 = g1;
  r.g2 = g2;
  r.total = g1 + g2;
  r.g0 = g0;
  r.error = error;
  return r;
}

double normalization(const DerivedParams& p, const CorrelationModel& model) {
  return hbar * p.omega0 * p.omega0 * noise_strength(model);
}

/// m int_0^T alpha(s) cos(omega0 s) int_0^{T-s} F(u) F(u+s) du ds for F(Tx) = d b(x).
QuadratureResult dynamical_integral(const DerivedParams& p, const Trajectory& traj,
                                    const CorrelationModel& model, const Eigen::VectorXd& b,
                                    const SensitivityOptions& opts) {
  const double T = traj.duration();
  const double d = traj.distance();
  const poly::LagOverlap<double> overlap(b);
  const double scale = p.mass * T * d * d;
  auto kernel = [&](double s) { return std::cos(p.omega0 * s) * overlap(s / T); };
  auto r = integrate_correlated(p, model, T, kernel, opts);
  r.value *= scale;
  r.error *= scale;
  return r;
}

// Shape coefficients of b(x) with F(Tx) = d b(x).
Eigen::VectorXd accordion_forcing_shape(const DerivedParams& p, const Trajectory& traj) {
  const double T = traj.duration();
  const Eigen::VectorXd& c = traj.shape();
  Eigen::VectorXd b = -p.omega0 * p.omega0 * c;
  b.head(c.size() - 2) += poly::derivative(c, 2) / (T * T);
  return b;
}

Eigen::VectorXd acceleration_shape(const Trajectory& traj) {
  const double T = traj.duration();
  return poly::derivative(traj.shape(), 2) / (T * T);
}

void check_n(int n) {
  if (n < 0) throw InvalidArgument("sensitivity: mode index n must be non-negative");
}

}  // namespace

QuadratureResult static_correlation_integral(const DerivedParams& p, const CorrelationModel& model,
                                             double duration, double beta,
                                             const SensitivityOptions& opts) {
  if (!(duration > 0.0)) throw InvalidArgument("sensitivity: T must be positive");
  return integrate_correlated(
      p, model, duration, [&](double s) { return (duration - s) * std::cos(beta * s); }, opts);
}

SensitivityResult sensitivity_accordion(const DerivedParams& p, const Trajectory& traj,
                                        const NoiseSpec& spec, int n,
                                        const SensitivityOptions& opts) {
  require_channel(spec, Channel::accordion);
  validate(spec);
  check_n(n);
  const double w = p.omega0;
  const auto stat = static_correlation_integral(p, spec.model, traj.duration(), 2.0 * w, opts);
  const auto dyn = dynamical_integral(p, traj, spec.model, accordion_forcing_shape(p, traj), opts);
  const double prefactor = hbar * w * w * w * (4.0 * n + 2.0);
  return assemble(Channel::accordion, n, prefactor * stat.value, dyn.value,
                  normalization(p, spec.model), prefactor * stat.error + dyn.error);
}

SensitivityResult sensitivity_amplitude(const DerivedParams& p, const Trajectory& traj,
                                        const NoiseSpec& spec, int n,
                                        const SensitivityOptions& opts) {
  require_channel(spec, Channel::amplitude);
  validate(spec);
  check_n(n);
  const double w = p.omega0;
  const auto stat = static_correlation_integral(p, spec.model, traj.duration(), 2.0 * w, opts);
  const auto dyn = dynamical_integral(p, traj, spec.model, acceleration_shape(traj), opts);
  const double prefactor = hbar * w * w * w * (n + 0.5);
  return assemble(Channel::amplitude, n, prefactor * stat.value, dyn.value,
                  normalization(p, spec.model), prefactor * stat.error + dyn.error);
}

SensitivityResult sensitivity_position(const DerivedParams& p, const Trajectory& traj,
                                       const NoiseSpec& spec, int n,
                                       const SensitivityOptions& opts) {
  require_channel(spec, Channel::position);
  validate(spec);
  check_n(n);
  const double w = p.omega0;
  const auto stat = static_correlation_integral(p, spec.model, traj.duration(), w, opts);
  const double prefactor = p.mass * w * w * w * w / (p.wavenumber * p.wavenumber);
  return assemble(Channel::position, n, 0.0, prefactor * stat.value, normalization(p, spec.model),
                  prefactor * stat.error);
}

SensitivityResult sensitivity(const DerivedParams& p, const Trajectory& traj,
                              const NoiseSpec& spec, int n, const SensitivityOptions& opts) {
  switch (spec.channel) {
    case Channel::accordion:
      return sensitivity_accordion(p, traj, spec, n, opts);
    case Channel::amplitude:
      return sensitivity_amplitude(p, traj, spec, n, opts);
    case Channel::position:
      return sensitivity_position(p, traj, spec, n, opts);
  }
  throw InvalidArgument("sensitivity: unknown channel");
}

SensitivityResult white_closed_forms(const DerivedParams& p, double duration, double distance,
                                     int n, Channel channel, double strength) {
  if (!(duration > 0.0)) throw InvalidArgument("white_closed_forms: T must be positive");
  check_n(n);
  const double T = duration;
  const double D = strength;
  const double w = p.omega0;
  const double m = p.mass;
  const double d2 = distance * distance;
  const double level = 2.0 * n + 1.0;
  const double g0 = hbar * w * w * D;
  switch (channel) {
    case Channel::accordion: {
      const double g1 = hbar * w * w * w * D * level * T;
      const double g2 = m * d2 * D *
                        (181.0 / 924.0 * w * w * w * w * T + 60.0 / (7.0 * T * T * T) +
                         10.0 * w * w / (7.0 * T));
      return assemble(channel, n, g1, g2, g0, 0.0);
    }
    case Channel::amplitude: {
      const double g1 = 0.25 * D * hbar * w * w * w * level * T;
      const double g2 = 60.0 * m * d2 * D / (7.0 * T * T * T);
      return assemble(channel, n, g1, g2, g0, 0.0);
    }
    case Channel::position: {
      const double k = p.wavenumber;
      const double g2 = m * w * w * w * w * D * T / (2.0 * k * k);
      return assemble(channel, n, 0.0, g2, g0, 0.0);
    }
  }
  throw InvalidArgument("white_closed_forms: unknown channel");
}

double find_g2k_minimum(const DerivedParams& p, double /*distance*/, double /*strength*/) {
  // G2K / (m d^2 D omega0^3) as a function of x = omega0 T; d and D only scale it.
  auto shape = [](double x) {
    return 181.0 / 924.0 * x + 60.0 / (7.0 * x * x * x) + 10.0 / (7.0 * x);
  };
  // Unimodal on (0, inf): the derivative has a single positive root in x^2.
  double lo = 1.0;
  double hi = 20.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = shape(x1);
  double f2 = shape(x2);
  while (hi - lo > 1e-7 * (hi + lo)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = shape(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = shape(x2);
    }
  }
  return 0.5 * (lo + hi) / p.omega0;
}

double find_amplitude_crossing(const DerivedParams& p, double distance, int n,
                               double /*strength*/) {
  check_n(n);
  const double w = p.omega0;
  return std::pow(240.0 * p.mass * distance * distance / (7.0 * hbar * w * w * w * (2.0 * n + 1.0)),
                  0.25);
}

double heating_rate(const DerivedParams& p, const NoiseSpec& spec, int n, Channel channel) {
  if (spec.channel != channel)
    throw InvalidArgument("heating_rate: noise spec is for " +
                          std::string(to_string(spec.channel)) + " noise");
  validate(spec);
  check_n(n);
  const double w = p.omega0;
  const double pi = constants::pi;
  switch (channel) {
    case Channel::accordion:
      return 4.0 * w * w * pi * p.mode_energy(n) * spectral_density(spec, 2.0 * w);
    case Channel::amplitude:
      return w * w * pi * p.mode_energy(n) * spectral_density(spec, 2.0 * w);
    case Channel::position:
      return p.mass * w * w * w * w * pi * spectral_density(spec, w, p.wavenumber);
  }
  throw InvalidArgument("heating_rate: unknown channel");
}

}  // namespace shuttle
