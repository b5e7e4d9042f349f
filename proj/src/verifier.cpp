#include "shuttle/verifier.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/parallel.hpp"

namespace shuttle {

namespace {

using constants::hbar;

Eigen::Index intervals_for(double duration, const DerivedParams& p, double points_per_period) {
  return std::max<Eigen::Index>(
      2, static_cast<Eigen::Index>(std::ceil(points_per_period * duration / p.period)));
}

void check_same_duration(const Trajectory& traj, double duration) {
  if (std::abs(traj.duration() - duration) > 1e-12 * traj.duration())
    throw InvalidArgument("noise realization and trajectory cover different transport times");
}

struct Jackknife {
  double mean = 0.0;
  double std_error = 0.0;
};

// Leave-one-out jackknife of the sample mean.
Jackknife jackknife_mean(std::span<const double> values) {
  const std::size_t n = values.size();
  Jackknife out;
  const double sum = pairwise_sum(values);
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> deviations(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double loo = (sum - values[i]) / static_cast<double>(n - 1);
    deviations[i] = (loo - out.mean) * (loo - out.mean);
  }
  out.std_error = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) *
                            pairwise_sum(deviations));
  return out;
}

// Ordinary least squares y = slope x + intercept.
std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// Exponent and fixed-exponent lambda^2 coefficient from per-lambda mean excess energies.
std::pair<double, double> scaling_statistics(std::span<const double> log_lambda,
                                             std::span<const double> mean_excess) {
  std::vector<double> y(mean_excess.size());
  double log_coefficient = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = std::log(mean_excess[j]);
    log_coefficient += y[j] - 2.0 * log_lambda[j];
  }
  log_coefficient /= static_cast<double>(y.size());
  return {fit_line(log_lambda, y).first, std::exp(log_coefficient)};
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

unsigned default_workers() {
  if (const char* env = std::getenv("SHUTTLE_WORKERS")) {
    const int requested = std::atoi(env);
    if (requested > 0) return static_cast<unsigned>(requested);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SecondOrderEnergy second_order_energy(const FirstOrderResponse& r, const DerivedParams& p, int n) {
  const double w = p.omega0;
  SecondOrderEnergy e;
  e.width = hbar * (2.0 * n + 1.0) * (w * r.rho * r.rho + r.rho_dot * r.rho_dot / (4.0 * w));
  e.center = 0.5 * p.mass * (w * w * r.qc * r.qc + r.qc_dot * r.qc_dot);
  return e;
}

ResponseKernels::ResponseKernels(const Trajectory& traj, const DerivedParams& p, double duration,
                                 Eigen::Index intervals, Channel channel,
                                 const ResponseOptions& opts)
    : channel_(channel) {
  check_same_duration(traj, duration);
  if (intervals < 1) throw InvalidArgument("response: grid needs at least one interval");
  const double points_per_period = static_cast<double>(intervals) * p.period / duration;
  if (points_per_period < opts.min_points_per_period)
    throw ResolutionError("response: " + std::to_string(points_per_period) +
                          " grid points per trap period, need at least " +
                          std::to_string(opts.min_points_per_period));

  const double w = p.omega0;
  const double h = duration / static_cast<double>(intervals);
  const Eigen::Index size = intervals + 1;
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(size, h);
  weights(0) = weights(size - 1) = 0.5 * h;
  Eigen::VectorXd lag(size);
  for (Eigen::Index i = 0; i < size; ++i)
    lag(i) = duration - (i == intervals ? duration : static_cast<double>(i) * h);

  const Eigen::ArrayXd sin1 = (w * lag).array().sin();
  const Eigen::ArrayXd cos1 = (w * lag).array().cos();
  const Eigen::ArrayXd sin2 = (2.0 * w * lag).array().sin();
  const Eigen::ArrayXd cos2 = (2.0 * w * lag).array().cos();

  auto forcing = [&](auto&& f) {
    Eigen::ArrayXd out(size);
    for (Eigen::Index i = 0; i < size; ++i)
      out(i) = f(std::min(duration, duration - lag(i)));
    return out;
  };

  switch (channel) {
    case Channel::accordion: {
      const Eigen::ArrayXd B = forcing([&](double t) { return forcing_kernel_B(traj, p, t); });
      rho_ = weights.array() * (-w * sin2);
      rho_dot_ = weights.array() * (-2.0 * w * w * cos2);
      qc_ = weights.array() * B * sin1 / w;
      qc_dot_ = weights.array() * B * cos1;
      break;
    }
    case Channel::amplitude: {
      const Eigen::ArrayXd acc = forcing([&](double t) { return traj.acceleration(t); });
      rho_ = weights.array() * (-0.5 * w * sin2);
      rho_dot_ = weights.array() * (-w * w * cos2);
      qc_ = weights.array() * acc * sin1 / w;
      qc_dot_ = weights.array() * acc * cos1;
      break;
    }
    case Channel::position: {
      const double k = p.wavenumber;
      rho_ = Eigen::VectorXd::Zero(size);
      rho_dot_ = Eigen::VectorXd::Zero(size);
      qc_ = weights.array() * (w / k) * sin1;
      qc_dot_ = weights.array() * (w * w / k) * cos1;
      break;
    }
  }
}

FirstOrderResponse ResponseKernels::apply(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  if (xi.size() != rho_.size())
    throw InvalidArgument("response: realization does not match the kernel grid");
  FirstOrderResponse r;
  if (channel_ != Channel::position) {
    r.rho = rho_.dot(xi);
    r.rho_dot = rho_dot_.dot(xi);
  }
  r.qc = qc_.dot(xi);
  r.qc_dot = qc_dot_.dot(xi);
  return r;
}

FirstOrderResponse first_order_response(const Trajectory& traj, const DerivedParams& p,
                                        const NoiseRealization& real, Channel channel,
                                        const ResponseOptions& opts) {
  ResponseKernels kernels(traj, p, real.duration, real.intervals(), channel, opts);
  return kernels.apply(real.values);
}

McEstimate estimate_sensitivity_mc(const Trajectory& traj, const DerivedParams& p,
                                   const NoiseSpec& spec, Channel channel, int n,
                                   std::size_t paths, std::uint64_t seed, const McOptions& opts) {
  if (!std::holds_alternative<OrnsteinUhlenbeck>(spec.model))
    throw InvalidArgument("Monte-Carlo estimate needs Ornstein-Uhlenbeck noise");
  if (paths < 100) throw InvalidArgument("Monte-Carlo estimate needs at least 100 paths");
  if (n < 0) throw InvalidArgument("mode index n must be non-negative");
  validate(spec);

  const double T = traj.duration();
  const Eigen::Index intervals = intervals_for(T, p, opts.points_per_period);
  const ResponseKernels kernels(traj, p, T, intervals, channel);

  std::vector<double> width(paths), center(paths), total(paths);
  parallel_for(paths, opts.workers ? opts.workers : default_workers(), [&](std::size_t i) {
    const auto real = sample_ou_path(spec, T, intervals, path_seed(seed, i));
    const auto e = second_order_energy(kernels.apply(real.values), p, n);
    width[i] = e.width;
    center[i] = e.center;
    total[i] = e.total();
  });

  McEstimate est;
  const auto jk = jackknife_mean(total);
  est.mean = jk.mean;
  est.std_error = jk.std_error;
  est.width_mean = pairwise_sum(width) / static_cast<double>(paths);
  est.center_mean = pairwise_sum(center) / static_cast<double>(paths);
  est.paths = paths;
  est.seed = seed;
  return est;
}

NonlinearOutcome simulate_nonlinear(const Trajectory& traj, const DerivedParams& p,
                                    const NoiseRealization& real, Channel channel, double lambda,
                                    int n, const NonlinearOptions& opts) {
  check_same_duration(traj, real.duration);
  if (n < 0) throw InvalidArgument("mode index n must be non-negative");
  const double T = traj.duration();
  const double w = p.omega0;
  const double w2 = w * w;
  const double k = p.wavenumber;
  const Eigen::Index cells = real.intervals();
  const double h_grid = real.step();
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(h_grid / (opts.max_step_periods * p.period)))) *
      std::max(1, opts.refinement);
  const double h = h_grid / substeps;

  for (Eigen::Index i = 0; i <= cells; ++i)
    if (channel == Channel::accordion && !(1.0 + lambda * real.values(i) > 0.0))
      throw SingularityError("accordion noise: 1 + lambda xi crossed zero at t = " +
                             std::to_string(real.time(i)));

  // State holds deviations from the noiseless protocol: (rho - 1, rho', q_c - q_c0, q_c' - q_c0').
  using State = Eigen::Vector4d;
  auto rhs = [&](double t, double xi, const State& y) {
    const double s = std::clamp(t / T, 0.0, 1.0);
    const double qc0 = traj.evaluate_unchecked(s, 0);
    const double acc0 = traj.evaluate_unchecked(s, 2);
    const double shift = acc0 / w2;  // q0 - q_c0
    const double lx = lambda * xi;
    double omega2_excess = 0.0;  // Omega^2 - omega0^2
    double target = shift;       // Q - q_c0
    switch (channel) {
      case Channel::accordion:
        omega2_excess = w2 * lx * (2.0 + lx);
        target = shift - (qc0 + shift) * lx / (1.0 + lx);
        break;
      case Channel::amplitude:
        omega2_excess = w2 * lx;
        break;
      case Channel::position:
        target = shift + lx / k;
        break;
    }
    const double omega2 = w2 + omega2_excess;
    const double rho = 1.0 + y(0);
    // omega0^2 / rho^3 - Omega^2 rho, grouped to avoid cancellation near rho = 1
    const double ermakov = -omega2_excess * rho -
                           w2 * y(0) * (4.0 + y(0) * (6.0 + y(0) * (4.0 + y(0)))) /
                               (rho * rho * rho);
    const double newton = omega2 * (target - y(2)) - acc0;
    return State(y(1), ermakov, y(3), newton);
  };

  State y = State::Zero();
  for (Eigen::Index i = 0; i < cells; ++i) {
    const double t0 = real.time(i);
    const double x0 = real.values(i);
    const double dx = real.values(i + 1) - real.values(i);
    for (int j = 0; j < substeps; ++j) {
      const double a = static_cast<double>(j) / substeps;
      const double b = static_cast<double>(j + 1) / substeps;
      const double m = 0.5 * (a + b);
      const double ta = t0 + a * h_grid;
      const State k1 = rhs(ta, x0 + a * dx, y);
      const State k2 = rhs(ta + 0.5 * h, x0 + m * dx, y + 0.5 * h * k1);
      const State k3 = rhs(ta + 0.5 * h, x0 + m * dx, y + 0.5 * h * k2);
      const State k4 = rhs(ta + h, x0 + b * dx, y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!(1.0 + y(0) > 0.0) || !y.allFinite())
        throw SingularityError("Ermakov equation: rho reached zero at t = " +
                               std::to_string(ta + h));
    }
  }

  NonlinearOutcome out;
  out.state.rho = 1.0 + y(0);
  out.state.rho_dot = y(1);
  out.state.qc = traj.evaluate_unchecked(1.0, 0) + y(2);
  out.state.qc_dot = traj.evaluate_unchecked(1.0, 1) + y(3);
  out.state.n = n;
  const double dq = traj.evaluate_unchecked(1.0, 0) - traj.distance() + y(2);
  out.excess = excess_energy_from_deviation(y(0), y(1), dq, out.state.qc_dot, n, p);
  out.energy = p.mode_energy(n) + out.excess;
  return out;
}

ScalingFit lambda_scaling_check(const Trajectory& traj, const DerivedParams& p,
                                const NoiseSpec& spec, Channel channel, int n,
                                std::span<const double> lambdas, std::size_t paths,
                                std::uint64_t seed, const ScalingOptions& opts) {
  if (!std::holds_alternative<OrnsteinUhlenbeck>(spec.model))
    throw InvalidArgument("lambda scaling needs Ornstein-Uhlenbeck noise");
  if (lambdas.size() < 2) throw InvalidArgument("lambda scaling needs at least two lambdas");
  if (paths < 2) throw InvalidArgument("lambda scaling needs at least two paths");
  for (double l : lambdas)
    if (!(l >= 1e-4 * (1 - 1e-12) && l <= 1e-2 * (1 + 1e-12)))
      throw InvalidArgument("lambda scaling: lambda grid must lie in [1e-4, 1e-2]");

  const double T = traj.duration();
  const Eigen::Index intervals = intervals_for(T, p, opts.mc.points_per_period);
  const std::size_t L = lambdas.size();
  Eigen::MatrixXd excess(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(L));

  parallel_for(paths, opts.mc.workers ? opts.mc.workers : default_workers(), [&](std::size_t i) {
    const auto real = sample_ou_path(spec, T, intervals, path_seed(seed, i));
    for (std::size_t j = 0; j < L; ++j)
      excess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          simulate_nonlinear(traj, p, real, channel, lambdas[j], n, opts.nonlinear).excess;
  });

  ScalingFit fit;
  fit.lambdas.assign(lambdas.begin(), lambdas.end());
  std::vector<double> sums(L), log_lambda(L);
  for (std::size_t j = 0; j < L; ++j) {
    std::vector<double> column(paths);
    for (std::size_t i = 0; i < paths; ++i)
      column[i] = excess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    sums[j] = pairwise_sum(column);
    fit.mean_excess.push_back(sums[j] / static_cast<double>(paths));
    log_lambda[j] = std::log(lambdas[j]);
  }

  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * p.mode_energy(n);
  for (double e : fit.mean_excess) {
    if (!(e > floor)) {
      fit.status = ScalingFit::Status::insufficient_signal;
      return fit;
    }
  }

  std::tie(fit.exponent, fit.coefficient) = scaling_statistics(log_lambda, fit.mean_excess);

  // Jackknife over paths for both statistics.
  std::vector<double> loo_exponent(paths), loo_coefficient(paths), loo_mean(L);
  for (std::size_t i = 0; i < paths; ++i) {
    for (std::size_t j = 0; j < L; ++j)
      loo_mean[j] = (sums[j] - excess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) /
                    static_cast<double>(paths - 1);
    std::tie(loo_exponent[i], loo_coefficient[i]) = scaling_statistics(log_lambda, loo_mean);
  }
  auto spread = [&](const std::vector<double>& v) {
    const double mean = pairwise_sum(v) / static_cast<double>(paths);
    std::vector<double> sq(paths);
    for (std::size_t i = 0; i < paths; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return std::sqrt(static_cast<double>(paths - 1) / static_cast<double>(paths) *
                     pairwise_sum(sq));
  };
  fit.exponent_std_error = spread(loo_exponent);
  fit.coefficient_std_error = spread(loo_coefficient);
  return fit;
}

}  // namespace shuttle
