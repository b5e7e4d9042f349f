#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace shuttle {

/// Which lattice parameter fluctuates: wavenumber, depth, or standing-wave phase.
enum class Channel { accordion, amplitude, position };

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view name);

/// alpha(t) = D delta(t). Only meaningful under an integral.
struct WhiteNoise {
  double strength = 0.0;  // D, seconds
};

/// alpha(t) = (D / 2 tau) exp(-t / tau).
struct OrnsteinUhlenbeck {
  double strength = 0.0;          // D, seconds
  double correlation_time = 0.0;  // tau, seconds

  double variance() const { return strength / (2.0 * correlation_time); }
};

/// alpha sampled on a grid starting at t = 0, linearly interpolated in between.
struct TabulatedCorrelation {
  Eigen::VectorXd times;
  Eigen::VectorXd values;

  double max_time() const { return times(times.size() - 1); }
  /// White-equivalent strength 2 int alpha dt over the table.
  double strength() const;
};

using CorrelationModel = std::variant<WhiteNoise, OrnsteinUhlenbeck, TabulatedCorrelation>;

struct NoiseSpec {
  Channel channel = Channel::accordion;
  CorrelationModel model = WhiteNoise{};
};

void validate(const NoiseSpec& spec);

/// Noise strength D: the parameter for white/OU, 2 int alpha for tables.
double noise_strength(const CorrelationModel& model);

/// Stationary correlation alpha(t) for t >= 0. White noise throws UnsupportedOperation.
double correlation(const NoiseSpec& spec, double t);

/// (1/pi) int_0^inf alpha(t) cos(omega t) dt; the position channel also divides by k^2.
double spectral_density(const NoiseSpec& spec, double omega,
                        std::optional<double> wavenumber = std::nullopt);

/// Parses two-column `t_seconds,alpha` rows; a single leading '#' line is allowed.
TabulatedCorrelation parse_tabulated_csv(std::istream& in);
TabulatedCorrelation load_tabulated_csv(const std::filesystem::path& path);

/// One sampled path xi(t_i), t_i = i T / N, i = 0..N.
struct NoiseRealization {
  double duration = 0.0;
  Eigen::VectorXd values;
  std::uint64_t seed = 0;

  Eigen::Index intervals() const { return values.size() - 1; }
  double step() const { return duration / static_cast<double>(intervals()); }
  double time(Eigen::Index i) const {
    return i == intervals() ? duration : static_cast<double>(i) * step();
  }
  Eigen::VectorXd times() const;
  /// Piecewise-linear interpolation between grid points.
  double interpolate(double t) const;
};

/// Exact OU discretization with a stationary start, seeded by one Philox stream.
NoiseRealization sample_ou_path(const NoiseSpec& spec, double duration, Eigen::Index intervals,
                                std::uint64_t seed);

/// Seed of path `index` in a Monte-Carlo batch.
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }

}  // namespace shuttle
