#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shuttle/lattice.hpp"
#include "shuttle/noise.hpp"

namespace shuttle {

enum class NoiseKind { white, ou, tabulated };
enum class TrajectoryKind { quintic, septic };

/// Everything a sweep needs, with every quantity already in SI.
struct RunConfig {
  LatticeConfig lattice;
  std::vector<Channel> channels;
  NoiseKind noise = NoiseKind::ou;
  double strength = 0.0;          // D, s
  std::vector<double> taus;       // s; 0 selects white noise
  std::filesystem::path alpha_table;
  std::optional<TabulatedCorrelation> table;  // loaded from alpha_table
  std::vector<double> durations;  // s
  int n = 0;
  TrajectoryKind trajectory = TrajectoryKind::quintic;

  bool mc = false;
  std::size_t mc_paths = 10000;
  std::optional<std::uint64_t> mc_seed;
  double mc_points_per_period = 1000.0;

  double verify_duration = 0.0;  // s
  double verify_tau = 0.0;       // s
  std::vector<double> verify_lambdas{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::size_t verify_paths = 1000;

  double quad_rel_tol = 1e-8;
  double white_tau_threshold = 1e-6;  // trap periods

  std::filesystem::path output_csv = "sweep.csv";
  std::filesystem::path output_record = "sweep.json";

  /// Directory that relative table paths are resolved against.
  std::filesystem::path base_dir;
};

/// Parses the flat `key = value` format. Values carry units (`866 nm`, `850 ER`,
/// `10 T0`); lists are comma separated and `logspace(lo, hi, count) unit` expands
/// to a log-spaced grid. Unknown keys, missing keys and wrong units are errors.
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form in SI units; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

/// Noise spec of one channel at one correlation time (0 means white).
NoiseSpec make_noise_spec(const RunConfig& cfg, Channel channel, double tau);

}  // namespace shuttle
