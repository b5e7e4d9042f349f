#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/config.hpp"
#include "shuttle/sensitivity.hpp"
#include "shuttle/verifier.hpp"

namespace shuttle {

inline constexpr const char* kCsvHeader =
    "channel,tau_over_T0,T_over_T0,G1_over_G0,G2_over_G0,G_over_G0,mc_G_over_G0,mc_stderr_over_G0";

struct SweepRow {
  Channel channel = Channel::accordion;
  std::optional<double> tau_over_T0;  // empty for tabulated noise
  double T_over_T0 = 0.0;
  double g1 = 0.0;  // all normalized by G0
  double g2 = 0.0;
  double g = 0.0;
  double quad_error = 0.0;
  std::optional<double> mc;
  std::optional<double> mc_stderr;
  bool flagged = false;  // MC and quadrature more than 5 standard errors apart
};

struct Dataset {
  std::vector<SweepRow> rows;
  nlohmann::json record;
};

Trajectory make_trajectory(const RunConfig& cfg, double duration);

/// Evaluates every (channel, tau, T) point in grid order.
Dataset run_sweep(const RunConfig& cfg, unsigned workers = 0);

std::string format_csv(const Dataset& data);
void write_outputs(const Dataset& data, const std::filesystem::path& csv,
                   const std::filesystem::path& record);

/// Headline numbers of the white-noise closed forms for one configuration.
struct Extrema {
  double lamb_dicke_ratio = 0.0;           // hbar omega0 / E_R
  double min_shuttle_time_over_T0 = 0.0;   // harmonic-validity bound
  double g2k_minimum_over_T0 = 0.0;
  double amplitude_crossing_over_T0 = 0.0;
  double g2k_linear_over_g1k = 0.0;        // in units of hbar omega0 / E_R
  double g2k_over_g2q_slope = 0.0;
  double g2q_over_g1a_slope = 0.0;
  double g2q_over_g1a_expected = 0.0;      // hbar omega0 / (E_R (2n + 1))
  int n = 0;
};

Extrema report_extrema(const RunConfig& cfg);
std::string format_extrema(const Extrema& e);

struct ChannelVerification {
  Channel channel = Channel::accordion;
  double quadrature = 0.0;  // J
  McEstimate mc;
  double mc_z = 0.0;  // |mc - quadrature| / stderr
  ScalingFit scaling;
  double coefficient_z = 0.0;  // |fit coefficient - MC on the scaling paths| / stderr
  McEstimate scaling_mc;
  std::vector<std::string> flags;
};

struct VerificationReport {
  std::vector<ChannelVerification> channels;
  bool flagged() const;
  nlohmann::json to_json() const;
};

/// Monte-Carlo and lambda-scaling checks at (verify_T, verify_tau) for every channel.
VerificationReport run_verification(const RunConfig& cfg, unsigned workers = 0);

}  // namespace shuttle
