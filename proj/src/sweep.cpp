#include "shuttle/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shuttle/errors.hpp"
#include "shuttle/parallel.hpp"

namespace shuttle {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SensitivityOptions sensitivity_options(const RunConfig& cfg) {
  SensitivityOptions opts;
  opts.quadrature.rel_tol = cfg.quad_rel_tol;
  opts.white_tau_threshold = cfg.white_tau_threshold;
  return opts;
}

nlohmann::json derived_json(const DerivedParams& p) {
  return {{"omega0_rad_per_s", p.omega0},
          {"recoil_energy_J", p.recoil_energy},
          {"period_s", p.period},
          {"lamb_dicke_ratio", p.lamb_dicke_ratio},
          {"mass_kg", p.mass},
          {"wavenumber_per_m", p.wavenumber}};
}

}  // namespace

Trajectory make_trajectory(const RunConfig& cfg, double duration) {
  const double d = cfg.lattice.transport_distance();
  return cfg.trajectory == TrajectoryKind::quintic ? design_polynomial(duration, d)
                                                   : design_septic(duration, d);
}

Dataset run_sweep(const RunConfig& cfg, unsigned workers) {
  if (cfg.channels.empty() || cfg.durations.empty() || cfg.taus.empty())
    throw InvalidArgument("sweep: channel, tau and T grids must be non-empty");
  const DerivedParams p = derive_params(cfg.lattice);
  const SensitivityOptions opts = sensitivity_options(cfg);

  struct Point {
    Channel channel;
    double tau;
    double duration;
  };
  std::vector<Point> points;
  for (Channel c : cfg.channels)
    for (double tau : cfg.taus)
      for (double T : cfg.durations) points.push_back({c, tau, T});

  Dataset data;
  data.rows.resize(points.size());
  parallel_for(points.size(), workers ? workers : default_workers(), [&](std::size_t i) {
    const Point& pt = points[i];
    const NoiseSpec spec = make_noise_spec(cfg, pt.channel, pt.tau);
    const Trajectory traj = make_trajectory(cfg, pt.duration);
    const SensitivityResult r = sensitivity(p, traj, spec, cfg.n, opts);
    SweepRow row;
    row.channel = pt.channel;
    if (cfg.noise != NoiseKind::tabulated) row.tau_over_T0 = pt.tau / p.period;
    row.T_over_T0 = pt.duration / p.period;
    row.g1 = r.g1_normalized();
    row.g2 = r.g2_normalized();
    row.g = r.total_normalized();
    row.quad_error = r.error / r.g0;
    if (cfg.mc && std::holds_alternative<OrnsteinUhlenbeck>(spec.model)) {
      McOptions mc_opts;
      mc_opts.points_per_period = cfg.mc_points_per_period;
      mc_opts.workers = 1;
      const McEstimate mc = estimate_sensitivity_mc(traj, p, spec, pt.channel, cfg.n, cfg.mc_paths,
                                                    *cfg.mc_seed, mc_opts);
      row.mc = mc.mean / r.g0;
      row.mc_stderr = mc.std_error / r.g0;
      row.flagged = std::abs(*row.mc - row.g) > 5.0 * *row.mc_stderr;
    }
    data.rows[i] = row;
  });

  nlohmann::json flags = nlohmann::json::array();
  for (const auto& row : data.rows)
    if (row.flagged)
      flags.push_back({{"channel", to_string(row.channel)},
                       {"tau_over_T0", *row.tau_over_T0},
                       {"T_over_T0", row.T_over_T0},
                       {"issue", "Monte-Carlo and quadrature differ by more than 5 standard errors"}});

  nlohmann::json seeds = nlohmann::json::object();
  if (cfg.mc_seed) {
    seeds["mc_seed"] = *cfg.mc_seed;
    seeds["path_seed_rule"] = "path i uses mc_seed xor i (Philox4x32-10 key)";
  }
  data.record = {
      {"tool", "shuttle"},
      {"version", SHUTTLE_VERSION},
      {"command", "run"},
      {"config_text", format_config(cfg)},
      {"derived", derived_json(p)},
      {"tolerances",
       {{"quad_rel_tol", cfg.quad_rel_tol},
        {"white_tau_threshold_T0", cfg.white_tau_threshold},
        {"mc_points_per_T0", cfg.mc_points_per_period},
        {"mc_flag_sigma", 5.0}}},
      {"seeds", seeds},
      {"csv_header", kCsvHeader},
      {"rows", data.rows.size()},
      {"flags", flags},
  };
  return data;
}

std::string format_csv(const Dataset& data) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& row : data.rows) {
    out << to_string(row.channel) << ','
        << (row.tau_over_T0 ? format_double(*row.tau_over_T0) : std::string()) << ','
        << format_double(row.T_over_T0) << ',' << format_double(row.g1) << ','
        << format_double(row.g2) << ',' << format_double(row.g) << ','
        << (row.mc ? format_double(*row.mc) : std::string()) << ','
        << (row.mc_stderr ? format_double(*row.mc_stderr) : std::string()) << "\n";
  }
  return out.str();
}

void write_outputs(const Dataset& data, const std::filesystem::path& csv,
                   const std::filesystem::path& record) {
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
    out << format_csv(data);
    if (!out) throw std::runtime_error("failed writing " + csv.string());
  }
  nlohmann::json rec = data.record;
  rec["outputs"] = {{"csv", csv.string()}, {"record", record.string()}};
  std::ofstream out(record, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + record.string());
  out << rec.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing " + record.string());
}

Extrema report_extrema(const RunConfig& cfg) {
  const DerivedParams p = derive_params(cfg.lattice);
  const double d = cfg.lattice.transport_distance();
  const double D = cfg.strength;
  const int n = cfg.n;

  Extrema e;
  e.n = n;
  e.lamb_dicke_ratio = p.lamb_dicke_ratio;
  e.min_shuttle_time_over_T0 = min_shuttle_time(p, cfg.lattice) / p.period;
  e.g2k_minimum_over_T0 = find_g2k_minimum(p, d, D) / p.period;
  e.amplitude_crossing_over_T0 = find_amplitude_crossing(p, d, n, D) / p.period;

  // Far beyond T0 every closed form is linear in T; G / T is the slope.
  const double far = 1e6 * p.period;
  auto slope = [&](Channel c) { return white_closed_forms(p, far, d, n, c, D); };
  const auto accordion = slope(Channel::accordion);
  const auto amplitude = slope(Channel::amplitude);
  const auto position = slope(Channel::position);
  e.g2k_linear_over_g1k = (accordion.g2 / accordion.g1) / p.lamb_dicke_ratio;
  e.g2k_over_g2q_slope = accordion.g2 / position.g2;
  e.g2q_over_g1a_slope = position.g2 / amplitude.g1;
  e.g2q_over_g1a_expected = p.lamb_dicke_ratio / (2.0 * n + 1.0);
  return e;
}

std::string format_extrema(const Extrema& e) {
  std::ostringstream out;
  char buf[160];
  auto line = [&](const char* label, double value) {
    std::snprintf(buf, sizeof buf, "%-44s %.6g\n", label, value);
    out << buf;
  };
  line("hbar omega0 / E_R", e.lamb_dicke_ratio);
  line("harmonic validity bound T_min / T0", e.min_shuttle_time_over_T0);
  line("accordion G2 minimum T / T0", e.g2k_minimum_over_T0);
  line("amplitude G1 = G2 crossing T* / T0", e.amplitude_crossing_over_T0);
  line("G2K(linear) / G1K  [hbar omega0 / E_R]", e.g2k_linear_over_g1k);
  line("G2K / G2Q (large-T slope)", e.g2k_over_g2q_slope);
  line("G2Q / G1A (large-T slope)", e.g2q_over_g1a_slope);
  line("hbar omega0 / [E_R (2n+1)]", e.g2q_over_g1a_expected);
  return out.str();
}

bool VerificationReport::flagged() const {
  for (const auto& c : channels)
    if (!c.flags.empty()) return true;
  return false;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : channels) {
    out.push_back({{"channel", to_string(c.channel)},
                   {"quadrature_J", c.quadrature},
                   {"mc_mean_J", c.mc.mean},
                   {"mc_stderr_J", c.mc.std_error},
                   {"mc_paths", c.mc.paths},
                   {"mc_seed", c.mc.seed},
                   {"mc_z", c.mc_z},
                   {"scaling_status",
                    c.scaling.status == ScalingFit::Status::ok ? "ok" : "insufficient_signal"},
                   {"scaling_exponent", c.scaling.exponent},
                   {"scaling_exponent_stderr", c.scaling.exponent_std_error},
                   {"scaling_coefficient_J", c.scaling.coefficient},
                   {"scaling_mc_mean_J", c.scaling_mc.mean},
                   {"scaling_mc_stderr_J", c.scaling_mc.std_error},
                   {"coefficient_z", c.coefficient_z},
                   {"lambdas", c.scaling.lambdas},
                   {"mean_excess_J", c.scaling.mean_excess},
                   {"flags", c.flags}});
  }
  return out;
}

VerificationReport run_verification(const RunConfig& cfg, unsigned workers) {
  if (!cfg.mc_seed) throw InvalidArgument("verify: mc_seed is required");
  if (cfg.noise == NoiseKind::tabulated)
    throw InvalidArgument("verify: Monte-Carlo sampling needs OU (or white) noise, not a table");
  const DerivedParams p = derive_params(cfg.lattice);
  const Trajectory traj = make_trajectory(cfg, cfg.verify_duration);
  const SensitivityOptions opts = sensitivity_options(cfg);
  McOptions mc_opts;
  mc_opts.points_per_period = cfg.mc_points_per_period;
  mc_opts.workers = workers;
  ScalingOptions scaling_opts;
  scaling_opts.mc = mc_opts;

  VerificationReport report;
  for (Channel c : cfg.channels) {
    ChannelVerification v;
    v.channel = c;
    NoiseSpec spec{c, OrnsteinUhlenbeck{cfg.strength, cfg.verify_tau}};
    v.quadrature = sensitivity(p, traj, spec, cfg.n, opts).total;
    v.mc = estimate_sensitivity_mc(traj, p, spec, c, cfg.n, cfg.mc_paths, *cfg.mc_seed, mc_opts);
    v.mc_z = std::abs(v.mc.mean - v.quadrature) / v.mc.std_error;
    if (!(v.mc_z <= 3.0)) v.flags.push_back("mc_vs_quadrature_beyond_3_stderr");
    if (!(v.mc.std_error <= 0.03 * std::abs(v.quadrature)))
      v.flags.push_back("mc_stderr_above_3_percent");

    v.scaling = lambda_scaling_check(traj, p, spec, c, cfg.n, cfg.verify_lambdas,
                                     cfg.verify_paths, *cfg.mc_seed, scaling_opts);
    if (v.scaling.status != ScalingFit::Status::ok) {
      v.flags.push_back("insufficient_signal");
    } else {
      // Same seed, so these are exactly the paths used in the fit.
      v.scaling_mc = estimate_sensitivity_mc(traj, p, spec, c, cfg.n, cfg.verify_paths,
                                             *cfg.mc_seed, mc_opts);
      v.coefficient_z =
          std::abs(v.scaling.coefficient - v.scaling_mc.mean) / v.scaling_mc.std_error;
      if (!(std::abs(v.scaling.exponent - 2.0) <= 0.05)) v.flags.push_back("exponent_not_2");
      if (!(v.coefficient_z <= 3.0)) v.flags.push_back("lambda2_coefficient_beyond_3_stderr");
    }
    report.channels.push_back(std::move(v));
  }
  return report;
}

}  // namespace shuttle
