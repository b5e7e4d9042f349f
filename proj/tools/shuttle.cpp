// shuttle: transport-noise sensitivity sweeps, extrema tables and Monte-Carlo checks.
//
//   shuttle run <config>      sensitivity sweep -> CSV + JSON run record
//   shuttle extrema <config>  white-noise minima, crossings and slope ratios
//   shuttle verify <config>   Monte-Carlo and lambda^2-scaling checks
//
// Exit codes: 0 success, 1 runtime/I-O failure, 2 invalid input, 3 verification flagged.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "shuttle/config.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/sweep.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitFlagged = 3;

int cmd_run(const std::string& config_path, const std::string& csv, const std::string& record,
            unsigned workers) {
  const auto cfg = shuttle::load_config(config_path);
  const auto data = shuttle::run_sweep(cfg, workers);
  const std::filesystem::path csv_path = csv.empty() ? cfg.output_csv : std::filesystem::path(csv);
  const std::filesystem::path record_path = record.empty() ? cfg.output_record : std::filesystem::path(record);
  shuttle::write_outputs(data, csv_path, record_path);
  std::size_t flagged = 0;
  for (const auto& row : data.rows) flagged += row.flagged ? 1 : 0;
  std::cout << "wrote " << data.rows.size() << " rows to " << csv_path.string() << " and record "
            << record_path.string() << "\n";
  if (flagged) std::cout << flagged << " rows flagged (MC vs quadrature beyond 5 sigma)\n";
  return 0;
}

int cmd_extrema(const std::string& config_path) {
  const auto cfg = shuttle::load_config(config_path);
  std::cout << shuttle::format_extrema(shuttle::report_extrema(cfg));
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& record, unsigned workers) {
  const auto cfg = shuttle::load_config(config_path);
  const auto report = shuttle::run_verification(cfg, workers);
  for (const auto& c : report.channels) {
    std::printf("%-9s quad=%.6e J  mc=%.6e +- %.2e J (z=%.2f)  exponent=%.4f  coef z=%.2f  %s\n",
                std::string(shuttle::to_string(c.channel)).c_str(), c.quadrature, c.mc.mean,
                c.mc.std_error, c.mc_z, c.scaling.exponent, c.coefficient_z,
                c.flags.empty() ? "ok" : "FLAGGED");
    for (const auto& f : c.flags) std::printf("          flag: %s\n", f.c_str());
  }
  if (!record.empty()) {
    nlohmann::json rec = {{"tool", "shuttle"},
                          {"version", SHUTTLE_VERSION},
                          {"command", "verify"},
                          {"config_text", shuttle::format_config(cfg)},
                          {"results", report.to_json()}};
    std::ofstream out(record);
    if (!out) throw std::runtime_error("cannot write " + record);
    out << rec.dump(2) << "\n";
  }
  return report.flagged() ? kExitFlagged : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise sensitivities of shortcut-to-adiabaticity lattice transport"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("-j,--workers", workers, "Worker threads (default: SHUTTLE_WORKERS or all cores)");

  std::string config_path, csv, record;
  auto* run = app.add_subcommand("run", "Sweep sensitivities over the configured grids");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--csv", csv, "Output CSV (overrides output_csv)");
  run->add_option("--record", record, "Output JSON run record (overrides output_record)");

  auto* extrema = app.add_subcommand("extrema", "Print white-noise minima and slope ratios");
  extrema->add_option("config", config_path, "Configuration file")->required();

  auto* verify = app.add_subcommand("verify", "Monte-Carlo and lambda-scaling verification");
  verify->add_option("config", config_path, "Configuration file")->required();
  verify->add_option("--record", record, "Write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(config_path, csv, record, workers);
    if (*extrema) return cmd_extrema(config_path);
    if (*verify) return cmd_verify(config_path, record, workers);
  } catch (const shuttle::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
