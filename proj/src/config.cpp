#include "shuttle/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"

namespace shuttle {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Entries = std::map<std::string, Entry, std::less<>>;

const std::set<std::string, std::less<>> kKnownKeys = {
    "mass",          "wavelength",     "depth",         "distance",        "channels",
    "noise",         "D",              "tau",           "alpha_table",     "T",
    "n",             "trajectory",     "mc",            "mc_paths",        "mc_seed",
    "mc_points_per_T0", "verify_T",    "verify_tau",    "verify_lambdas",  "verify_paths",
    "quad_rel_tol",  "white_tau_threshold", "output_csv", "output_record"};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view text, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value))
    throw ParseError(line, "expected a number, got '" + t + "'");
  return value;
}

template <typename Int>
Int parse_integer(std::string_view text, int line) {
  const std::string t = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError(line, "expected a non-negative integer, got '" + t + "'");
  return value;
}

/// Splits a list on commas that are not inside parentheses.
std::vector<std::string> split_list(std::string_view text, int line) {
  std::vector<std::string> items;
  int depth = 0;
  std::string current;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  items.push_back(trim(current));
  for (const auto& item : items)
    if (item.empty()) throw ParseError(line, "empty list entry");
  return items;
}

/// Unit name -> factor converting to SI. Unit-less values are only accepted for zero.
using UnitTable = std::map<std::string, double, std::less<>>;

double parse_quantity(std::string_view text, const UnitTable& units, int line) {
  const std::string t = trim(text);
  const auto space = t.find_first_of(" \t");
  const std::string number = space == std::string::npos ? t : t.substr(0, space);
  const std::string unit = space == std::string::npos ? "" : trim(t.substr(space));
  const double value = parse_double(number, line);
  if (unit.empty()) {
    if (value == 0.0) return 0.0;
    throw ParseError(line, "missing unit in '" + t + "'");
  }
  const auto it = units.find(unit);
  if (it == units.end()) {
    std::string allowed;
    for (const auto& [name, factor] : units) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ParseError(line, "unit '" + unit + "' not allowed here (expected one of: " + allowed + ")");
  }
  return value * it->second;
}

std::vector<double> parse_quantity_list(std::string_view text, const UnitTable& units, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(text, line)) {
    if (item.rfind("logspace(", 0) == 0) {
      const auto close = item.find(')');
      if (close == std::string::npos) throw ParseError(line, "unterminated logspace(...)");
      const auto args = split_list(std::string_view(item).substr(9, close - 9), line);
      if (args.size() != 3) throw ParseError(line, "logspace needs (lo, hi, count)");
      const std::string unit = trim(std::string_view(item).substr(close + 1));
      const double lo = parse_double(args[0], line);
      const double hi = parse_double(args[1], line);
      const auto count = parse_integer<int>(args[2], line);
      if (!(lo > 0.0 && hi > lo) || count < 2)
        throw ParseError(line, "logspace needs 0 < lo < hi and count >= 2");
      const double scale = parse_quantity("1 " + unit, units, line);
      for (int i = 0; i < count; ++i) {
        const double e = std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i / (count - 1);
        out.push_back(scale * std::pow(10.0, e));
      }
    } else {
      out.push_back(parse_quantity(item, units, line));
    }
  }
  return out;
}

bool parse_bool(std::string_view text, int line) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ParseError(line, "expected true or false, got '" + t + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Entries entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!kKnownKeys.contains(key)) throw ParseError(line_no, "unknown key '" + key + "'");
    if (entries.contains(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");
    entries.emplace(key, Entry{value, line_no});
  }

  auto require = [&](const char* key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ParseError(0, std::string("missing required key '") + key + "'");
    return it->second;
  };
  auto find = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  cfg.base_dir = base_dir;

  // Lattice first: recoil energy, wavelength and T0 are units for later keys.
  {
    const auto& e = require("mass");
    cfg.lattice.mass = parse_quantity(e.value, {{"u", constants::atomic_mass_unit}, {"kg", 1.0}}, e.line);
  }
  {
    const auto& e = require("wavelength");
    cfg.lattice.wavelength = parse_quantity(e.value, {{"nm", 1e-9}, {"um", 1e-6}, {"m", 1.0}}, e.line);
  }
  if (!(cfg.lattice.mass > 0.0)) throw ParseError(require("mass").line, "mass must be positive");
  if (!(cfg.lattice.wavelength > 0.0))
    throw ParseError(require("wavelength").line, "wavelength must be positive");
  {
    const auto& e = require("depth");
    cfg.lattice.depth =
        parse_quantity(e.value, {{"ER", cfg.lattice.recoil_energy()}, {"J", 1.0}}, e.line);
    if (!(cfg.lattice.depth > 0.0)) throw ParseError(e.line, "depth must be positive");
  }
  if (const auto* e = find("distance")) {
    cfg.lattice.distance = parse_quantity(
        e->value, {{"nm", 1e-9}, {"um", 1e-6}, {"m", 1.0}, {"lambda", cfg.lattice.wavelength}},
        e->line);
    if (*cfg.lattice.distance < 0.0) throw ParseError(e->line, "distance must be non-negative");
  }
  const DerivedParams params = derive_params(cfg.lattice);
  const UnitTable time_units = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"T0", params.period}};

  {
    const auto& e = require("channels");
    for (const auto& name : split_list(e.value, e.line)) {
      try {
        cfg.channels.push_back(channel_from_string(name));
      } catch (const InvalidArgument& err) {
        throw ParseError(e.line, err.what());
      }
    }
  }
  {
    const auto& e = require("noise");
    if (e.value == "white") cfg.noise = NoiseKind::white;
    else if (e.value == "ou") cfg.noise = NoiseKind::ou;
    else if (e.value == "tabulated") cfg.noise = NoiseKind::tabulated;
    else throw ParseError(e.line, "noise must be white, ou or tabulated");
  }
  if (cfg.noise == NoiseKind::tabulated) {
    const auto& e = require("alpha_table");
    cfg.alpha_table = e.value;
    if (cfg.alpha_table.is_relative() && !base_dir.empty()) cfg.alpha_table = base_dir / cfg.alpha_table;
    try {
      cfg.table = load_tabulated_csv(cfg.alpha_table);
    } catch (const ParseError& err) {
      throw ParseError(e.line, err.what());
    } catch (const std::runtime_error& err) {
      throw ParseError(e.line, err.what());
    }
    cfg.strength = cfg.table->strength();
    if (find("D")) throw ParseError(find("D")->line, "D is taken from the table for tabulated noise");
    if (find("tau")) throw ParseError(find("tau")->line, "tau does not apply to tabulated noise");
  } else {
    const auto& e = require("D");
    cfg.strength = parse_quantity(e.value, time_units, e.line);
    if (!(cfg.strength > 0.0)) throw ParseError(e.line, "D must be positive");
    if (find("alpha_table"))
      throw ParseError(find("alpha_table")->line, "alpha_table only applies to tabulated noise");
  }
  if (cfg.noise == NoiseKind::white) {
    if (const auto* e = find("tau")) {
      for (double tau : parse_quantity_list(e->value, time_units, e->line))
        if (tau != 0.0) throw ParseError(e->line, "white noise only accepts tau = 0");
    }
    cfg.taus = {0.0};
  } else if (cfg.noise == NoiseKind::ou) {
    const auto& e = require("tau");
    cfg.taus = parse_quantity_list(e.value, time_units, e.line);
    for (double tau : cfg.taus)
      if (tau < 0.0) throw ParseError(e.line, "tau must be non-negative");
  } else {
    cfg.taus = {0.0};
  }
  {
    const auto& e = require("T");
    cfg.durations = parse_quantity_list(e.value, time_units, e.line);
    for (double t : cfg.durations)
      if (!(t > 0.0)) throw ParseError(e.line, "transport times must be positive");
  }
  if (const auto* e = find("n")) cfg.n = parse_integer<int>(e->value, e->line);
  if (const auto* e = find("trajectory")) {
    if (e->value == "quintic") cfg.trajectory = TrajectoryKind::quintic;
    else if (e->value == "septic") cfg.trajectory = TrajectoryKind::septic;
    else throw ParseError(e->line, "trajectory must be quintic or septic");
  }
  if (const auto* e = find("mc")) cfg.mc = parse_bool(e->value, e->line);
  if (const auto* e = find("mc_paths")) {
    cfg.mc_paths = parse_integer<std::size_t>(e->value, e->line);
    if (cfg.mc_paths < 100) throw ParseError(e->line, "mc_paths must be at least 100");
  }
  if (const auto* e = find("mc_seed")) cfg.mc_seed = parse_integer<std::uint64_t>(e->value, e->line);
  if (const auto* e = find("mc_points_per_T0")) {
    cfg.mc_points_per_period = parse_double(e->value, e->line);
    if (!(cfg.mc_points_per_period >= 20.0))
      throw ParseError(e->line, "mc_points_per_T0 must be at least 20");
  }
  if (cfg.mc && !cfg.mc_seed) throw ParseError(require("mc").line, "mc = true needs mc_seed");

  cfg.verify_duration = 3.0 * params.period;
  cfg.verify_tau = params.period;
  if (const auto* e = find("verify_T")) {
    cfg.verify_duration = parse_quantity(e->value, time_units, e->line);
    if (!(cfg.verify_duration > 0.0)) throw ParseError(e->line, "verify_T must be positive");
  }
  if (const auto* e = find("verify_tau")) {
    cfg.verify_tau = parse_quantity(e->value, time_units, e->line);
    if (!(cfg.verify_tau > 0.0)) throw ParseError(e->line, "verify_tau must be positive");
  }
  if (const auto* e = find("verify_lambdas")) {
    cfg.verify_lambdas.clear();
    for (const auto& item : split_list(e->value, e->line)) {
      const double l = parse_double(item, e->line);
      if (!(l >= 1e-4 && l <= 1e-2)) throw ParseError(e->line, "verify_lambdas must lie in [1e-4, 1e-2]");
      cfg.verify_lambdas.push_back(l);
    }
    if (cfg.verify_lambdas.size() < 2) throw ParseError(e->line, "verify_lambdas needs two values");
  }
  if (const auto* e = find("verify_paths")) {
    cfg.verify_paths = parse_integer<std::size_t>(e->value, e->line);
    if (cfg.verify_paths < 100) throw ParseError(e->line, "verify_paths must be at least 100");
  }
  if (const auto* e = find("quad_rel_tol")) {
    cfg.quad_rel_tol = parse_double(e->value, e->line);
    if (!(cfg.quad_rel_tol > 0.0)) throw ParseError(e->line, "quad_rel_tol must be positive");
  }
  if (const auto* e = find("white_tau_threshold")) {
    cfg.white_tau_threshold = parse_double(e->value, e->line);
    if (!(cfg.white_tau_threshold >= 0.0))
      throw ParseError(e->line, "white_tau_threshold must be non-negative");
  }
  if (const auto* e = find("output_csv")) cfg.output_csv = e->value;
  if (const auto* e = find("output_record")) cfg.output_record = e->value;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& values, const char* unit) {
    std::string s;
    for (double v : values) s += (s.empty() ? "" : ", ") + format_double(v) + " " + unit;
    return s;
  };
  out << "mass = " << format_double(cfg.lattice.mass) << " kg\n";
  out << "wavelength = " << format_double(cfg.lattice.wavelength) << " m\n";
  out << "depth = " << format_double(cfg.lattice.depth) << " J\n";
  if (cfg.lattice.distance) out << "distance = " << format_double(*cfg.lattice.distance) << " m\n";
  std::string channels;
  for (Channel c : cfg.channels) channels += (channels.empty() ? "" : ", ") + std::string(to_string(c));
  out << "channels = " << channels << "\n";
  switch (cfg.noise) {
    case NoiseKind::white:
      out << "noise = white\nD = " << format_double(cfg.strength) << " s\n";
      break;
    case NoiseKind::ou:
      out << "noise = ou\nD = " << format_double(cfg.strength) << " s\n";
      out << "tau = " << list(cfg.taus, "s") << "\n";
      break;
    case NoiseKind::tabulated:
      out << "noise = tabulated\nalpha_table = " << std::filesystem::absolute(cfg.alpha_table).string()
          << "\n";
      break;
  }
  out << "T = " << list(cfg.durations, "s") << "\n";
  out << "n = " << cfg.n << "\n";
  out << "trajectory = " << (cfg.trajectory == TrajectoryKind::quintic ? "quintic" : "septic") << "\n";
  out << "mc = " << (cfg.mc ? "true" : "false") << "\n";
  out << "mc_paths = " << cfg.mc_paths << "\n";
  if (cfg.mc_seed) out << "mc_seed = " << *cfg.mc_seed << "\n";
  out << "mc_points_per_T0 = " << format_double(cfg.mc_points_per_period) << "\n";
  out << "verify_T = " << format_double(cfg.verify_duration) << " s\n";
  out << "verify_tau = " << format_double(cfg.verify_tau) << " s\n";
  std::string lambdas;
  for (double l : cfg.verify_lambdas) lambdas += (lambdas.empty() ? "" : ", ") + format_double(l);
  out << "verify_lambdas = " << lambdas << "\n";
  out << "verify_paths = " << cfg.verify_paths << "\n";
  out << "quad_rel_tol = " << format_double(cfg.quad_rel_tol) << "\n";
  out << "white_tau_threshold = " << format_double(cfg.white_tau_threshold) << "\n";
  out << "output_csv = " << cfg.output_csv.string() << "\n";
  out << "output_record = " << cfg.output_record.string() << "\n";
  return out.str();
}

NoiseSpec make_noise_spec(const RunConfig& cfg, Channel channel, double tau) {
  NoiseSpec spec;
  spec.channel = channel;
  switch (cfg.noise) {
    case NoiseKind::tabulated:
      if (!cfg.table) throw InvalidArgument("tabulated noise without a loaded table");
      spec.model = *cfg.table;
      break;
    case NoiseKind::white:
    case NoiseKind::ou:
      if (tau == 0.0) spec.model = WhiteNoise{cfg.strength};
      else spec.model = OrnsteinUhlenbeck{cfg.strength, tau};
      break;
  }
  return spec;
}

}  // namespace shuttle
