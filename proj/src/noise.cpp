#include "shuttle/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/philox.hpp"

namespace shuttle {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double interpolate_table(const TabulatedCorrelation& table, double t) {
  const auto& ts = table.times;
  if (t < 0.0 || t > table.max_time())
    throw RangeError("tabulated correlation: t = " + std::to_string(t) + " outside table");
  const auto* begin = ts.data();
  const auto* end = ts.data() + ts.size();
  auto it = std::upper_bound(begin, end, t);
  Eigen::Index hi = std::min<Eigen::Index>(it - begin, ts.size() - 1);
  Eigen::Index lo = hi - 1;
  const double w = (t - ts(lo)) / (ts(hi) - ts(lo));
  return table.values(lo) + w * (table.values(hi) - table.values(lo));
}

// int_{t0}^{t1} (a0 + (a1 - a0)(t - t0)/h) cos(omega t) dt
double linear_cosine_segment(double t0, double t1, double a0, double a1, double omega) {
  const double h = t1 - t0;
  if (omega * h < 1e-2) {
    // 4-point Gauss-Legendre; exact up to O((omega h)^8) here
    static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
    static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                    0.3478548451374538};
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double u = 0.5 * (x[i] + 1.0);
      acc += w[i] * (a0 + (a1 - a0) * u) * std::cos(omega * (t0 + u * h));
    }
    return 0.5 * h * acc;
  }
  const double slope = (a1 - a0) / h;
  auto antiderivative = [&](double t) {
    const double s = std::sin(omega * t);
    const double c = std::cos(omega * t);
    return (a0 + slope * (t - t0)) * s / omega + slope * c / (omega * omega);
  };
  return antiderivative(t1) - antiderivative(t0);
}

}  // namespace

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::accordion:
      return "accordion";
    case Channel::amplitude:
      return "amplitude";
    case Channel::position:
      return "position";
  }
  return "unknown";
}

Channel channel_from_string(std::string_view name) {
  if (name == "accordion") return Channel::accordion;
  if (name == "amplitude") return Channel::amplitude;
  if (name == "position") return Channel::position;
  throw InvalidArgument("unknown noise channel '" + std::string(name) + "'");
}

double TabulatedCorrelation::strength() const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < times.size(); ++i)
    acc += 0.5 * (values(i) + values(i + 1)) * (times(i + 1) - times(i));
  return 2.0 * acc;
}

void validate(const NoiseSpec& spec) {
  std::visit(overloaded{
                 [](const WhiteNoise& w) {
                   if (!(w.strength >= 0.0)) throw InvalidArgument("white noise: D must be >= 0");
                 },
                 [](const OrnsteinUhlenbeck& ou) {
                   if (!(ou.strength >= 0.0)) throw InvalidArgument("OU noise: D must be >= 0");
                   if (!(ou.correlation_time > 0.0))
                     throw InvalidArgument("OU noise: tau must be positive");
                 },
                 [](const TabulatedCorrelation& tab) {
                   if (tab.times.size() < 2 || tab.times.size() != tab.values.size())
                     throw InvalidArgument("tabulated correlation: need at least two rows");
                   if (tab.times(0) != 0.0)
                     throw InvalidArgument("tabulated correlation: grid must start at t = 0");
                   for (Eigen::Index i = 1; i < tab.times.size(); ++i)
                     if (!(tab.times(i) > tab.times(i - 1)))
                       throw InvalidArgument("tabulated correlation: times must increase");
                   if (!(tab.values(0) >= 0.0))
                     throw InvalidArgument("tabulated correlation: alpha(0) must be >= 0");
                 },
             },
             spec.model);
}

double noise_strength(const CorrelationModel& model) {
  return std::visit(overloaded{
                        [](const WhiteNoise& w) { return w.strength; },
                        [](const OrnsteinUhlenbeck& ou) { return ou.strength; },
                        [](const TabulatedCorrelation& tab) { return tab.strength(); },
                    },
                    model);
}

double correlation(const NoiseSpec& spec, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("correlation: t must be non-negative");
  return std::visit(
      overloaded{
          [](const WhiteNoise&) -> double {
            throw UnsupportedOperation("white-noise correlation is a delta; integrate it instead");
          },
          [t](const OrnsteinUhlenbeck& ou) { return ou.variance() * std::exp(-t / ou.correlation_time); },
          [t](const TabulatedCorrelation& tab) { return interpolate_table(tab, t); },
      },
      spec.model);
}

double spectral_density(const NoiseSpec& spec, double omega, std::optional<double> wavenumber) {
  if (!(omega >= 0.0)) throw InvalidArgument("spectral_density: omega must be >= 0");
  double scale = 1.0;
  if (spec.channel == Channel::position) {
    if (!wavenumber || !(*wavenumber > 0.0))
      throw InvalidArgument("spectral_density: position channel needs a positive wavenumber");
    scale = 1.0 / (*wavenumber * *wavenumber);
  }
  const double density = std::visit(
      overloaded{
          [](const WhiteNoise& w) { return w.strength / (2.0 * constants::pi); },
          [omega](const OrnsteinUhlenbeck& ou) {
            const double wt = omega * ou.correlation_time;
            return ou.strength / (2.0 * constants::pi) / (1.0 + wt * wt);
          },
          [omega](const TabulatedCorrelation& tab) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i + 1 < tab.times.size(); ++i)
              acc += linear_cosine_segment(tab.times(i), tab.times(i + 1), tab.values(i),
                                           tab.values(i + 1), omega);
            return acc / constants::pi;
          },
      },
      spec.model);
  return scale * density;
}

TabulatedCorrelation parse_tabulated_csv(std::istream& in) {
  std::vector<double> ts;
  std::vector<double> as;
  std::string line;
  int line_no = 0;
  auto parse_number = [&](std::string_view field) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() ||
        !std::isfinite(value))
      throw ParseError(line_no, "expected a number, got '" + std::string(field) + "'");
    return value;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && !line.empty() && line.front() == '#') continue;
    std::string_view view(line);
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated columns");
    const double t = parse_number(view.substr(0, comma));
    const double a = parse_number(view.substr(comma + 1));
    if (!ts.empty() && !(t > ts.back())) throw ParseError(line_no, "times must strictly increase");
    if (ts.empty() && t != 0.0) throw ParseError(line_no, "table must start at t = 0");
    if (ts.empty() && a < 0.0) throw ParseError(line_no, "alpha(0) must be non-negative");
    ts.push_back(t);
    as.push_back(a);
  }
  if (ts.size() < 2) throw ParseError(0, "tabulated correlation needs at least two rows");
  TabulatedCorrelation tab;
  tab.times = Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  tab.values = Eigen::Map<Eigen::VectorXd>(as.data(), static_cast<Eigen::Index>(as.size()));
  return tab;
}

TabulatedCorrelation load_tabulated_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open correlation table " + path.string());
  try {
    return parse_tabulated_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.detail());
  }
}

Eigen::VectorXd NoiseRealization::times() const {
  Eigen::VectorXd t(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) t(i) = time(i);
  return t;
}

double NoiseRealization::interpolate(double t) const {
  const double h = step();
  const Eigen::Index n = intervals();
  Eigen::Index i = static_cast<Eigen::Index>(std::floor(t / h));
  i = std::clamp<Eigen::Index>(i, 0, n - 1);
  const double w = (t - time(i)) / h;
  return values(i) + w * (values(i + 1) - values(i));
}

NoiseRealization sample_ou_path(const NoiseSpec& spec, double duration, Eigen::Index intervals,
                                std::uint64_t seed) {
  const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.model);
  if (!ou) throw InvalidArgument("sample_ou_path: spec is not an Ornstein-Uhlenbeck model");
  validate(spec);
  if (!(duration > 0.0)) throw InvalidArgument("sample_ou_path: T must be positive");
  if (intervals < 2) throw InvalidArgument("sample_ou_path: need N >= 2 intervals");

  NoiseRealization real;
  real.duration = duration;
  real.seed = seed;
  real.values = Eigen::VectorXd::Zero(intervals + 1);
  if (ou->strength == 0.0) return real;

  const double sigma = std::sqrt(ou->variance());
  const double h = duration / static_cast<double>(intervals);
  const double decay = std::exp(-h / ou->correlation_time);
  const double kick = sigma * std::sqrt(-std::expm1(-2.0 * h / ou->correlation_time));
  NormalStream normals(seed);
  real.values(0) = sigma * normals.next();
  for (Eigen::Index i = 0; i < intervals; ++i)
    real.values(i + 1) = real.values(i) * decay + kick * normals.next();
  return real;
}

}  // namespace shuttle
