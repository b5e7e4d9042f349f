#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/philox.hpp"
#include "support.hpp"

using namespace shuttle;
using testing::rel_diff;

namespace {

// Composite Simpson on [a, b] with an even number of panels.
template <typename F>
double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  const B zero = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  CHECK(zero == B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const B ones = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                      {0xffffffffu, 0xffffffffu});
  CHECK(ones == B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const B digits = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
  CHECK(digits == B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream moments and reproducibility") {
  NormalStream a(42), b(42), c(43);
  double sum = 0, sum2 = 0, sum3 = 0, sum4 = 0;
  bool differs = false;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double x = a.next();
    CHECK_EQ(x, b.next());
    differs |= x != c.next();
    sum += x;
    sum2 += x * x;
    sum3 += x * x * x;
    sum4 += x * x * x * x;
  }
  CHECK(differs);
  const double n = count;
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum3 / n) < 4.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(sum4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("channel names") {
  for (Channel c : {Channel::accordion, Channel::amplitude, Channel::position})
    CHECK(channel_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(channel_from_string("rocking"), InvalidArgument);
}

TEST_CASE("OU correlation values and integral") {
  const double D = 3e-6, tau = 2e-6;
  const NoiseSpec spec{Channel::accordion, OrnsteinUhlenbeck{D, tau}};
  CHECK(correlation(spec, 0.0) == doctest::Approx(D / (2 * tau)).epsilon(1e-15));
  CHECK(correlation(spec, tau) == doctest::Approx(D / (2 * tau) * std::exp(-1.0)).epsilon(1e-15));
  const double integral = simpson([&](double t) { return correlation(spec, t); }, 0.0, 60 * tau, 6000);
  CHECK(rel_diff(integral, D / 2) < 1e-10);
  CHECK_THROWS_AS(correlation(spec, -1.0), InvalidArgument);
}

TEST_CASE("white correlation cannot be evaluated pointwise") {
  const NoiseSpec spec{Channel::amplitude, WhiteNoise{1e-6}};
  CHECK_THROWS_AS(correlation(spec, 0.0), UnsupportedOperation);
  CHECK(noise_strength(spec.model) == 1e-6);
}

TEST_CASE("spectral densities") {
  const double D = 2e-6;
  const NoiseSpec white{Channel::accordion, WhiteNoise{D}};
  for (double w : {0.0, 1e3, 7e5, 1e9})
    CHECK(spectral_density(white, w) == doctest::Approx(D / (2 * constants::pi)).epsilon(1e-15));

  const double tau = 1.5e-6;
  const NoiseSpec ou{Channel::accordion, OrnsteinUhlenbeck{D, tau}};
  for (double w : {0.0, 2e5, 1.4e6, 5e6}) {
    // (1/pi) int_0^inf alpha cos(w t) dt with alpha decaying past 60 tau.
    const double oracle =
        simpson([&](double t) { return correlation(ou, t) * std::cos(w * t); }, 0.0, 60 * tau,
                200000) /
        constants::pi;
    CHECK(rel_diff(spectral_density(ou, w), oracle) < 1e-9);
    CHECK(rel_diff(spectral_density(ou, w), D / (2 * constants::pi) / (1 + w * w * tau * tau)) <
          1e-14);
  }
  // tau -> 0 approaches the white value.
  double previous = 1.0;
  for (double t : {1e-6, 1e-8, 1e-10, 1e-12}) {
    const NoiseSpec narrow{Channel::accordion, OrnsteinUhlenbeck{D, t}};
    const double gap = rel_diff(spectral_density(narrow, 1e6), spectral_density(white, 1e6));
    CHECK(gap <= previous);
    previous = gap;
  }
  CHECK(previous < 1e-10);

  const NoiseSpec position{Channel::position, OrnsteinUhlenbeck{D, tau}};
  CHECK_THROWS_AS(spectral_density(position, 1e6), InvalidArgument);
  const double k = 2 * constants::pi / 866e-9;
  CHECK(rel_diff(spectral_density(position, 1e6, k), spectral_density(ou, 1e6) / (k * k)) < 1e-15);
}

TEST_CASE("tabulated OU table reproduces the OU spectral density") {
  const double D = 1e-6, tau = 1e-6;
  const NoiseSpec ou{Channel::amplitude, OrnsteinUhlenbeck{D, tau}};
  TabulatedCorrelation tab;
  const int rows = 4001;
  tab.times.resize(rows);
  tab.values.resize(rows);
  for (int i = 0; i < rows; ++i) {
    tab.times(i) = i * 40 * tau / (rows - 1);
    tab.values(i) = correlation(ou, tab.times(i));
  }
  const NoiseSpec spec{Channel::amplitude, tab};
  CHECK(rel_diff(tab.strength(), D) < 1e-4);
  for (double w : {0.0, 1e5, 1e6, 3e6})
    CHECK(rel_diff(spectral_density(spec, w), spectral_density(ou, w)) < 1e-4);
  CHECK(rel_diff(correlation(spec, 0.5 * tau), correlation(ou, 0.5 * tau)) < 1e-4);
  CHECK_THROWS_AS(correlation(spec, 41 * tau), RangeError);
}

TEST_CASE("tabulated CSV parsing") {
  std::istringstream good("# t_seconds,alpha\n0,2.0\n1e-6, 1.0\n3e-6,0.5\n");
  const auto tab = parse_tabulated_csv(good);
  REQUIRE(tab.times.size() == 3);
  CHECK(tab.values(1) == 1.0);
  CHECK(tab.max_time() == 3e-6);
  // Trapezoid: 1e-6 * 1.5 + 2e-6 * 0.75 = 3e-6, doubled.
  CHECK(rel_diff(tab.strength(), 6e-6) < 1e-15);

  auto fails_on = [](const std::string& text, int line) {
    std::istringstream in(text);
    try {
      parse_tabulated_csv(in);
    } catch (const ParseError& e) {
      return e.line() == line;
    }
    return false;
  };
  CHECK(fails_on("0,1\n1,2\n1,3\n", 3));
  CHECK(fails_on("0.5,1\n1,2\n", 1));
  CHECK(fails_on("0,1\n1,abc\n", 2));
  CHECK(fails_on("0,1\n1,2,3\n", 2));
  CHECK(fails_on("0,-1\n1,0\n", 1));
  CHECK(fails_on("0,1\n", 0));
  CHECK(fails_on("# header\n# second comment\n", 2));
}

TEST_CASE("OU path sampling") {
  const double tau = 1e-6;
  const NoiseSpec zero{Channel::accordion, OrnsteinUhlenbeck{0.0, tau}};
  const auto flat = sample_ou_path(zero, 5e-6, 100, 1);
  CHECK(flat.values.cwiseAbs().maxCoeff() == 0.0);

  const NoiseSpec spec{Channel::accordion, OrnsteinUhlenbeck{2e-6, tau}};
  const auto a = sample_ou_path(spec, 5e-6, 100, 99);
  const auto b = sample_ou_path(spec, 5e-6, 100, 99);
  CHECK(a.values == b.values);
  CHECK(a.intervals() == 100);
  CHECK(a.time(100) == 5e-6);
  CHECK(a.interpolate(a.time(37)) == a.values(37));
  CHECK(a.interpolate(0.5 * (a.time(3) + a.time(4))) ==
        doctest::Approx(0.5 * (a.values(3) + a.values(4))));

  CHECK_THROWS_AS(sample_ou_path(spec, 5e-6, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_ou_path(spec, 0.0, 10, 0), InvalidArgument);
  const NoiseSpec bad_tau{Channel::accordion, OrnsteinUhlenbeck{1e-6, 0.0}};
  CHECK_THROWS_AS(sample_ou_path(bad_tau, 1e-6, 10, 0), InvalidArgument);
  const NoiseSpec white{Channel::accordion, WhiteNoise{1e-6}};
  CHECK_THROWS_AS(sample_ou_path(white, 1e-6, 10, 0), InvalidArgument);
}

TEST_CASE("OU ensemble mean and covariance over 1e5 paths") {
  const double D = 2e-6, tau = 1e-6;
  const NoiseSpec spec{Channel::accordion, OrnsteinUhlenbeck{D, tau}};
  const int paths = 100000;
  const int per_tau = 10;
  const int intervals = 4 * per_tau;  // T = 4 tau
  const int base = 5;                 // reference index t = tau / 2
  const int lags[] = {0, per_tau, 3 * per_tau};
  std::vector<double> mean(intervals + 1, 0.0);
  double cov[3] = {0, 0, 0}, cov2[3] = {0, 0, 0};
  for (int i = 0; i < paths; ++i) {
    const auto real = sample_ou_path(spec, 4 * tau, intervals, path_seed(777, i));
    for (int j = 0; j <= intervals; ++j) mean[j] += real.values(j);
    for (int l = 0; l < 3; ++l) {
      const double prod = real.values(base) * real.values(base + lags[l]);
      cov[l] += prod;
      cov2[l] += prod * prod;
    }
  }
  const double var = D / (2 * tau);
  const double se_mean = std::sqrt(var / paths);
  for (int j = 0; j <= intervals; ++j) CHECK(std::abs(mean[j] / paths) < 4 * se_mean);
  for (int l = 0; l < 3; ++l) {
    const double m = cov[l] / paths;
    const double se = std::sqrt((cov2[l] / paths - m * m) / (paths - 1));
    const double expected = var * std::exp(-static_cast<double>(lags[l]) / per_tau);
    CHECK(std::abs(m - expected) < 4 * se);
  }
}

TEST_CASE("path seeds") {
  CHECK(path_seed(20200915, 0) == 20200915u);
  CHECK(path_seed(20200915, 3) == (20200915u ^ 3u));
}
