#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace shuttle {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_intervals = 20000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // sum of |Kronrod - Gauss| over the final panels
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at Kronrod nodes 1, 3, 5 and 7.
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  double magnitude = std::abs(kronrod);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    magnitude += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  Panel p{a, b, kronrod * half, 0.0};
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * magnitude * std::abs(half);
  p.error = std::max(std::abs((kronrod - gauss) * half), roundoff);
  return p;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over consecutive panels.
///
/// `breakpoints` must be increasing and hold at least two entries; kinks or sharp
/// features of f belong on a breakpoint. The panel with the largest error estimate
/// is bisected until the summed estimate meets max(abs_tol, rel_tol |I|).
template <typename F>
QuadratureResult integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                    const QuadratureOptions& opts = {}) {
  QuadratureResult out;
  std::priority_queue<detail::Panel> panels;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    auto p = detail::gauss_kronrod_15(f, breakpoints[i], breakpoints[i + 1]);
    out.evaluations += 15;
    value += p.value;
    error += p.error;
    panels.push(p);
  }
  int count = static_cast<int>(panels.size());
  while (!panels.empty() && error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    if (count >= opts.max_intervals) {
      out.converged = false;
      break;
    }
    const detail::Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    panels.pop();
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum from the final panels so the value carries no drift from the updates.
  value = 0.0;
  error = 0.0;
  std::vector<detail::Panel> final_panels;
  final_panels.reserve(panels.size());
  while (!panels.empty()) {
    final_panels.push_back(panels.top());
    panels.pop();
  }
  std::sort(final_panels.begin(), final_panels.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
  for (const auto& p : final_panels) {
    value += p.value;
    error += p.error;
  }
  out.value = value;
  out.error = error;
  return out;
}

template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    const QuadratureOptions& opts = {}) {
  const double ends[2] = {a, b};
  return integrate_adaptive(std::forward<F>(f), std::span<const double>(ends, 2), opts);
}

}  // namespace shuttle
