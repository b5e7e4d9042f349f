#pragma once

#include <cmath>
#include <limits>

#include "shuttle/lattice.hpp"

namespace testing {

inline const shuttle::LatticeConfig& cesium() {
  static const shuttle::LatticeConfig cfg = shuttle::LatticeConfig::cesium_866nm();
  return cfg;
}

inline const shuttle::DerivedParams& paper() {
  static const shuttle::DerivedParams p = shuttle::derive_params(cesium());
  return p;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testing
