#pragma once

#include <numbers>

namespace shuttle::constants {

// CODATA 2018, rounded to 10 significant digits.
inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double atomic_mass_unit = 1.660539067e-27;  // kg
inline constexpr double cesium133_mass_u = 132.9054520;      // u

inline constexpr double pi = std::numbers::pi;

}  // namespace shuttle::constants
