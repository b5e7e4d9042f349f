#pragma once

#include <cmath>
#include <optional>

#include "shuttle/constants.hpp"
#include "shuttle/errors.hpp"

namespace shuttle {

/// Optical lattice a sin^2(kx + phi) holding one atom, all SI.
struct LatticeConfig {
  double mass = 0.0;        // kg
  double wavelength = 0.0;  // m
  double depth = 0.0;       // J
  std::optional<double> distance;  // m, defaults to one lattice spacing

  double wavenumber() const { return 2.0 * constants::pi / wavelength; }
  double recoil_energy() const;
  /// Transport distance; half a wavelength unless overridden.
  double transport_distance() const { return distance.value_or(0.5 * wavelength); }

  /// Builds a config from a depth given in recoil energies.
  static LatticeConfig from_recoil_units(double mass, double wavelength, double depth_in_recoil,
                                         std::optional<double> distance = std::nullopt);

  /// 133Cs in an 866 nm lattice, 850 E_R deep.
  static LatticeConfig cesium_866nm();
};

void validate(const LatticeConfig& cfg);

/// Harmonic quantities of a single lattice well.
struct DerivedParams {
  double omega0 = 0.0;             // rad/s
  double recoil_energy = 0.0;      // J
  double period = 0.0;             // s
  double lamb_dicke_ratio = 0.0;   // hbar omega0 / E_R
  double mass = 0.0;               // kg
  double wavenumber = 0.0;         // 1/m

  double energy_quantum() const { return constants::hbar * omega0; }
  /// Unexcited energy of mode n, hbar omega0 (n + 1/2).
  double mode_energy(int n) const { return energy_quantum() * (n + 0.5); }
};

DerivedParams derive_params(const LatticeConfig& cfg);

/// Width and center of the transport mode at the final time.
template <typename Scalar>
struct FinalState {
  Scalar rho{1};
  Scalar rho_dot{0};
  Scalar qc{0};
  Scalar qc_dot{0};
  int n = 0;
};

/// Excess energy from rho - 1 and q_c - d given directly.
template <typename Scalar>
Scalar excess_energy_from_deviation(Scalar rho_offset, Scalar rho_dot, Scalar qc_offset,
                                    Scalar qc_dot, int n, const DerivedParams& p) {
  const Scalar rho = Scalar(1) + rho_offset;
  if (!(rho > Scalar(0))) throw DomainError("final_energy: rho(T) must be positive");
  const Scalar w = p.omega0;
  const Scalar m = p.mass;
  const Scalar hbar = constants::hbar;
  const Scalar level = Scalar(2 * n + 1);
  const Scalar stretch = rho_offset * (rho + Scalar(1)) / rho;
  return Scalar(0.5) * m * w * w * qc_offset * qc_offset +
         hbar * w / Scalar(4) * level * stretch * stretch + Scalar(0.5) * m * qc_dot * qc_dot +
         hbar / (Scalar(4) * w) * level * rho_dot * rho_dot;
}

/// Energy above hbar omega0 (n + 1/2) left in the final, noiseless trap.
///
/// Written as a sum of squares, (rho^2 - 1)^2 / rho^2 replacing (1 + rho^4) / rho^2 - 2,
/// so tiny excitations do not cancel against the zero-point energy.
template <typename Scalar>
Scalar excess_energy(const FinalState<Scalar>& fs, const DerivedParams& p, Scalar distance) {
  return excess_energy_from_deviation(fs.rho - Scalar(1), fs.rho_dot, fs.qc - distance, fs.qc_dot,
                                      fs.n, p);
}

/// Expectation value of the noiseless final Hamiltonian for a mode-n state.
template <typename Scalar>
Scalar final_energy(const FinalState<Scalar>& fs, const DerivedParams& p, Scalar distance) {
  const Scalar excess = excess_energy(fs, p, distance);
  return Scalar(p.mode_energy(fs.n)) + excess;
}

/// Shuttling time at which 6 m d^2 / (T^4 omega0^2 a) reaches one; shorter
/// protocols push the atom out of the harmonic part of the well.
double min_shuttle_time(const DerivedParams& p, const LatticeConfig& cfg);

}  // namespace shuttle
