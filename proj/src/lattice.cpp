#include "shuttle/lattice.hpp"

#include <cmath>

namespace shuttle {

double LatticeConfig::recoil_energy() const {
  const double hk = constants::hbar * wavenumber();
  return hk * hk / (2.0 * mass);
}

LatticeConfig LatticeConfig::from_recoil_units(double mass, double wavelength,
                                               double depth_in_recoil,
                                               std::optional<double> distance) {
  LatticeConfig cfg;
  cfg.mass = mass;
  cfg.wavelength = wavelength;
  cfg.distance = distance;
  cfg.depth = depth_in_recoil * cfg.recoil_energy();
  validate(cfg);
  return cfg;
}

LatticeConfig LatticeConfig::cesium_866nm() {
  return from_recoil_units(constants::cesium133_mass_u * constants::atomic_mass_unit, 866e-9,
                           850.0);
}

void validate(const LatticeConfig& cfg) {
  if (!(cfg.mass > 0.0) || !std::isfinite(cfg.mass))
    throw InvalidConfig("lattice: mass must be positive");
  if (!(cfg.wavelength > 0.0) || !std::isfinite(cfg.wavelength))
    throw InvalidConfig("lattice: wavelength must be positive");
  if (!(cfg.depth > 0.0) || !std::isfinite(cfg.depth))
    throw InvalidConfig("lattice: depth must be positive");
  if (cfg.distance && !(*cfg.distance >= 0.0 && std::isfinite(*cfg.distance)))
    throw InvalidConfig("lattice: transport distance must be non-negative");
}

DerivedParams derive_params(const LatticeConfig& cfg) {
  validate(cfg);
  DerivedParams p;
  p.mass = cfg.mass;
  p.wavenumber = cfg.wavenumber();
  p.omega0 = std::sqrt(2.0 * cfg.depth * p.wavenumber * p.wavenumber / cfg.mass);
  p.recoil_energy = cfg.recoil_energy();
  p.period = 2.0 * constants::pi / p.omega0;
  p.lamb_dicke_ratio = constants::hbar * p.omega0 / p.recoil_energy;
  return p;
}

double min_shuttle_time(const DerivedParams& p, const LatticeConfig& cfg) {
  validate(cfg);
  const double d = cfg.transport_distance();
  return std::pow(6.0 * p.mass * d * d / (p.omega0 * p.omega0 * cfg.depth), 0.25);
}

}  // namespace shuttle
