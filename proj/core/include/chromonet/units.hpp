#pragma once

namespace chromonet::units {

// Boltzmann constant in cm^-1 per kelvin.
inline constexpr double kBoltzmannWavenumber = 0.6950348;

// 2*pi*c: converts an energy in cm^-1 into an angular frequency in rad/ps.
inline constexpr double kWavenumberToRadPerPs = 0.1883652;

inline constexpr double to_angular(double wavenumber) noexcept {
    return kWavenumberToRadPerPs * wavenumber;
}

// Quantities carrying cm^-2 (products of two energies) pick up the factor twice.
inline constexpr double to_angular_squared(double wavenumber_sq) noexcept {
    return kWavenumberToRadPerPs * kWavenumberToRadPerPs * wavenumber_sq;
}

inline constexpr double thermal_energy(double temperature_kelvin) noexcept {
    return kBoltzmannWavenumber * temperature_kelvin;
}

}  // namespace chromonet::units
