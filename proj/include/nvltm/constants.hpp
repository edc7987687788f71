#pragma once

namespace nvltm {

// Physical constants (SI unless noted)
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// NV electron gyromagnetic ratio, Hz/T (28.024 MHz/mT)
inline constexpr double kGammaE = 28.024e9;

// NV ground-state zero-field splitting, Hz
inline constexpr double kZeroFieldSplitting = 2.87e9;

// Carbon number density of diamond, cm^-3 (for ppm -> cm^-3 conversion)
inline constexpr double kCarbonDensity = 1.76e23;

// Singlet probe wavelength, m
inline constexpr double kProbeWavelength = 1042e-9;

inline constexpr double probe_photon_energy() {
  return kPlanck * kSpeedOfLight / kProbeWavelength;  // J
}

}  // namespace nvltm
