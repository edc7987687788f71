#pragma once

#include <vector>

#include "nvltm/constants.hpp"
#include "nvltm/spectral.hpp"

namespace nvltm {

struct SlopeFit {
  double slope = 0.0;     // value units per Hz
  double crossing = 0.0;  // Hz
};

// Linear fit around the central zero crossing of a dispersive (lock-in ODMR)
// curve; the window is the central 30% of points around the crossing.
SlopeFit lockin_slope(const std::vector<double>& freqs,
                      const std::vector<double>& values);

// Volts/sqrt(Hz) -> Tesla/sqrt(Hz) using the lock-in slope and the
// gyromagnetic ratio.
SpectralDensity volts_to_tesla(const SpectralDensity& sd, double slope_v_per_hz,
                               double gamma_e = kGammaE);

// Arithmetic mean of the density over [f_lo, f_hi] (inclusive).
double empirical_sensitivity(const SpectralDensity& sd, double f_lo, double f_hi);

// Mean density between 1 and 5 kHz; the per-current laser-noise figure.
double laser_noise_metric(const SpectralDensity& sd);

// Shot-noise-limited sensitivity in the small-contrast limit:
//   eta_B = 4/(3*sqrt(3)) * (1/gamma_e) * fwhm / (C * sqrt(rate)).
double shot_noise_sensitivity(double fwhm_hz, double contrast, double rate_per_s,
                              double gamma_e = kGammaE);

// C = (V_off - V_on) / V_off.
double odmr_contrast(double v_on, double v_off);

}  // namespace nvltm
