#pragma once

#include <string>
#include <vector>

#include "nvltm/trace.hpp"

namespace nvltm {

// One-sided linear (amplitude) spectral density.
struct SpectralDensity {
  std::vector<double> freqs;   // Hz, 0 .. fs/2
  std::vector<double> values;  // per sqrt(Hz)
  std::string units = "V/sqrt(Hz)";
  int n_segments = 0;

  double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
  void validate() const;
};

// Segmented rectangular-window LSD: non-overlapping segments, DFT each,
// power-averaged across segments. DC and Nyquist bins carry no one-sided
// factor 2.
SpectralDensity lsd(const TimeTrace& trace, double segment_seconds = 1.0);

// Integral of the one-sided power density (should equal the mean square of
// the analyzed samples).
double integrated_power(const SpectralDensity& sd);

// Value at the bin nearest a frequency.
double bin_value(const SpectralDensity& sd, double freq);

}  // namespace nvltm
