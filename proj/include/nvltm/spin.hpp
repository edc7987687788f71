#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nvltm/constants.hpp"

namespace nvltm {

using Vec3 = std::array<double, 3>;

// Ground-state spin-1 Hamiltonian parameters for an NV ensemble.
struct SpinSystem {
  double d_splitting = kZeroFieldSplitting;  // Hz
  double e_strain = 0.0;                     // Hz (observed splitting is 2E)
  double gamma_e = kGammaE;                  // Hz/T
  Vec3 b_field{0.0, 0.0, 0.0};               // T, lab frame
  std::array<Vec3, 4> orientations = default_orientations();

  static std::array<Vec3, 4> default_orientations();
  void validate() const;  // throws InvalidInput
};

// Six-level incoherent rate model:
//   |1> ms=0 ground, |2> ms=+-1 ground, |3> ms=0 excited, |4> ms=+-1 excited,
//   |5> singlet upper, |6> singlet lower (metastable, 1042 nm absorber).
struct RateModel {
  double k_rad = 6.5e7;  // |3>->|1>, |4>->|2>, 1/s
  double k35 = 1.1e7;    // ISC |3>->|5>
  double k45 = 8.0e7;    // ISC |4>->|5>
  double k56 = 1.0e9;    // singlet internal decay
  double k61 = 4.8e6;    // ISC |6>->|1>
  double k62 = 1.6e6;    // ISC |6>->|2>
  double w_pump = 0.0;   // |1>->|3>, |2>->|4> optical pump rate
  double w_mw = 0.0;     // incoherent |1><->|2> mixing rate

  void validate() const;       // throws InvalidInput on negative rates
  bool physical_nv() const;    // k45 > k35 and k61 > k62
};

struct Populations {
  std::array<double, 6> p{};  // occupation of |1>..|6>, sums to 1
};

// Sum-of-Lorentzians resonance profile. Amplitudes are signed peak values;
// all peaks share one FWHM.
struct Lineshape {
  std::vector<double> centers;     // Hz
  double fwhm = 0.0;               // Hz
  std::vector<double> amplitudes;  // per-peak, dimensionless or caller's units

  void validate() const;
};

struct ResonancePair {
  std::size_t orientation;
  double f_minus;  // Hz
  double f_plus;   // Hz
};

// Eight ODMR transition frequencies: per orientation, the two transitions
// from the lowest eigenstate of D*Sz^2 + E*(Sx^2-Sy^2) + gamma_e*(B.S).
std::vector<ResonancePair> resonance_frequencies(const SpinSystem& sys);

// Unique steady state of the rate matrix with sum(p) = 1.
Populations steady_state(const RateModel& m);

// Single-pass absorbance alpha = sigma * (n_nv * p6) * path_length.
// sigma in cm^2, n_nv in cm^-3, path_length in cm.
double singlet_absorption(const Populations& pops, double sigma_cm2,
                          double n_nv_cm3, double path_length_cm);

inline double transmission_from_absorbance(double alpha) {
  return std::exp(-alpha);
}

// ppm NV content -> cm^-3 using the diamond carbon density.
inline double ppm_to_cm3(double ppm) { return ppm * 1e-6 * kCarbonDensity; }

// Evaluate the Lorentzian sum at a microwave frequency.
double odmr_lineshape(double f_mw, const Lineshape& shape);

// Global maximum of the lineshape (value and location). Ties between the two
// mirror humps of a symmetric doublet resolve to the lower frequency.
struct LineshapePeak {
  double frequency;
  double value;
};
LineshapePeak lineshape_peak(const Lineshape& shape);

// T2* = 1/(pi * fwhm) for a Lorentzian ODMR line.
double t2star_from_linewidth(double fwhm_hz);

}  // namespace nvltm
