#pragma once

#include <utility>
#include <vector>

#include "nvltm/spin.hpp"

namespace nvltm {

// Microwave drive state seen by the laser: off, or CW at a frequency.
struct MicrowaveDrive {
  bool on = false;
  double frequency = 0.0;  // Hz, meaningful when on

  static MicrowaveDrive off() { return {false, 0.0}; }
  static MicrowaveDrive at(double f) { return {true, f}; }
};

enum class SweepSense { forward, reverse };

// Bistability latch carried through a current sweep.
struct LaserState {
  bool lasing = false;
  SweepSense direction = SweepSense::forward;
};

enum class ContrastVariant { ideal, step };

// Piecewise-linear P-I model with a latching two-state bistability.
// The microwave response enters through the normalized resonance profile
// u(f) in [0,1]: threshold shift di_mw_peak*u and slope interpolated between
// slope_off (u=0) and slope_on (u=1).
struct PICurveModel {
  double i_th_base = 26.75e-3;  // A, bare forward threshold
  double slope_off = 0.0;       // W/A, microwave off
  double slope_on = 0.0;        // W/A, microwave at profile peak
  double p_step = 416e-6;       // W, discontinuity at the forward threshold
  double p_floor = 3.49e-6;     // W, sub-threshold output
  double di_hyst = 3.94e-3;     // A, forward minus reverse threshold
  double di_pump = 1.33e-3;     // A, shift from the 532 nm pump
  double di_mw_peak = 0.18e-3;  // A, shift at the ODMR profile maximum
  Lineshape mw_shape;           // relative resonance profile

  // cached by finalize()
  double mw_peak_freq = 0.0;
  double mw_peak_value = 0.0;

  void finalize();  // normalizes the microwave profile cache
  void validate() const;

  double mw_response(double f) const;  // u(f) in [0,1]
  double mw_response(const MicrowaveDrive& mw) const {
    return mw.on ? mw_response(mw.frequency) : 0.0;
  }
  double di_mw(double f) const { return di_mw_peak * mw_response(f); }
  double slope_at(double u) const {
    return slope_off - (slope_off - slope_on) * u;
  }
  double forward_threshold(bool pump, double u) const {
    return i_th_base + (pump ? di_pump : 0.0) + di_mw_peak * u;
  }
  double reverse_threshold(bool pump, double u) const {
    return forward_threshold(pump, u) - di_hyst;
  }
};

struct ThresholdPair {
  double forward;  // A
  double reverse;  // A
};

ThresholdPair thresholds(const PICurveModel& m, bool pump, const MicrowaveDrive& mw);

// One sample of the latched P-I response; updates the latch in place.
double pi_curve(const PICurveModel& m, double current, LaserState& state, bool pump,
                const MicrowaveDrive& mw);

// Lasing-branch power with the reverse-sweep latch assumed held (no state).
double pi_branch_power(const PICurveModel& m, double current, bool pump, double u);

// Forward-threshold shift versus microwave frequency, relative to off resonance.
std::vector<std::pair<double, double>> threshold_odmr(const PICurveModel& m,
                                                      const std::vector<double>& freqs);

// ODMR contrast C = (P_off - P_on)/P_off from the two microwave branches at
// one current, pump on, reverse-sweep latch. The ideal variant removes the
// step, the floor and the bistability.
double contrast_vs_current(const PICurveModel& m, double current, ContrastVariant v);

// Closed-form large-current limit of the contrast.
inline double contrast_limit(const PICurveModel& m) {
  return 1.0 - m.slope_on / m.slope_off;
}

// Slopes that place the step-model contrast at c_far (I -> inf) and c_th
// (at the on-resonance reverse threshold), given the step and threshold
// geometry. Least-squares on the two calibration points has an exact solution.
std::pair<double, double> calibrate_slopes(double p_step, double di_hyst,
                                           double di_mw_peak, double c_far,
                                           double c_th);

// Model with the measured threshold ladder (26.75/28.08/28.26, reverse 24.14 mA)
// and slopes calibrated to the contrast targets 0.54% / 2.56%.
PICurveModel paper_default_pi_model();

// Variant matching the sawtooth-sweep session (forward 28.11, reverse 24.14 mA).
PICurveModel sweep_session_pi_model();

// Threshold-shift profile derived from the six-level model: microwave mixing
// rate w_peak*u(f) -> steady-state singlet occupation -> single-pass
// absorbance change, scaled so the profile maximum equals di_peak.
std::vector<double> mw_shift_from_spin_model(const RateModel& pumped, double w_mw_peak,
                                             const Lineshape& shape,
                                             const std::vector<double>& freqs,
                                             double di_peak);

}  // namespace nvltm
