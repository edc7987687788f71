#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nvltm/laser.hpp"
#include "nvltm/trace.hpp"

namespace nvltm {

// Photodetector: watts in, volts out. Saturation is not modeled.
struct Detector {
  double responsivity = 0.7;  // A/W at 1042 nm
  double gain = 1.0e3;        // V/A transimpedance

  double volts(double watts) const { return watts * responsivity * gain; }
};

enum class ModKind { am_square, fm_sine, current_sawtooth };

struct ModulationSpec {
  ModKind kind = ModKind::current_sawtooth;
  double f_mod = 37.0;      // Hz
  double duty = 0.5;        // AM on-fraction; sawtooth rising fraction
  double deviation = 0.0;   // Hz, FM
  double range_min = 0.0;   // A, sawtooth
  double range_max = 0.0;   // A, sawtooth

  void validate() const;
};

struct RinKnot {
  double i_norm;      // I / I_th,r^on
  double multiplier;  // scale on the optical white-noise density
};

struct NoiseSpec {
  bool shot = false;              // photon shot noise on the detected power
  double electronic_floor = 0.0;  // V/sqrt(Hz), white
  double line_50hz = 0.0;         // V, mains pickup amplitude
  double drift_lowfreq = 0.0;     // V/sqrt(Hz) at 1 Hz, 1/f drift coefficient
  std::vector<RinKnot> rin_vs_current;  // empty = multiplier 1 everywhere

  bool any_enabled() const {
    return shot || electronic_floor > 0.0 || line_50hz > 0.0 || drift_lowfreq > 0.0;
  }
  double rin_multiplier(double i_norm) const;  // linear interp, clamped ends
  void validate() const;
};

// Optional magnetic field tone injected into FM synthesis: shifts the
// resonance by gamma * B(t).
struct FieldInjection {
  double amplitude = 0.0;  // T
  double frequency = 0.0;  // Hz
  double gamma = kGammaE;  // Hz/T
};

// Instantaneous sweep current of the sawtooth at time t.
double sawtooth_current(const ModulationSpec& sweep, double t);

// Adds the enabled noise sources in place. Each source draws from an
// independent substream of (seed, source id, sample block), so the result is
// independent of chunking and of which other sources are enabled.
// i_norm selects the rin multiplier; pass NaN when not applicable.
void add_noise(TimeTrace& trace, const NoiseSpec& noise, double mean_power_w,
               const Detector& det, std::uint64_t seed,
               double i_norm = std::numeric_limits<double>::quiet_NaN(),
               int workers = 1);

// Current sawtooth across threshold -> latched P-I response -> volts -> noise.
// If the sweep range does not span both thresholds a warning is emitted and
// the trace is still produced.
TimeTrace synth_pi_sweep(const PICurveModel& model, bool pump, const MicrowaveDrive& mw,
                         const ModulationSpec& sweep, double fs, double duration,
                         const NoiseSpec& noise, const Detector& det,
                         std::uint64_t seed, int workers = 1,
                         std::string* warning = nullptr);

// Square-wave amplitude-modulated microwave at a fixed bias current.
TimeTrace synth_am_odmr(const PICurveModel& model, bool pump, double f_mw,
                        double bias_current, const ModulationSpec& am, double fs,
                        double duration, const NoiseSpec& noise, const Detector& det,
                        std::uint64_t seed, int workers = 1);

std::vector<TimeTrace> synth_am_odmr_scan(const PICurveModel& model, bool pump,
                                          const std::vector<double>& f_mw_list,
                                          double bias_current, const ModulationSpec& am,
                                          double fs, double duration,
                                          const NoiseSpec& noise, const Detector& det,
                                          std::uint64_t seed, int workers = 1);

// Sine frequency-modulated microwave drive at a fixed bias current; the
// lock-in input stream for magnetometry.
TimeTrace synth_fm_lockin_input(const PICurveModel& model, bool pump, double f_center,
                                double bias_current, const ModulationSpec& fm, double fs,
                                double duration, const NoiseSpec& noise,
                                const Detector& det, std::uint64_t seed,
                                const FieldInjection& injection = {}, int workers = 1);

// Noiseless mean detected power of the FM protocol (for shot-noise sizing).
double fm_mean_power(const PICurveModel& model, bool pump, double f_center,
                     double bias_current, const ModulationSpec& fm);

// (current, volts) pairs of the rising and falling sweep segments, each
// sorted by current ascending.
struct PIBranches {
  std::vector<double> i_forward, v_forward;
  std::vector<double> i_reverse, v_reverse;
};
PIBranches reconstruct_pi_branches(const TimeTrace& trace, const ModulationSpec& sweep);

}  // namespace nvltm
