#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvltm/cavity.hpp"
#include "nvltm/laser.hpp"
#include "nvltm/spin.hpp"
#include "nvltm/synth.hpp"

namespace nvltm {

enum class Scenario {
  pi_sweep,
  am_odmr,
  threshold_odmr,
  fm_lockin_magnetometry,
  noise_survey,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);  // throws ConfigError

// Scenario execution parameters (the [run] section).
struct RunSection {
  double fs = 400e3;             // Hz
  double duration = 1.0;         // s per synthesized trace
  double settle = 0.5;           // s dropped before spectral analysis
  double bias_current = 0.0;     // A
  bool pump = true;
  double mw_frequency = 0.0;     // Hz; 0 = microwave off (pi_sweep)
  double scan_min = 0.0;         // Hz, ODMR scan grid
  double scan_max = 0.0;
  int scan_points = 41;
  double f_center = 0.0;         // Hz, FM lock-in operating point
  double f_insensitive = 1.31e9; // Hz, magnetically insensitive reference
  double enbw = 2.6e3;           // Hz
  double phase = -1.5707963267948966;  // rad, lock-in reference phase
  double injection_amplitude = 0.0;    // T
  double injection_frequency = 0.0;    // Hz
  double slope_span = 8e6;       // Hz, slope-calibration sweep width
  int slope_points = 33;
  double band_lo = 0.0;          // Hz, sensitivity band
  double band_hi = 500.0;
  int sweep_periods = 5;
  double segment_seconds = 1.0;
  int workers = 1;
  bool write_raw_trace = true;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::pi_sweep;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;

  SpinSystem spin;
  RateModel rates;
  CavityConfig cavity;

  // [laser]: the P-I model; slopes either explicit or calibrated from the
  // contrast targets.
  double i_th_base = 26.75e-3;
  double di_pump = 1.33e-3;
  double di_hyst = 3.94e-3;
  double di_mw_peak = 0.18e-3;
  double p_step = 416e-6;
  double p_floor = 3.49e-6;
  double slope_off = 0.0;
  double slope_on = 0.0;
  bool calibrate = true;
  double c_far = 0.0054;
  double c_th = 0.0256;

  Lineshape lineshape;  // microwave resonance profile
  ModulationSpec modulation;
  NoiseSpec noise;
  Detector detector;
  RunSection run;

  PICurveModel build_pi_model() const;
  void validate() const;  // throws ConfigError
};

// Scenario defaults with the calibrated paper parameters.
ExperimentConfig default_config(Scenario s);

// FM lock-in magnetometry at a normalized bias I / I_th,r^on.
ExperimentConfig fm_scenario_config(double i_norm);

struct ConfigParse {
  ExperimentConfig config;          // meaningful only when errors is empty
  std::vector<std::string> errors;  // "line N: message"
};

// Parses the sectioned key = value format with unit suffixes. All errors are
// collected with line numbers.
ConfigParse parse_config(const std::string& text);
ExperimentConfig parse_config_or_throw(const std::string& text);  // ConfigError

// Canonical serialization: fixed key order, SI units, 17 significant digits.
// parse(print(cfg)) reproduces cfg exactly.
std::string print_config(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical serialization; whitespace- and
// comment-insensitive identity of the inputs.
std::string config_hash(const ExperimentConfig& cfg);

inline bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b) {
  return print_config(a) == print_config(b);
}

}  // namespace nvltm
