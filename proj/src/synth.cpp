#include "nvltm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "nvltm/constants.hpp"
#include "nvltm/errors.hpp"
#include "nvltm/rng.hpp"

namespace nvltm {

namespace {

using std::numbers::pi;

constexpr std::size_t kNoiseBlock = 1 << 16;

// Substream source ids; fixed so enabling one source never moves another.
enum : std::uint64_t {
  kSrcShot = 1,
  kSrcElectronic = 2,
  kSrcLine = 3,
  kSrcDrift = 4,
};

void for_each_block(std::size_t n, int workers,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t nblocks = (n + kNoiseBlock - 1) / kNoiseBlock;
  auto run_range = [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t lo = b * kNoiseBlock;
      const std::size_t hi = std::min(n, lo + kNoiseBlock);
      fn(b, lo, hi);
    }
  };
  if (workers <= 1 || nblocks <= 1) {
    run_range(0, nblocks);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(workers, nblocks);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  const std::size_t per = (nblocks + nw - 1) / nw;
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t b0 = w * per;
    const std::size_t b1 = std::min(nblocks, b0 + per);
    if (b0 >= b1) break;
    pool.emplace_back(run_range, b0, b1);
  }
  for (auto& t : pool) t.join();
}

// White Gaussian source, blockwise substreams.
void add_white(TimeTrace& trace, std::uint64_t seed, std::uint64_t source, double sigma,
               int workers) {
  if (sigma <= 0.0) return;
  double* s = trace.samples.data();
  for_each_block(trace.samples.size(), workers,
                 [&](std::size_t b, std::size_t lo, std::size_t hi) {
                   GaussianStream g(substream_seed(seed, source, b));
                   for (std::size_t i = lo; i < hi; ++i) s[i] += sigma * g.normal();
                 });
}

}  // namespace

void ModulationSpec::validate() const {
  if (!(f_mod > 0.0)) throw InvalidInput("ModulationSpec: f_mod must be > 0");
  if (!(duty > 0.0 && duty < 1.0)) throw InvalidInput("ModulationSpec: duty must be in (0,1)");
  if (deviation < 0.0) throw InvalidInput("ModulationSpec: deviation must be >= 0");
  if (kind == ModKind::current_sawtooth && !(range_max > range_min))
    throw InvalidInput("ModulationSpec: sawtooth range must have range_max > range_min");
}

double NoiseSpec::rin_multiplier(double i_norm) const {
  if (rin_vs_current.empty() || std::isnan(i_norm)) return 1.0;
  const auto& t = rin_vs_current;
  if (i_norm <= t.front().i_norm) return t.front().multiplier;
  if (i_norm >= t.back().i_norm) return t.back().multiplier;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (i_norm <= t[k].i_norm) {
      const double w = (i_norm - t[k - 1].i_norm) / (t[k].i_norm - t[k - 1].i_norm);
      return t[k - 1].multiplier + w * (t[k].multiplier - t[k - 1].multiplier);
    }
  }
  return t.back().multiplier;
}

void NoiseSpec::validate() const {
  if (electronic_floor < 0.0 || line_50hz < 0.0 || drift_lowfreq < 0.0)
    throw InvalidInput("NoiseSpec: amplitudes must be >= 0");
  for (std::size_t k = 1; k < rin_vs_current.size(); ++k)
    if (!(rin_vs_current[k].i_norm > rin_vs_current[k - 1].i_norm))
      throw InvalidInput("NoiseSpec: rin table keys must be strictly increasing");
  for (const auto& k : rin_vs_current)
    if (k.multiplier < 0.0) throw InvalidInput("NoiseSpec: rin multipliers must be >= 0");
}

double sawtooth_current(const ModulationSpec& sweep, double t) {
  const double period = 1.0 / sweep.f_mod;
  double tau = std::fmod(t, period);
  if (tau < 0.0) tau += period;
  const double t_up = sweep.duty * period;
  const double span = sweep.range_max - sweep.range_min;
  if (tau < t_up) return sweep.range_min + span * tau / t_up;
  return sweep.range_max - span * (tau - t_up) / (period - t_up);
}

void add_noise(TimeTrace& trace, const NoiseSpec& noise, double mean_power_w,
               const Detector& det, std::uint64_t seed, double i_norm, int workers) {
  noise.validate();
  trace.validate();
  const double fs = trace.fs;

  // (a) optical white noise: shot-noise density scaled by the rin multiplier.
  if (noise.shot && mean_power_w > 0.0) {
    const double var_w = 2.0 * probe_photon_energy() * mean_power_w * (fs / 2.0);
    const double sigma_v =
        noise.rin_multiplier(i_norm) * det.responsivity * det.gain * std::sqrt(var_w);
    add_white(trace, seed, kSrcShot, sigma_v, workers);
  }

  // (b) electronic white floor.
  if (noise.electronic_floor > 0.0) {
    const double sigma = noise.electronic_floor * std::sqrt(fs / 2.0);
    add_white(trace, seed, kSrcElectronic, sigma, workers);
  }

  // (c) 50 Hz mains line with a seeded phase.
  if (noise.line_50hz > 0.0) {
    GaussianStream g(substream_seed(seed, kSrcLine, 0));
    const double phase = 2.0 * pi * g.uniform();
    double* s = trace.samples.data();
    const double t0 = trace.t0;
    for_each_block(trace.samples.size(), workers,
                   [&](std::size_t, std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                       const double t = t0 + static_cast<double>(i) / fs;
                       s[i] += noise.line_50hz * std::sin(2.0 * pi * 50.0 * t + phase);
                     }
                   });
  }

  // (d) 1/f drift: random-phase tones, log-spaced 0.01-100 Hz, equal power per
  // log interval. Amplitude chosen so the density tracks drift_lowfreq/sqrt(f).
  if (noise.drift_lowfreq > 0.0) {
    constexpr int kPerDecade = 8;
    constexpr int kTones = 4 * kPerDecade + 1;  // 0.01 .. 100 Hz
    std::array<double, kTones> freq, phase;
    GaussianStream g(substream_seed(seed, kSrcDrift, 0));
    for (int k = 0; k < kTones; ++k) {
      freq[k] = std::pow(10.0, -2.0 + static_cast<double>(k) / kPerDecade);
      phase[k] = 2.0 * pi * g.uniform();
    }
    const double amp = noise.drift_lowfreq * std::sqrt(2.0 * std::numbers::ln10 / kPerDecade);
    double* s = trace.samples.data();
    const double t0 = trace.t0;
    for_each_block(trace.samples.size(), workers,
                   [&](std::size_t, std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                       const double t = t0 + static_cast<double>(i) / fs;
                       double v = 0.0;
                       for (int k = 0; k < kTones; ++k)
                         v += std::sin(2.0 * pi * freq[k] * t + phase[k]);
                       s[i] += amp * v;
                     }
                   });
  }
}

TimeTrace synth_pi_sweep(const PICurveModel& model, bool pump, const MicrowaveDrive& mw,
                         const ModulationSpec& sweep, double fs, double duration,
                         const NoiseSpec& noise, const Detector& det, std::uint64_t seed,
                         int workers, std::string* warning) {
  model.validate();
  sweep.validate();
  if (sweep.kind != ModKind::current_sawtooth)
    throw InvalidInput("synth_pi_sweep: sweep kind must be current_sawtooth");
  const auto th = thresholds(model, pump, mw);
  if (warning) warning->clear();
  if ((sweep.range_min > th.reverse || sweep.range_max < th.forward) && warning)
    *warning = "sweep range does not span both thresholds";

  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  TimeTrace trace;
  trace.fs = fs;
  trace.meta.protocol = "pi_sweep";
  trace.meta.seed = seed;
  trace.samples.resize(n);

  LaserState state;  // starts below threshold, not lasing
  double power_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double current = sawtooth_current(sweep, t);
    const double p = pi_curve(model, current, state, pump, mw);
    power_sum += p;
    trace.samples[i] = det.volts(p);
  }
  add_noise(trace, noise, power_sum / static_cast<double>(n), det, seed,
            std::numeric_limits<double>::quiet_NaN(), workers);
  return trace;
}

TimeTrace synth_am_odmr(const PICurveModel& model, bool pump, double f_mw,
                        double bias_current, const ModulationSpec& am, double fs,
                        double duration, const NoiseSpec& noise, const Detector& det,
                        std::uint64_t seed, int workers) {
  model.validate();
  am.validate();
  if (am.kind != ModKind::am_square)
    throw InvalidInput("synth_am_odmr: modulation kind must be am_square");

  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  TimeTrace trace;
  trace.fs = fs;
  trace.meta.protocol = "am_odmr";
  trace.meta.seed = seed;
  trace.samples.resize(n);

  const double period = 1.0 / am.f_mod;
  LaserState state{true, SweepSense::reverse};  // biased from above
  double power_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const bool mw_on = std::fmod(t, period) < am.duty * period;
    const MicrowaveDrive drive = mw_on ? MicrowaveDrive::at(f_mw) : MicrowaveDrive::off();
    const double p = pi_curve(model, bias_current, state, pump, drive);
    power_sum += p;
    trace.samples[i] = det.volts(p);
  }
  const double i_norm = bias_current / model.reverse_threshold(pump, 1.0);
  add_noise(trace, noise, power_sum / static_cast<double>(n), det, seed, i_norm, workers);
  return trace;
}

std::vector<TimeTrace> synth_am_odmr_scan(const PICurveModel& model, bool pump,
                                          const std::vector<double>& f_mw_list,
                                          double bias_current, const ModulationSpec& am,
                                          double fs, double duration,
                                          const NoiseSpec& noise, const Detector& det,
                                          std::uint64_t seed, int workers) {
  std::vector<TimeTrace> out;
  out.reserve(f_mw_list.size());
  for (std::size_t k = 0; k < f_mw_list.size(); ++k)
    out.push_back(synth_am_odmr(model, pump, f_mw_list[k], bias_current, am, fs, duration,
                                noise, det, substream_seed(seed, 0x40, k), workers));
  return out;
}

TimeTrace synth_fm_lockin_input(const PICurveModel& model, bool pump, double f_center,
                                double bias_current, const ModulationSpec& fm, double fs,
                                double duration, const NoiseSpec& noise,
                                const Detector& det, std::uint64_t seed,
                                const FieldInjection& injection, int workers) {
  model.validate();
  fm.validate();
  if (fm.kind != ModKind::fm_sine)
    throw InvalidInput("synth_fm_lockin_input: modulation kind must be fm_sine");
  if (!(fm.deviation > 0.0))
    throw InvalidInput("synth_fm_lockin_input: deviation must be > 0");

  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  TimeTrace trace;
  trace.fs = fs;
  trace.meta.protocol = "fm_lockin";
  trace.meta.seed = seed;
  trace.samples.resize(n);

  LaserState state{true, SweepSense::reverse};
  double power_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double f_inst = f_center + fm.deviation * std::sin(2.0 * pi * fm.f_mod * t);
    if (injection.amplitude != 0.0) {
      // A field shifts the resonance by gamma*B; equivalent to shifting the
      // drive the other way.
      f_inst -= injection.gamma * injection.amplitude *
                std::sin(2.0 * pi * injection.frequency * t);
    }
    const double p = pi_curve(model, bias_current, state, pump, MicrowaveDrive::at(f_inst));
    power_sum += p;
    trace.samples[i] = det.volts(p);
  }
  const double i_norm = bias_current / model.reverse_threshold(pump, 1.0);
  add_noise(trace, noise, power_sum / static_cast<double>(n), det, seed, i_norm, workers);
  return trace;
}

double fm_mean_power(const PICurveModel& model, bool pump, double f_center,
                     double bias_current, const ModulationSpec& fm) {
  // One modulation period, noiseless.
  const int n = 4096;
  LaserState state{true, SweepSense::reverse};
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n / fm.f_mod;
    const double f = f_center + fm.deviation * std::sin(2.0 * pi * fm.f_mod * t);
    sum += pi_curve(model, bias_current, state, pump, MicrowaveDrive::at(f));
  }
  return sum / n;
}

PIBranches reconstruct_pi_branches(const TimeTrace& trace, const ModulationSpec& sweep) {
  sweep.validate();
  trace.validate();
  const double period = 1.0 / sweep.f_mod;
  const double t_up = sweep.duty * period;

  std::vector<std::pair<double, double>> fwd, rev;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const double t = trace.time_at(i) - trace.t0;
    const double tau = std::fmod(t, period);
    const double current = sawtooth_current(sweep, t);
    if (tau < t_up)
      fwd.emplace_back(current, trace.samples[i]);
    else
      rev.emplace_back(current, trace.samples[i]);
  }
  auto by_current = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::stable_sort(fwd.begin(), fwd.end(), by_current);
  std::stable_sort(rev.begin(), rev.end(), by_current);

  PIBranches out;
  for (const auto& [i, v] : fwd) {
    out.i_forward.push_back(i);
    out.v_forward.push_back(v);
  }
  for (const auto& [i, v] : rev) {
    out.i_reverse.push_back(i);
    out.v_reverse.push_back(v);
  }
  return out;
}

}  // namespace nvltm
