#include "nvltm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "nvltm/cavity.hpp"
#include "nvltm/csv.hpp"
#include "nvltm/errors.hpp"
#include "nvltm/fitting.hpp"
#include "nvltm/lockin.hpp"
#include "nvltm/rng.hpp"
#include "nvltm/sensitivity.hpp"
#include "nvltm/spectral.hpp"

namespace nvltm {

namespace {

namespace fs = std::filesystem;

// Substream roles for per-trace seeds.
enum : std::uint64_t {
  kRoleSweep = 1,
  kRoleThresholdScan = 2,
  kRoleAmScan = 3,
  kRoleSlopeSweep = 4,
  kRoleSensitive = 5,
  kRoleInsensitive = 6,
  kRoleSurvey = 7,
};

// Tracks written files so a failed run leaves nothing behind.
class RunWriter {
 public:
  explicit RunWriter(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const {
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
      throw IoError("RunWriter: output names must stay inside the run directory");
    return (fs::path(dir_) / name).string();
  }

  void write_table(const std::string& name, const Table& table) {
    export_csv(table, path(name));
    files_.push_back(name);
  }

  void write_text(const std::string& name, const std::string& text) {
    std::FILE* f = std::fopen(path(name).c_str(), "wb");
    if (!f) throw IoError("cannot open " + path(name));
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

  void discard_all() {
    for (const auto& name : files_) {
      std::error_code ec;
      fs::remove(fs::path(dir_) / name, ec);
    }
    files_.clear();
  }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

std::string pretty_unit(double v, const std::string& unit) {
  char buf[64];
  if (unit == "A")
    std::snprintf(buf, sizeof(buf), "%.6g mA", v * 1e3);
  else if (unit == "W")
    std::snprintf(buf, sizeof(buf), "%.6g uW", v * 1e6);
  else if (unit == "T/sqrt(Hz)")
    std::snprintf(buf, sizeof(buf), "%.6g nT/sqrt(Hz)", v * 1e9);
  else if (unit == "T")
    std::snprintf(buf, sizeof(buf), "%.6g nT", v * 1e9);
  else if (unit == "Hz" && std::abs(v) >= 1e6)
    std::snprintf(buf, sizeof(buf), "%.9g MHz", v * 1e-6);
  else if (unit == "s" && std::abs(v) < 1e-3)
    std::snprintf(buf, sizeof(buf), "%.6g ns", v * 1e9);
  else
    return "";
  return buf;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

// ---------------------------------------------------------------------------
// pi_sweep
// ---------------------------------------------------------------------------

void run_pi_sweep(const ExperimentConfig& cfg, RunWriter& w, RunReport& report) {
  const PICurveModel model = cfg.build_pi_model();
  const MicrowaveDrive mw = cfg.run.mw_frequency > 0.0
                                ? MicrowaveDrive::at(cfg.run.mw_frequency)
                                : MicrowaveDrive::off();
  const auto th = thresholds(model, cfg.run.pump, mw);
  report.derived.push_back({"i_th_forward_config", th.forward, "A"});
  report.derived.push_back({"i_th_reverse_config", th.reverse, "A"});

  const double duration = cfg.run.sweep_periods / cfg.modulation.f_mod;
  std::string warning;
  const TimeTrace trace =
      synth_pi_sweep(model, cfg.run.pump, mw, cfg.modulation, cfg.run.fs, duration,
                     cfg.noise, cfg.detector, substream_seed(cfg.seed, kRoleSweep),
                     cfg.run.workers, &warning);

  const PIBranches branches = reconstruct_pi_branches(trace, cfg.modulation);
  const FitResult fwd = fit_threshold(branches.i_forward, branches.v_forward);
  const FitResult rev = fit_threshold(branches.i_reverse, branches.v_reverse);

  const double volts_per_watt = cfg.detector.responsivity * cfg.detector.gain;
  report.derived.push_back({"i_th_forward_fit", fwd.value("i_th"), "A"});
  report.derived.push_back({"i_th_reverse_fit", rev.value("i_th"), "A"});
  report.derived.push_back({"hysteresis_fit", fwd.value("i_th") - rev.value("i_th"), "A"});
  report.derived.push_back({"p_step_fit", fwd.value("p_step") / volts_per_watt, "W"});
  report.derived.push_back({"slope_fit", fwd.value("slope") / volts_per_watt, "W/A"});

  if (cfg.run.write_raw_trace) w.write_table("trace.csv", trace_table(trace));
  Table f;
  f.columns = {Column{"current", "A", branches.i_forward},
               Column{"voltage", "V", branches.v_forward}};
  w.write_table("branch_forward.csv", f);
  Table r;
  r.columns = {Column{"current", "A", branches.i_reverse},
               Column{"voltage", "V", branches.v_reverse}};
  w.write_table("branch_reverse.csv", r);
}

// ---------------------------------------------------------------------------
// threshold_odmr
// ---------------------------------------------------------------------------

double forward_threshold_from_sweep(const ExperimentConfig& cfg, const PICurveModel& model,
                                    const MicrowaveDrive& mw, std::uint64_t seed) {
  const double duration = cfg.run.sweep_periods / cfg.modulation.f_mod;
  const TimeTrace trace =
      synth_pi_sweep(model, cfg.run.pump, mw, cfg.modulation, cfg.run.fs, duration,
                     cfg.noise, cfg.detector, seed, cfg.run.workers);
  const PIBranches branches = reconstruct_pi_branches(trace, cfg.modulation);
  return fit_threshold(branches.i_forward, branches.v_forward).value("i_th");
}

void run_threshold_odmr(const ExperimentConfig& cfg, RunWriter& w, RunReport& report) {
  const PICurveModel model = cfg.build_pi_model();
  const std::vector<double> freqs =
      linspace(cfg.run.scan_min, cfg.run.scan_max, cfg.run.scan_points);

  const double i_th_off = forward_threshold_from_sweep(
      cfg, model, MicrowaveDrive::off(), substream_seed(cfg.seed, kRoleThresholdScan, 0));

  std::vector<double> di(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double i_th = forward_threshold_from_sweep(
        cfg, model, MicrowaveDrive::at(freqs[k]),
        substream_seed(cfg.seed, kRoleThresholdScan, k + 1));
    di[k] = i_th - i_th_off;
  }

  const FitResult fit = fit_lorentzian(freqs, di, 2);
  const double splitting = fit.value("center2") - fit.value("center1");
  double peak = 0.0;
  for (double f : linspace(cfg.run.scan_min, cfg.run.scan_max, 2001))
    peak = std::max(peak, lorentzian_model(fit, f) - fit.value("offset"));

  report.derived.push_back({"i_th_off", i_th_off, "A"});
  report.derived.push_back({"splitting_2e", splitting, "Hz"});
  report.derived.push_back({"splitting_2e_err",
                            std::hypot(fit.error("center1"), fit.error("center2")), "Hz"});
  report.derived.push_back({"peak_di_th", peak, "A"});
  report.derived.push_back({"fit_converged", fit.converged ? 1.0 : 0.0, ""});

  Table t;
  t.columns = {Column{"frequency", "Hz", freqs}, Column{"di_th", "A", di}};
  w.write_table("threshold_odmr.csv", t);
}

// ---------------------------------------------------------------------------
// am_odmr
// ---------------------------------------------------------------------------

void run_am_odmr(const ExperimentConfig& cfg, RunWriter& w, RunReport& report) {
  const PICurveModel model = cfg.build_pi_model();
  const std::vector<double> freqs =
      linspace(cfg.run.scan_min, cfg.run.scan_max, cfg.run.scan_points);

  const double period = 1.0 / cfg.modulation.f_mod;
  std::vector<double> dv(freqs.size()), contrast(freqs.size());
  double v0_report = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const TimeTrace trace = synth_am_odmr(
        model, cfg.run.pump, freqs[k], cfg.run.bias_current, cfg.modulation, cfg.run.fs,
        cfg.run.duration, cfg.noise, cfg.detector,
        substream_seed(cfg.seed, kRoleAmScan, k), cfg.run.workers);
    double on_sum = 0.0, off_sum = 0.0;
    std::size_t on_n = 0, off_n = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
      const double tau = std::fmod(trace.time_at(i), period);
      if (tau < cfg.modulation.duty * period) {
        on_sum += trace.samples[i];
        ++on_n;
      } else {
        off_sum += trace.samples[i];
        ++off_n;
      }
    }
    const double v_on = on_sum / static_cast<double>(on_n);
    const double v_off = off_sum / static_cast<double>(off_n);
    dv[k] = v_off - v_on;
    contrast[k] = odmr_contrast(v_on, v_off);
    v0_report = v_off;
  }

  const FitResult fit = fit_lorentzian(freqs, contrast, 2);
  const double splitting = fit.value("center2") - fit.value("center1");
  double peak = 0.0;
  for (double f : linspace(cfg.run.scan_min, cfg.run.scan_max, 2001))
    peak = std::max(peak, lorentzian_model(fit, f) - fit.value("offset"));

  report.derived.push_back({"v0", v0_report, "V"});
  report.derived.push_back({"splitting_2e", splitting, "Hz"});
  report.derived.push_back({"contrast_peak", peak, ""});

  Table t;
  t.columns = {Column{"frequency", "Hz", freqs}, Column{"delta_v", "V", dv},
               Column{"contrast", "", contrast}};
  w.write_table("am_odmr.csv", t);
}

// ---------------------------------------------------------------------------
// fm_lockin_magnetometry
// ---------------------------------------------------------------------------

// Mean of the settled demodulator output over an integer number of reference
// cycles (the reference leakage tone averages to zero there).
double demod_dc(const TimeTrace& demod, double f_ref, double settle_s) {
  const TimeTrace tail = trace_tail(demod, settle_s);
  const double cycles = std::floor(tail.duration() * f_ref);
  auto n = static_cast<std::size_t>(cycles / f_ref * tail.fs);
  n = std::min(n, tail.samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += tail.samples[i];
  return sum / static_cast<double>(n);
}

void run_fm_lockin(const ExperimentConfig& cfg, RunWriter& w, RunReport& report) {
  const PICurveModel model = cfg.build_pi_model();
  const double f_mod = cfg.modulation.f_mod;

  // 1) slope calibration sweep around the operating point
  const std::vector<double> grid = linspace(cfg.run.f_center - cfg.run.slope_span / 2.0,
                                            cfg.run.f_center + cfg.run.slope_span / 2.0,
                                            cfg.run.slope_points);
  const double slope_settle = 0.05;
  const double slope_avg = 0.5;  // integer multiple of the reference period
  std::vector<double> demod_curve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const TimeTrace in = synth_fm_lockin_input(
        model, cfg.run.pump, grid[k], cfg.run.bias_current, cfg.modulation, cfg.run.fs,
        slope_settle + slope_avg, cfg.noise, cfg.detector,
        substream_seed(cfg.seed, kRoleSlopeSweep, k), {}, cfg.run.workers);
    const TimeTrace demod = lockin_demodulate(in, f_mod, cfg.run.phase, cfg.run.enbw);
    demod_curve[k] = demod_dc(demod, f_mod, slope_settle);
  }
  const SlopeFit slope = lockin_slope(grid, demod_curve);

  Table sc;
  sc.columns = {Column{"frequency", "Hz", grid}, Column{"demod_dc", "V", demod_curve}};
  w.write_table("slope_curve.csv", sc);

  // 2) magnetically sensitive branch at the zero crossing, with the injected
  //    field tone
  const FieldInjection injection{cfg.run.injection_amplitude, cfg.run.injection_frequency,
                                 cfg.spin.gamma_e};
  const TimeTrace sens_in = synth_fm_lockin_input(
      model, cfg.run.pump, cfg.run.f_center, cfg.run.bias_current, cfg.modulation,
      cfg.run.fs, cfg.run.duration + cfg.run.settle, cfg.noise, cfg.detector,
      substream_seed(cfg.seed, kRoleSensitive), injection, cfg.run.workers);
  const TimeTrace sens_demod = trace_tail(
      lockin_demodulate(sens_in, f_mod, cfg.run.phase, cfg.run.enbw), cfg.run.settle);
  const SpectralDensity sens_v = lsd(sens_demod, cfg.run.segment_seconds);
  const SpectralDensity sens_t = volts_to_tesla(sens_v, slope.slope, cfg.spin.gamma_e);

  // 3) magnetically insensitive branch, far off resonance
  const TimeTrace insens_in = synth_fm_lockin_input(
      model, cfg.run.pump, cfg.run.f_insensitive, cfg.run.bias_current, cfg.modulation,
      cfg.run.fs, cfg.run.duration + cfg.run.settle, cfg.noise, cfg.detector,
      substream_seed(cfg.seed, kRoleInsensitive), injection, cfg.run.workers);
  const TimeTrace insens_demod = trace_tail(
      lockin_demodulate(insens_in, f_mod, cfg.run.phase, cfg.run.enbw), cfg.run.settle);
  const SpectralDensity insens_v = lsd(insens_demod, cfg.run.segment_seconds);
  const SpectralDensity insens_t = volts_to_tesla(insens_v, slope.slope, cfg.spin.gamma_e);

  const double sensitivity =
      empirical_sensitivity(insens_t, cfg.run.band_lo, cfg.run.band_hi);

  // recovered injection amplitude from the sensitive spectrum
  double recovered_b = 0.0;
  if (cfg.run.injection_amplitude > 0.0 && cfg.run.injection_frequency > 0.0) {
    const double bin = bin_value(sens_t, cfg.run.injection_frequency);
    recovered_b = bin * std::numbers::sqrt2 * std::sqrt(sens_t.bin_width());
  }

  // laser-noise figure from the raw detector trace
  const SpectralDensity raw_v = lsd(trace_tail(sens_in, cfg.run.settle),
                                    cfg.run.segment_seconds);
  const double laser_noise = laser_noise_metric(raw_v);

  const double i_norm = cfg.run.bias_current / model.reverse_threshold(cfg.run.pump, 1.0);
  report.derived.push_back({"i_norm", i_norm, ""});
  report.derived.push_back({"v0", trace_mean(sens_in), "V"});
  report.derived.push_back({"lockin_slope", slope.slope, "V/Hz"});
  report.derived.push_back({"zero_crossing", slope.crossing, "Hz"});
  report.derived.push_back({"sensitivity_band_mean", sensitivity, "T/sqrt(Hz)"});
  report.derived.push_back({"recovered_injection", recovered_b, "T"});
  report.derived.push_back({"laser_noise_1_5khz", laser_noise, "V/sqrt(Hz)"});

  w.write_table("lsd_tesla_sensitive.csv", spectrum_table(sens_t));
  w.write_table("lsd_tesla_insensitive.csv", spectrum_table(insens_t));
  w.write_table("lsd_volts_raw.csv", spectrum_table(raw_v));
  const auto decimate =
      static_cast<std::size_t>(std::max(1.0, cfg.run.fs / 16e3));
  w.write_table("demod_trace.csv", trace_table(sens_demod, decimate));
  if (cfg.run.write_raw_trace) w.write_table("trace.csv", trace_table(sens_in));
}

// ---------------------------------------------------------------------------
// noise_survey
// ---------------------------------------------------------------------------

void run_noise_survey(const ExperimentConfig& cfg, RunWriter& w, RunReport& report) {
  const PICurveModel model = cfg.build_pi_model();
  const double power = pi_branch_power(model, cfg.run.bias_current, cfg.run.pump, 0.0);
  const double v0 = cfg.detector.volts(power);

  TimeTrace trace;
  trace.fs = cfg.run.fs;
  trace.meta.protocol = "noise_survey";
  trace.meta.seed = cfg.seed;
  trace.samples.assign(static_cast<std::size_t>(cfg.run.duration * cfg.run.fs), v0);
  const double i_norm = cfg.run.bias_current / model.reverse_threshold(cfg.run.pump, 1.0);
  add_noise(trace, cfg.noise, power, cfg.detector, substream_seed(cfg.seed, kRoleSurvey),
            i_norm, cfg.run.workers);

  const SpectralDensity sd = lsd(trace, cfg.run.segment_seconds);
  report.derived.push_back({"i_norm", i_norm, ""});
  report.derived.push_back({"v0", v0, "V"});
  report.derived.push_back({"laser_noise_1_5khz", laser_noise_metric(sd), "V/sqrt(Hz)"});

  w.write_table("lsd_volts.csv", spectrum_table(sd));
  if (cfg.run.write_raw_trace) w.write_table("trace.csv", trace_table(trace));
}

}  // namespace

double RunReport::value(const std::string& name) const {
  for (const auto& d : derived)
    if (d.name == name) return d.value;
  throw InvalidInput("RunReport: no derived quantity named " + name);
}

std::string format_report(const RunReport& report) {
  std::string out;
  out += "scenario: " + report.scenario + "\n";
  out += "config_hash: " + report.config_hash + "\n";
  out += "derived:\n";
  char buf[160];
  for (const auto& d : report.derived) {
    const std::string pretty = pretty_unit(d.value, d.unit);
    std::snprintf(buf, sizeof(buf), "  %s = %.9g %s%s%s%s\n", d.name.c_str(), d.value,
                  d.unit.c_str(), pretty.empty() ? "" : " (",
                  pretty.c_str(), pretty.empty() ? "" : ")");
    out += buf;
  }
  out += "files:\n";
  for (const auto& f : report.files) out += "  - " + f + "\n";
  return out;
}

RunReport run_scenario(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  RunReport report;
  report.scenario = scenario_name(cfg.scenario);
  report.config_hash = config_hash(cfg);

  RunWriter writer(out_dir);
  try {
    switch (cfg.scenario) {
      case Scenario::pi_sweep: run_pi_sweep(cfg, writer, report); break;
      case Scenario::threshold_odmr: run_threshold_odmr(cfg, writer, report); break;
      case Scenario::am_odmr: run_am_odmr(cfg, writer, report); break;
      case Scenario::fm_lockin_magnetometry: run_fm_lockin(cfg, writer, report); break;
      case Scenario::noise_survey: run_noise_survey(cfg, writer, report); break;
    }
    report.files = writer.files();
    report.files.push_back("report.txt");
    writer.write_text("report.txt", format_report(report));
  } catch (const std::exception& e) {
    writer.discard_all();
    throw std::runtime_error("scenario " + report.scenario + ": " + e.what());
  }
  return report;
}

RunReport derive_quantities(const ExperimentConfig& cfg) {
  RunReport report;
  report.scenario = scenario_name(cfg.scenario);
  report.config_hash = config_hash(cfg);

  const PICurveModel model = cfg.build_pi_model();
  const MicrowaveDrive peak = MicrowaveDrive::at(model.mw_peak_freq);
  const auto bare = thresholds(model, false, MicrowaveDrive::off());
  const auto pump_off = thresholds(model, true, MicrowaveDrive::off());
  const auto pump_on = thresholds(model, true, peak);
  report.derived.push_back({"i_th_forward_bare", bare.forward, "A"});
  report.derived.push_back({"i_th_forward_pump", pump_off.forward, "A"});
  report.derived.push_back({"i_th_forward_pump_mw", pump_on.forward, "A"});
  report.derived.push_back({"i_th_reverse_pump", pump_off.reverse, "A"});
  report.derived.push_back({"i_th_reverse_pump_mw", pump_on.reverse, "A"});

  const double re = effective_reflectivity(cfg.cavity);
  const double f = finesse(cfg.cavity.r1, re);
  const double n = round_trips(f);
  report.derived.push_back({"effective_reflectivity", re, ""});
  report.derived.push_back({"finesse", f, ""});
  report.derived.push_back({"round_trips", n, ""});

  report.derived.push_back({"t2_star", t2star_from_linewidth(cfg.lineshape.fwhm), "s"});

  if (cfg.run.bias_current > 0.0) {
    report.derived.push_back(
        {"contrast_at_bias",
         contrast_vs_current(model, cfg.run.bias_current, ContrastVariant::step), ""});
  }
  report.derived.push_back({"contrast_far_limit", contrast_limit(model), ""});
  report.derived.push_back(
      {"single_pass_contrast", single_pass_contrast(contrast_limit(model), n), ""});
  return report;
}

}  // namespace nvltm
