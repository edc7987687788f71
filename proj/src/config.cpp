#include "nvltm/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "nvltm/errors.hpp"

namespace nvltm {

namespace {

enum class Dim {
  current,
  power,
  frequency,
  gyromagnetic,
  field,
  length,
  time_s,
  voltage,
  noise_density,
  slope_wa,
  responsivity,
  gain_va,
  dimensionless,
};

struct UnitDef {
  const char* token;
  Dim dim;
  double scale;
};

constexpr UnitDef kUnits[] = {
    {"A", Dim::current, 1.0},
    {"mA", Dim::current, 1e-3},
    {"uA", Dim::current, 1e-6},
    {"W", Dim::power, 1.0},
    {"mW", Dim::power, 1e-3},
    {"uW", Dim::power, 1e-6},
    {"nW", Dim::power, 1e-9},
    {"GHz", Dim::frequency, 1e9},
    {"MHz", Dim::frequency, 1e6},
    {"kHz", Dim::frequency, 1e3},
    {"Hz", Dim::frequency, 1.0},
    {"Hz/T", Dim::gyromagnetic, 1.0},
    {"MHz/mT", Dim::gyromagnetic, 1e9},
    {"T", Dim::field, 1.0},
    {"mT", Dim::field, 1e-3},
    {"uT", Dim::field, 1e-6},
    {"nT", Dim::field, 1e-9},
    {"pT", Dim::field, 1e-12},
    {"m", Dim::length, 1.0},
    {"cm", Dim::length, 1e-2},
    {"mm", Dim::length, 1e-3},
    {"um", Dim::length, 1e-6},
    {"s", Dim::time_s, 1.0},
    {"ms", Dim::time_s, 1e-3},
    {"us", Dim::time_s, 1e-6},
    {"ns", Dim::time_s, 1e-9},
    {"V", Dim::voltage, 1.0},
    {"mV", Dim::voltage, 1e-3},
    {"uV", Dim::voltage, 1e-6},
    {"nV", Dim::voltage, 1e-9},
    {"V/rtHz", Dim::noise_density, 1.0},
    {"mV/rtHz", Dim::noise_density, 1e-3},
    {"uV/rtHz", Dim::noise_density, 1e-6},
    {"nV/rtHz", Dim::noise_density, 1e-9},
    {"W/A", Dim::slope_wa, 1.0},
    {"mW/mA", Dim::slope_wa, 1.0},
    {"mW/A", Dim::slope_wa, 1e-3},
    {"uW/mA", Dim::slope_wa, 1e-3},
    {"A/W", Dim::responsivity, 1.0},
    {"V/A", Dim::gain_va, 1.0},
    {"kV/A", Dim::gain_va, 1e3},
    {"%", Dim::dimensionless, 0.01},
    {"percent", Dim::dimensionless, 0.01},
    {"rad", Dim::dimensionless, 1.0},
};

const UnitDef* find_unit(const std::string& token) {
  for (const auto& u : kUnits)
    if (token == u.token) return &u;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

// "0.18 mA" -> SI double; records an error on unknown or mismatched unit.
bool parse_number(const std::string& text, Dim dim, const std::string& key, int line,
                  std::vector<std::string>& errors, double& out) {
  const std::string v = trim(text);
  char* end = nullptr;
  const double num = std::strtod(v.c_str(), &end);
  if (end == v.c_str()) {
    errors.push_back("line " + std::to_string(line) + ": expected a number for '" + key +
                     "'");
    return false;
  }
  const std::string unit = trim(v.substr(static_cast<std::size_t>(end - v.c_str())));
  if (unit.empty()) {
    out = num;  // bare numbers are SI
    return true;
  }
  const UnitDef* u = find_unit(unit);
  if (!u) {
    errors.push_back("line " + std::to_string(line) + ": unknown unit '" + unit +
                     "' for '" + key + "'");
    return false;
  }
  if (u->dim != dim) {
    errors.push_back("line " + std::to_string(line) + ": unit mismatch for '" + key +
                     "': got '" + unit + "'");
    return false;
  }
  out = num * u->scale;
  return true;
}

bool parse_bool(const std::string& text, const std::string& key, int line,
                std::vector<std::string>& errors, bool& out) {
  const std::string v = trim(text);
  if (v == "on" || v == "true" || v == "1") {
    out = true;
    return true;
  }
  if (v == "off" || v == "false" || v == "0") {
    out = false;
    return true;
  }
  errors.push_back("line " + std::to_string(line) + ": expected on/off for '" + key + "'");
  return false;
}

bool parse_int(const std::string& text, const std::string& key, int line,
               std::vector<std::string>& errors, long long& out) {
  const std::string v = trim(text);
  char* end = nullptr;
  out = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    errors.push_back("line " + std::to_string(line) + ": expected an integer for '" + key +
                     "'");
    return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& value, int line,
                                  std::vector<std::string>& errors)>;

struct KeySpec {
  std::string section;
  std::string key;
  Setter set;
  std::function<std::string(const ExperimentConfig&)> print;
};

// The registry drives parsing, printing and hashing; order here is the
// canonical print order.
const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> regs = [] {
    std::vector<KeySpec> r;
    auto add = [&r](const std::string& sec, const std::string& key, Dim dim,
                    const std::function<void(ExperimentConfig&, double)>& set,
                    const std::function<double(const ExperimentConfig&)>& get) {
      r.push_back({sec, key,
                   [dim, key, set](ExperimentConfig& c, const std::string& v, int line,
                                   std::vector<std::string>& errors) {
                     double out;
                     if (parse_number(v, dim, key, line, errors, out)) set(c, out);
                   },
                   [get](const ExperimentConfig& c) { return g17(get(c)); }});
    };
    auto add_bool = [&r](const std::string& sec, const std::string& key,
                         const std::function<void(ExperimentConfig&, bool)>& set,
                         const std::function<bool(const ExperimentConfig&)>& get) {
      r.push_back({sec, key,
                   [key, set](ExperimentConfig& c, const std::string& v, int line,
                              std::vector<std::string>& errors) {
                     bool out;
                     if (parse_bool(v, key, line, errors, out)) set(c, out);
                   },
                   [get](const ExperimentConfig& c) {
                     return std::string(get(c) ? "on" : "off");
                   }});
    };
    auto add_int = [&r](const std::string& sec, const std::string& key,
                        const std::function<void(ExperimentConfig&, long long)>& set,
                        const std::function<long long(const ExperimentConfig&)>& get) {
      r.push_back({sec, key,
                   [key, set](ExperimentConfig& c, const std::string& v, int line,
                              std::vector<std::string>& errors) {
                     long long out;
                     if (parse_int(v, key, line, errors, out)) set(c, out);
                   },
                   [get](const ExperimentConfig& c) { return std::to_string(get(c)); }});
    };

    // top level
    r.push_back({"", "scenario",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   try {
                     c.scenario = scenario_from_name(trim(v));
                   } catch (const ConfigError&) {
                     errors.push_back("line " + std::to_string(line) +
                                      ": unknown scenario '" + trim(v) + "'");
                   }
                 },
                 [](const ExperimentConfig& c) { return scenario_name(c.scenario); }});
    r.push_back({"", "seed",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   long long out;
                   if (parse_int(v, "seed", line, errors, out)) {
                     c.seed = static_cast<std::uint64_t>(out);
                     c.seed_set = true;
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return c.seed_set ? std::to_string(c.seed) : std::string();
                 }});
    r.push_back({"", "out_dir",
                 [](ExperimentConfig& c, const std::string& v, int,
                    std::vector<std::string>&) { c.out_dir = trim(v); },
                 [](const ExperimentConfig& c) { return c.out_dir; }});

    // [spin]
    add("spin", "d", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.spin.d_splitting = v; },
        [](const ExperimentConfig& c) { return c.spin.d_splitting; });
    add("spin", "e", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.spin.e_strain = v; },
        [](const ExperimentConfig& c) { return c.spin.e_strain; });
    add("spin", "gamma_e", Dim::gyromagnetic,
        [](ExperimentConfig& c, double v) { c.spin.gamma_e = v; },
        [](const ExperimentConfig& c) { return c.spin.gamma_e; });
    add("spin", "b_x", Dim::field,
        [](ExperimentConfig& c, double v) { c.spin.b_field[0] = v; },
        [](const ExperimentConfig& c) { return c.spin.b_field[0]; });
    add("spin", "b_y", Dim::field,
        [](ExperimentConfig& c, double v) { c.spin.b_field[1] = v; },
        [](const ExperimentConfig& c) { return c.spin.b_field[1]; });
    add("spin", "b_z", Dim::field,
        [](ExperimentConfig& c, double v) { c.spin.b_field[2] = v; },
        [](const ExperimentConfig& c) { return c.spin.b_field[2]; });

    // [rates] (1/s; the frequency units double as rate units)
    auto add_rate = [&add](const std::string& key, double RateModel::* f) {
      add("rates", key, Dim::frequency,
          [f](ExperimentConfig& c, double v) { c.rates.*f = v; },
          [f](const ExperimentConfig& c) { return c.rates.*f; });
    };
    add_rate("k_rad", &RateModel::k_rad);
    add_rate("k35", &RateModel::k35);
    add_rate("k45", &RateModel::k45);
    add_rate("k56", &RateModel::k56);
    add_rate("k61", &RateModel::k61);
    add_rate("k62", &RateModel::k62);
    add_rate("w_pump", &RateModel::w_pump);
    add_rate("w_mw", &RateModel::w_mw);

    // [cavity]
    add("cavity", "r1", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.cavity.r1 = v; },
        [](const ExperimentConfig& c) { return c.cavity.r1; });
    add("cavity", "r_ff", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.cavity.r_ff = v; },
        [](const ExperimentConfig& c) { return c.cavity.r_ff; });
    add("cavity", "r2", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.cavity.r2 = v; },
        [](const ExperimentConfig& c) { return c.cavity.r2; });
    add("cavity", "eta_overlap", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.cavity.eta_overlap = v; },
        [](const ExperimentConfig& c) { return c.cavity.eta_overlap; });
    add("cavity", "l_int", Dim::length,
        [](ExperimentConfig& c, double v) { c.cavity.l_int = v; },
        [](const ExperimentConfig& c) { return c.cavity.l_int; });
    add("cavity", "l_ext", Dim::length,
        [](ExperimentConfig& c, double v) { c.cavity.l_ext = v; },
        [](const ExperimentConfig& c) { return c.cavity.l_ext; });

    // [laser]
    add("laser", "i_th_base", Dim::current,
        [](ExperimentConfig& c, double v) { c.i_th_base = v; },
        [](const ExperimentConfig& c) { return c.i_th_base; });
    add("laser", "di_pump", Dim::current,
        [](ExperimentConfig& c, double v) { c.di_pump = v; },
        [](const ExperimentConfig& c) { return c.di_pump; });
    add("laser", "di_hyst", Dim::current,
        [](ExperimentConfig& c, double v) { c.di_hyst = v; },
        [](const ExperimentConfig& c) { return c.di_hyst; });
    add("laser", "di_mw_peak", Dim::current,
        [](ExperimentConfig& c, double v) { c.di_mw_peak = v; },
        [](const ExperimentConfig& c) { return c.di_mw_peak; });
    add("laser", "p_step", Dim::power,
        [](ExperimentConfig& c, double v) { c.p_step = v; },
        [](const ExperimentConfig& c) { return c.p_step; });
    add("laser", "p_floor", Dim::power,
        [](ExperimentConfig& c, double v) { c.p_floor = v; },
        [](const ExperimentConfig& c) { return c.p_floor; });
    add("laser", "slope_off", Dim::slope_wa,
        [](ExperimentConfig& c, double v) { c.slope_off = v; },
        [](const ExperimentConfig& c) { return c.slope_off; });
    add("laser", "slope_on", Dim::slope_wa,
        [](ExperimentConfig& c, double v) { c.slope_on = v; },
        [](const ExperimentConfig& c) { return c.slope_on; });
    add_bool("laser", "calibrate",
             [](ExperimentConfig& c, bool v) { c.calibrate = v; },
             [](const ExperimentConfig& c) { return c.calibrate; });
    add("laser", "c_far", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.c_far = v; },
        [](const ExperimentConfig& c) { return c.c_far; });
    add("laser", "c_th", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.c_th = v; },
        [](const ExperimentConfig& c) { return c.c_th; });

    // [lineshape]
    r.push_back({"lineshape", "centers",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   std::vector<double> vals;
                   for (const auto& item : split_list(v)) {
                     double out;
                     if (!parse_number(item, Dim::frequency, "centers", line, errors, out))
                       return;
                     vals.push_back(out);
                   }
                   c.lineshape.centers = vals;
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (std::size_t k = 0; k < c.lineshape.centers.size(); ++k)
                     s += (k ? "," : "") + g17(c.lineshape.centers[k]);
                   return s;
                 }});
    add("lineshape", "fwhm", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.lineshape.fwhm = v; },
        [](const ExperimentConfig& c) { return c.lineshape.fwhm; });
    r.push_back({"lineshape", "amplitudes",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   std::vector<double> vals;
                   for (const auto& item : split_list(v)) {
                     double out;
                     if (!parse_number(item, Dim::dimensionless, "amplitudes", line, errors,
                                       out))
                       return;
                     vals.push_back(out);
                   }
                   c.lineshape.amplitudes = vals;
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (std::size_t k = 0; k < c.lineshape.amplitudes.size(); ++k)
                     s += (k ? "," : "") + g17(c.lineshape.amplitudes[k]);
                   return s;
                 }});

    // [modulation]
    r.push_back({"modulation", "kind",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   const std::string t = trim(v);
                   if (t == "current_sawtooth")
                     c.modulation.kind = ModKind::current_sawtooth;
                   else if (t == "am_square")
                     c.modulation.kind = ModKind::am_square;
                   else if (t == "fm_sine")
                     c.modulation.kind = ModKind::fm_sine;
                   else
                     errors.push_back("line " + std::to_string(line) +
                                      ": unknown modulation kind '" + t + "'");
                 },
                 [](const ExperimentConfig& c) {
                   switch (c.modulation.kind) {
                     case ModKind::current_sawtooth: return std::string("current_sawtooth");
                     case ModKind::am_square: return std::string("am_square");
                     case ModKind::fm_sine: return std::string("fm_sine");
                   }
                   return std::string();
                 }});
    add("modulation", "f_mod", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.modulation.f_mod = v; },
        [](const ExperimentConfig& c) { return c.modulation.f_mod; });
    add("modulation", "duty", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.modulation.duty = v; },
        [](const ExperimentConfig& c) { return c.modulation.duty; });
    add("modulation", "deviation", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.modulation.deviation = v; },
        [](const ExperimentConfig& c) { return c.modulation.deviation; });
    add("modulation", "range_min", Dim::current,
        [](ExperimentConfig& c, double v) { c.modulation.range_min = v; },
        [](const ExperimentConfig& c) { return c.modulation.range_min; });
    add("modulation", "range_max", Dim::current,
        [](ExperimentConfig& c, double v) { c.modulation.range_max = v; },
        [](const ExperimentConfig& c) { return c.modulation.range_max; });

    // [noise]
    add_bool("noise", "shot",
             [](ExperimentConfig& c, bool v) { c.noise.shot = v; },
             [](const ExperimentConfig& c) { return c.noise.shot; });
    add("noise", "electronic_floor", Dim::noise_density,
        [](ExperimentConfig& c, double v) { c.noise.electronic_floor = v; },
        [](const ExperimentConfig& c) { return c.noise.electronic_floor; });
    add("noise", "line_50hz", Dim::voltage,
        [](ExperimentConfig& c, double v) { c.noise.line_50hz = v; },
        [](const ExperimentConfig& c) { return c.noise.line_50hz; });
    add("noise", "drift", Dim::noise_density,
        [](ExperimentConfig& c, double v) { c.noise.drift_lowfreq = v; },
        [](const ExperimentConfig& c) { return c.noise.drift_lowfreq; });
    r.push_back({"noise", "rin",
                 [](ExperimentConfig& c, const std::string& v, int line,
                    std::vector<std::string>& errors) {
                   std::vector<RinKnot> knots;
                   for (const auto& item : split_list(v)) {
                     if (item.empty()) continue;
                     const auto colon = item.find(':');
                     if (colon == std::string::npos) {
                       errors.push_back("line " + std::to_string(line) +
                                        ": rin entries are 'i_norm:multiplier'");
                       return;
                     }
                     double a, b;
                     if (!parse_number(item.substr(0, colon), Dim::dimensionless, "rin",
                                       line, errors, a) ||
                         !parse_number(item.substr(colon + 1), Dim::dimensionless, "rin",
                                       line, errors, b))
                       return;
                     knots.push_back({a, b});
                   }
                   c.noise.rin_vs_current = knots;
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (std::size_t k = 0; k < c.noise.rin_vs_current.size(); ++k)
                     s += (k ? "," : "") + g17(c.noise.rin_vs_current[k].i_norm) + ":" +
                          g17(c.noise.rin_vs_current[k].multiplier);
                   return s;
                 }});

    // [detector]
    add("detector", "responsivity", Dim::responsivity,
        [](ExperimentConfig& c, double v) { c.detector.responsivity = v; },
        [](const ExperimentConfig& c) { return c.detector.responsivity; });
    add("detector", "gain", Dim::gain_va,
        [](ExperimentConfig& c, double v) { c.detector.gain = v; },
        [](const ExperimentConfig& c) { return c.detector.gain; });

    // [run]
    add("run", "fs", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.fs = v; },
        [](const ExperimentConfig& c) { return c.run.fs; });
    add("run", "duration", Dim::time_s,
        [](ExperimentConfig& c, double v) { c.run.duration = v; },
        [](const ExperimentConfig& c) { return c.run.duration; });
    add("run", "settle", Dim::time_s,
        [](ExperimentConfig& c, double v) { c.run.settle = v; },
        [](const ExperimentConfig& c) { return c.run.settle; });
    add("run", "bias_current", Dim::current,
        [](ExperimentConfig& c, double v) { c.run.bias_current = v; },
        [](const ExperimentConfig& c) { return c.run.bias_current; });
    add_bool("run", "pump",
             [](ExperimentConfig& c, bool v) { c.run.pump = v; },
             [](const ExperimentConfig& c) { return c.run.pump; });
    add("run", "mw_frequency", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.mw_frequency = v; },
        [](const ExperimentConfig& c) { return c.run.mw_frequency; });
    add("run", "scan_min", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.scan_min = v; },
        [](const ExperimentConfig& c) { return c.run.scan_min; });
    add("run", "scan_max", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.scan_max = v; },
        [](const ExperimentConfig& c) { return c.run.scan_max; });
    add_int("run", "scan_points",
            [](ExperimentConfig& c, long long v) { c.run.scan_points = static_cast<int>(v); },
            [](const ExperimentConfig& c) { return c.run.scan_points; });
    add("run", "f_center", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.f_center = v; },
        [](const ExperimentConfig& c) { return c.run.f_center; });
    add("run", "f_insensitive", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.f_insensitive = v; },
        [](const ExperimentConfig& c) { return c.run.f_insensitive; });
    add("run", "enbw", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.enbw = v; },
        [](const ExperimentConfig& c) { return c.run.enbw; });
    add("run", "phase", Dim::dimensionless,
        [](ExperimentConfig& c, double v) { c.run.phase = v; },
        [](const ExperimentConfig& c) { return c.run.phase; });
    add("run", "injection_amplitude", Dim::field,
        [](ExperimentConfig& c, double v) { c.run.injection_amplitude = v; },
        [](const ExperimentConfig& c) { return c.run.injection_amplitude; });
    add("run", "injection_frequency", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.injection_frequency = v; },
        [](const ExperimentConfig& c) { return c.run.injection_frequency; });
    add("run", "slope_span", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.slope_span = v; },
        [](const ExperimentConfig& c) { return c.run.slope_span; });
    add_int("run", "slope_points",
            [](ExperimentConfig& c, long long v) { c.run.slope_points = static_cast<int>(v); },
            [](const ExperimentConfig& c) { return c.run.slope_points; });
    add("run", "band_lo", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.band_lo = v; },
        [](const ExperimentConfig& c) { return c.run.band_lo; });
    add("run", "band_hi", Dim::frequency,
        [](ExperimentConfig& c, double v) { c.run.band_hi = v; },
        [](const ExperimentConfig& c) { return c.run.band_hi; });
    add_int("run", "sweep_periods",
            [](ExperimentConfig& c, long long v) { c.run.sweep_periods = static_cast<int>(v); },
            [](const ExperimentConfig& c) { return c.run.sweep_periods; });
    add("run", "segment", Dim::time_s,
        [](ExperimentConfig& c, double v) { c.run.segment_seconds = v; },
        [](const ExperimentConfig& c) { return c.run.segment_seconds; });
    add_int("run", "workers",
            [](ExperimentConfig& c, long long v) { c.run.workers = static_cast<int>(v); },
            [](const ExperimentConfig& c) { return c.run.workers; });
    add_bool("run", "write_raw_trace",
             [](ExperimentConfig& c, bool v) { c.run.write_raw_trace = v; },
             [](const ExperimentConfig& c) { return c.run.write_raw_trace; });
    return r;
  }();
  return regs;
}

const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : registry())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::pi_sweep: return "pi_sweep";
    case Scenario::am_odmr: return "am_odmr";
    case Scenario::threshold_odmr: return "threshold_odmr";
    case Scenario::fm_lockin_magnetometry: return "fm_lockin_magnetometry";
    case Scenario::noise_survey: return "noise_survey";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "pi_sweep") return Scenario::pi_sweep;
  if (name == "am_odmr") return Scenario::am_odmr;
  if (name == "threshold_odmr") return Scenario::threshold_odmr;
  if (name == "fm_lockin_magnetometry") return Scenario::fm_lockin_magnetometry;
  if (name == "noise_survey") return Scenario::noise_survey;
  throw ConfigError("unknown scenario '" + name + "'");
}

PICurveModel ExperimentConfig::build_pi_model() const {
  PICurveModel m;
  m.i_th_base = i_th_base;
  m.di_pump = di_pump;
  m.di_hyst = di_hyst;
  m.di_mw_peak = di_mw_peak;
  m.p_step = p_step;
  m.p_floor = p_floor;
  m.mw_shape = lineshape;
  if (calibrate) {
    auto [s_off, s_on] = nvltm::calibrate_slopes(p_step, di_hyst, di_mw_peak, c_far, c_th);
    m.slope_off = s_off;
    m.slope_on = s_on;
  } else {
    m.slope_off = slope_off;
    m.slope_on = slope_on;
  }
  m.finalize();
  return m;
}

void ExperimentConfig::validate() const {
  if (noise.any_enabled() && !seed_set)
    throw ConfigError("seed is required when any noise source is enabled");
  try {
    spin.validate();
    rates.validate();
    cavity.validate();
    lineshape.validate();
    modulation.validate();
    noise.validate();
    build_pi_model().validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (!(run.fs > 0.0)) throw ConfigError("run.fs must be > 0");
  if (!(run.duration > 0.0)) throw ConfigError("run.duration must be > 0");
  if (run.scan_points < 2 && (scenario == Scenario::am_odmr ||
                              scenario == Scenario::threshold_odmr))
    throw ConfigError("run.scan_points must be >= 2");
  if (run.workers < 1) throw ConfigError("run.workers must be >= 1");
}

ConfigParse parse_config(const std::string& text) {
  ConfigParse result;
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  bool scenario_seen = false;
  Scenario scenario = Scenario::pi_sweep;

  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back("line " + std::to_string(line_no) +
                                ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& k : registry())
        if (k.section == section) known = true;
      if (!known)
        result.errors.push_back("line " + std::to_string(line_no) + ": unknown section '" +
                                section + "'");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!find_key(section, key)) {
      result.errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key +
                              "'" + (section.empty() ? "" : " in section [" + section + "]"));
      continue;
    }
    const std::string id = section + "." + key;
    if (!seen.insert(id).second) {
      result.errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                              "'" + (section.empty() ? "" : " in section [" + section + "]"));
      continue;
    }
    entries.push_back({section, key, value, line_no});
    if (section.empty() && key == "scenario") {
      try {
        scenario = scenario_from_name(value);
        scenario_seen = true;
      } catch (const ConfigError&) {
        // reported when the entry is applied
      }
    }
  }

  if (!scenario_seen)
    result.errors.push_back("missing required key 'scenario'");

  result.config = default_config(scenario);
  result.config.seed_set = false;  // defaults only count once the file sets one
  for (const auto& e : entries) {
    const KeySpec* spec = find_key(e.section, e.key);
    spec->set(result.config, e.value, e.line, result.errors);
  }

  if (result.errors.empty()) {
    try {
      result.config.validate();
    } catch (const ConfigError& e) {
      result.errors.push_back(e.what());
    }
  }
  return result;
}

ExperimentConfig parse_config_or_throw(const std::string& text) {
  ConfigParse parsed = parse_config(text);
  if (!parsed.errors.empty()) {
    std::string all;
    for (const auto& e : parsed.errors) all += (all.empty() ? "" : "\n") + e;
    throw ConfigError(all);
  }
  return parsed.config;
}

std::string print_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : registry()) {
    const std::string v = k.print(cfg);
    if (v.empty()) continue;
    if (k.section != section) {
      section = k.section;
      out += "\n[" + section + "]\n";
    }
    out += k.key + " = " + v + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = print_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ExperimentConfig common_defaults() {
  ExperimentConfig cfg;
  cfg.spin.e_strain = 2.45e6;
  cfg.lineshape.centers = {kZeroFieldSplitting - 2.45e6, kZeroFieldSplitting + 2.45e6};
  cfg.lineshape.fwhm = 6.6e6;
  cfg.lineshape.amplitudes = {1.0, 1.0};
  cfg.seed = 1;
  cfg.seed_set = true;
  return cfg;
}

}  // namespace

ExperimentConfig default_config(Scenario s) {
  ExperimentConfig cfg = common_defaults();
  cfg.scenario = s;
  switch (s) {
    case Scenario::pi_sweep:
      // Bare sweep: no pump, no microwave; the sharp 26.75 mA turn-on.
      cfg.run.pump = false;
      cfg.modulation.kind = ModKind::current_sawtooth;
      cfg.modulation.f_mod = 37.0;
      cfg.modulation.duty = 0.5;
      cfg.modulation.range_min = 20e-3;
      cfg.modulation.range_max = 32e-3;
      cfg.run.sweep_periods = 5;
      cfg.noise.electronic_floor = 6.5e-6;  // ~1% of the step in volts per sample
      break;
    case Scenario::threshold_odmr:
      cfg.run.pump = true;
      cfg.modulation.kind = ModKind::current_sawtooth;
      cfg.modulation.f_mod = 37.0;
      cfg.modulation.duty = 0.5;
      cfg.modulation.range_min = 20e-3;
      cfg.modulation.range_max = 32e-3;
      cfg.run.sweep_periods = 1;
      cfg.run.scan_min = 2.850e9;
      cfg.run.scan_max = 2.890e9;
      cfg.run.scan_points = 41;
      cfg.noise.electronic_floor = 6.5e-6;
      cfg.run.write_raw_trace = false;
      break;
    case Scenario::am_odmr:
      cfg.run.pump = true;
      cfg.run.bias_current = 48.64e-3;  // 2x the on-resonance reverse threshold
      cfg.modulation.kind = ModKind::am_square;
      cfg.modulation.f_mod = 131.0;
      cfg.modulation.duty = 0.30;
      cfg.run.duration = 0.2;
      cfg.run.scan_min = 2.850e9;
      cfg.run.scan_max = 2.890e9;
      cfg.run.scan_points = 41;
      cfg.noise.electronic_floor = 1e-6;
      cfg.run.write_raw_trace = false;
      break;
    case Scenario::fm_lockin_magnetometry: {
      cfg.run.pump = true;
      // Bias field on; the selected single resonance at 2.706 GHz.
      const double b = 5.8521e-3 / std::sqrt(3.0);
      cfg.spin.b_field = {b, b, b};
      cfg.lineshape.centers = {2.706e9};
      cfg.lineshape.amplitudes = {1.0};
      cfg.run.f_center = 2.706e9;
      cfg.run.bias_current = 48.64e-3;
      cfg.modulation.kind = ModKind::fm_sine;
      cfg.modulation.f_mod = 2742.0;
      cfg.modulation.deviation = 4e6;
      cfg.run.duration = 10.0;
      cfg.run.settle = 0.5;
      cfg.run.injection_amplitude = 100e-9;
      cfg.run.injection_frequency = 50.0;
      cfg.noise.shot = true;
      cfg.noise.electronic_floor = 1.2e-7;  // calibrated to 7.6 nT/rtHz far above
      cfg.noise.rin_vs_current = {{1.0, 13.0}, {1.1, 6.0}, {1.3, 2.0}, {1.6, 1.0}, {3.0, 1.0}};
      cfg.run.write_raw_trace = false;
      break;
    }
    case Scenario::noise_survey:
      cfg.run.pump = true;
      cfg.run.bias_current = 48.64e-3;
      cfg.modulation.kind = ModKind::fm_sine;
      cfg.modulation.f_mod = 2742.0;
      cfg.modulation.deviation = 4e6;
      cfg.run.duration = 10.0;
      cfg.noise.shot = true;
      cfg.noise.electronic_floor = 1.2e-7;
      cfg.noise.line_50hz = 1e-5;
      cfg.noise.drift_lowfreq = 1e-6;
      cfg.noise.rin_vs_current = {{1.0, 13.0}, {1.1, 6.0}, {1.3, 2.0}, {1.6, 1.0}, {3.0, 1.0}};
      cfg.run.write_raw_trace = false;
      break;
  }
  return cfg;
}

ExperimentConfig fm_scenario_config(double i_norm) {
  ExperimentConfig cfg = default_config(Scenario::fm_lockin_magnetometry);
  const PICurveModel m = cfg.build_pi_model();
  cfg.run.bias_current = i_norm * m.reverse_threshold(true, 1.0);
  return cfg;
}

}  // namespace nvltm
