// Command-line front end: simulate / analyze / report / selftest.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "nvltm/config.hpp"
#include "nvltm/csv.hpp"
#include "nvltm/errors.hpp"
#include "nvltm/lockin.hpp"
#include "nvltm/rng.hpp"
#include "nvltm/scenario.hpp"
#include "nvltm/sensitivity.hpp"
#include "nvltm/spectral.hpp"
#include "nvltm/spin.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nvltm::IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_out_dir(const std::string& cli_out, const std::string& cfg_out) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg_out.empty()) return cfg_out;
  if (const char* env = std::getenv("NVLTM_OUT_DIR")) return env;
  return "nvltm_out";
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 long long seed_override, bool have_seed, int workers, bool quiet) {
  const nvltm::ConfigParse parsed = nvltm::parse_config(read_file(config_path));
  if (!parsed.errors.empty()) {
    for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
    return 1;
  }
  nvltm::ExperimentConfig cfg = parsed.config;
  if (have_seed) {
    cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.seed_set = true;
  }
  if (workers > 0) cfg.run.workers = workers;

  const nvltm::RunReport report =
      nvltm::run_scenario(cfg, resolve_out_dir(out, cfg.out_dir));
  if (!quiet) std::cout << nvltm::format_report(report);
  return 0;
}

int cmd_analyze(const std::string& trace_path, const std::string& out_path,
                double segment, double demod_fref, double enbw, double phase,
                bool quiet) {
  const nvltm::Table table = nvltm::import_csv(trace_path);
  nvltm::TimeTrace trace = nvltm::trace_from_table(table);
  if (demod_fref > 0.0)
    trace = nvltm::lockin_demodulate(trace, demod_fref, phase, enbw);
  const nvltm::SpectralDensity sd = nvltm::lsd(trace, segment);
  nvltm::export_csv(nvltm::spectrum_table(sd), out_path);
  if (!quiet)
    std::cout << "wrote " << out_path << " (" << sd.freqs.size() << " bins, "
              << sd.n_segments << " segments)\n";
  return 0;
}

int cmd_report(const std::string& config_path) {
  const nvltm::ExperimentConfig cfg = nvltm::parse_config_or_throw(read_file(config_path));
  std::cout << nvltm::format_report(nvltm::derive_quantities(cfg));
  return 0;
}

// One-command sanity check of the core numeric oracles.
int cmd_selftest() {
  int failures = 0;
  auto check = [&failures](const char* name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  // White-noise LSD closed form: sigma*sqrt(2/fs).
  {
    nvltm::TimeTrace t;
    t.fs = 400e3;
    t.samples.resize(static_cast<std::size_t>(20 * t.fs));
    nvltm::GaussianStream g(nvltm::substream_seed(12345, 1, 0));
    for (auto& v : t.samples) v = g.normal();
    const nvltm::SpectralDensity sd = nvltm::lsd(t, 1.0);
    const double mean = nvltm::empirical_sensitivity(sd, 1e3, 190e3);
    check("white-noise LSD flat at sigma*sqrt(2/fs)",
          std::abs(mean / 2.2360679e-3 - 1.0) < 0.02);
  }

  // On-grid sine bin: amplitude/sqrt(2) per sqrt(Hz) at 1 s segments.
  {
    nvltm::TimeTrace t;
    t.fs = 50e3;
    t.samples.resize(static_cast<std::size_t>(4 * t.fs));
    for (std::size_t i = 0; i < t.samples.size(); ++i)
      t.samples[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * i / t.fs);
    const nvltm::SpectralDensity sd = nvltm::lsd(t, 1.0);
    check("on-grid sine bin at A/sqrt(2)",
          std::abs(nvltm::bin_value(sd, 1000.0) * std::numbers::sqrt2 - 1.0) < 0.01);
  }

  // Steady state equals long-time rate-equation integration.
  {
    nvltm::RateModel m;
    m.w_pump = 1e6;
    m.w_mw = 2e6;
    const nvltm::Populations p = nvltm::steady_state(m);
    // RK4 on dp/dt = M p
    std::array<double, 6> q{0.5, 0.5, 0, 0, 0, 0};
    auto deriv = [&m](const std::array<double, 6>& s) {
      std::array<double, 6> d{};
      const double pump1 = m.w_pump * s[0], pump2 = m.w_pump * s[1];
      const double mw12 = m.w_mw * s[0], mw21 = m.w_mw * s[1];
      d[0] = -pump1 - mw12 + mw21 + m.k_rad * s[2] + m.k61 * s[5];
      d[1] = -pump2 - mw21 + mw12 + m.k_rad * s[3] + m.k62 * s[5];
      d[2] = pump1 - (m.k_rad + m.k35) * s[2];
      d[3] = pump2 - (m.k_rad + m.k45) * s[3];
      d[4] = m.k35 * s[2] + m.k45 * s[3] - m.k56 * s[4];
      d[5] = m.k56 * s[4] - (m.k61 + m.k62) * s[5];
      return d;
    };
    const double h = 0.5 / m.k56;
    const auto steps = static_cast<std::size_t>(1e-3 / h);
    for (std::size_t n = 0; n < steps; ++n) {
      const auto k1 = deriv(q);
      std::array<double, 6> tmp{};
      for (int i = 0; i < 6; ++i) tmp[i] = q[i] + 0.5 * h * k1[i];
      const auto k2 = deriv(tmp);
      for (int i = 0; i < 6; ++i) tmp[i] = q[i] + 0.5 * h * k2[i];
      const auto k3 = deriv(tmp);
      for (int i = 0; i < 6; ++i) tmp[i] = q[i] + h * k3[i];
      const auto k4 = deriv(tmp);
      for (int i = 0; i < 6; ++i)
        q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    double err = 0.0;
    for (int i = 0; i < 6; ++i) err = std::max(err, std::abs(q[i] - p.p[i]));
    check("steady state matches 1 ms rate-equation integration", err < 1e-9);
  }

  std::cout << (failures ? "selftest: FAILED\n" : "selftest: ok\n");
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-diamond laser-threshold magnetometer model and analysis pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, trace_path, out_path = "spectrum.csv";
  long long seed = 0;
  bool quiet = false;
  int workers = 0;
  double segment = 1.0, demod_fref = 0.0, enbw = 2.6e3, phase = 0.0;

  auto* sim = app.add_subcommand("simulate", "run a configured scenario");
  sim->add_option("--config", config_path, "experiment config file")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--workers", workers, "synthesis worker threads");
  sim->add_flag("--quiet", quiet, "suppress the report on stdout");

  auto* ana = app.add_subcommand("analyze", "spectral density of a trace CSV");
  ana->add_option("--trace", trace_path, "trace CSV (time,voltage)")->required();
  ana->add_option("--out", out_path, "output spectrum CSV");
  ana->add_option("--segment", segment, "segment length, s");
  ana->add_option("--demod", demod_fref, "lock-in reference frequency, Hz");
  ana->add_option("--enbw", enbw, "lock-in noise bandwidth, Hz");
  ana->add_option("--phase", phase, "lock-in phase, rad");
  ana->add_flag("--quiet", quiet, "no stdout");

  auto* rep = app.add_subcommand("report", "derived quantities of a config");
  rep->add_option("--config", config_path, "experiment config file")->required();

  app.add_subcommand("selftest", "run the built-in numeric oracles");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate"))
      return cmd_simulate(config_path, out_dir, seed, seed_opt->count() > 0, workers,
                          quiet);
    if (app.got_subcommand("analyze"))
      return cmd_analyze(trace_path, out_path, segment, demod_fref, enbw, phase, quiet);
    if (app.got_subcommand("report")) return cmd_report(config_path);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
