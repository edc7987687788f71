#pragma once

#include <string>
#include <vector>

#include "nvltm/config.hpp"

namespace nvltm {

struct ReportItem {
  std::string name;
  double value = 0.0;
  std::string unit;
};

struct RunReport {
  std::string scenario;
  std::string config_hash;
  std::vector<ReportItem> derived;
  std::vector<std::string> files;

  double value(const std::string& name) const;
};

// Plain-text rendering; quantities appear in SI and paper-conventional units.
std::string format_report(const RunReport& report);

// Executes the synthesis -> analysis chain for the configured scenario and
// writes traces/spectra/fits as CSV plus report.txt into out_dir. On error,
// partial outputs are removed and the error is rethrown with scenario context.
RunReport run_scenario(const ExperimentConfig& cfg, const std::string& out_dir);

// Derived quantities of a config without synthesizing anything (thresholds,
// cavity chain, T2*, contrast model).
RunReport derive_quantities(const ExperimentConfig& cfg);

}  // namespace nvltm
