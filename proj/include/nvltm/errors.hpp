#pragma once

#include <stdexcept>
#include <string>

namespace nvltm {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rate matrix with a non-unique kernel (no unique steady state)
struct DegenerateModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constant data handed to a fit
struct DegenerateData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergentFinesse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedContrast : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoThresholdFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCrossingFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AliasingConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidBand : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config parse/validation problem; carries the offending line (0 = whole file)
struct ConfigError : std::runtime_error {
  int line;
  explicit ConfigError(const std::string& what, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what
                                       : what),
        line(line_no) {}
};

}  // namespace nvltm
