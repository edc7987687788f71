#pragma once

#include <cmath>
#include <numbers>

#include "nvltm/errors.hpp"

namespace nvltm {

// Three-mirror compound cavity reduced to (R1, R_e).
struct CavityConfig {
  double r1 = 0.90;          // diode rear facet power reflectivity
  double r_ff = 0.001;       // diode front facet power reflectivity
  double r2 = 0.90;          // diamond HR output coupler power reflectivity
  double eta_overlap = 0.8;  // internal/external mode overlap
  double l_int = 1.5e-3;     // m
  double l_ext = 30e-3;      // m

  void validate() const {
    for (double r : {r1, r_ff, r2, eta_overlap})
      if (!(r >= 0.0 && r <= 1.0))
        throw InvalidInput("CavityConfig: reflectivities and overlap must be in [0,1]");
    if (!(l_int > 0.0 && l_ext > 0.0))
      throw InvalidInput("CavityConfig: cavity lengths must be > 0");
  }
};

// Effective reflectivity of the front-facet + external-mirror subsystem.
inline double effective_reflectivity(const CavityConfig& c) {
  c.validate();
  const double num = std::sqrt(c.r_ff) + c.eta_overlap * std::sqrt(c.r2);
  const double den = 1.0 + c.eta_overlap * std::sqrt(c.r_ff * c.r2);
  const double amp = num / den;
  return amp * amp;
}

inline double finesse(double r1, double r_e) {
  const double x = r1 * r_e;
  if (!(x >= 0.0)) throw InvalidInput("finesse: R1*Re must be >= 0");
  if (x >= 1.0) throw DivergentFinesse("finesse: R1*Re >= 1");
  return std::numbers::pi * std::pow(x, 0.25) / (1.0 - std::sqrt(x));
}

inline double round_trips(double f) {
  if (!(f >= 0.0)) throw InvalidInput("round_trips: finesse must be >= 0");
  return f / std::numbers::pi;
}

// Geometric cavity enhancement of a small single-pass absorption contrast:
// 2N passes through the intracavity diamond.
inline double geometric_contrast(double c_single, double n_round_trips) {
  if (c_single < 0.0 || n_round_trips < 0.0)
    throw InvalidInput("geometric_contrast: inputs must be >= 0");
  return 2.0 * n_round_trips * c_single;
}

inline double single_pass_contrast(double c_cavity, double n_round_trips) {
  if (c_cavity < 0.0 || !(n_round_trips > 0.0))
    throw InvalidInput("single_pass_contrast: need C >= 0 and N > 0");
  return c_cavity / (2.0 * n_round_trips);
}

}  // namespace nvltm
