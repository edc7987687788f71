#pragma once

#include <array>

#include "nvltm/trace.hpp"

namespace nvltm {

// Four identical cascaded one-pole low-pass sections. The per-stage
// coefficient is calibrated at construction (bisection on the numerically
// integrated response) so the cascade's equivalent noise bandwidth matches
// the request.
class LockInFilter {
 public:
  LockInFilter(double fs, double enbw_hz);

  double fs() const { return fs_; }
  double enbw() const { return enbw_; }
  // Equivalent single-pole time constant; a matched coherent input settles
  // to within 0.1% after ~10 of these.
  double time_constant() const;
  // |H(f)| of the cascade (DC gain 1).
  double magnitude(double f) const;

  void reset(double value = 0.0) { y_.fill(value); }
  double step(double x) {
    for (auto& y : y_) {
      y += a_ * (x - y);
      x = y;
    }
    return x;
  }

 private:
  double calc_enbw(double a) const;
  double fs_ = 0.0;
  double enbw_ = 0.0;
  double a_ = 0.0;
  std::array<double, 4> y_{};
};

// Mixes with sqrt(2)*cos(2*pi*f_ref*t + phase) and low-pass filters. RMS
// convention: a coherent input A*cos(2*pi*f_ref*t + phase) settles to A/sqrt(2).
TimeTrace lockin_demodulate(const TimeTrace& trace, double f_ref, double phase,
                            double enbw_hz);

}  // namespace nvltm
