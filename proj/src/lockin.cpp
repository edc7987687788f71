#include "nvltm/lockin.hpp"

#include <cmath>
#include <numbers>

#include "nvltm/errors.hpp"

namespace nvltm {

namespace {
using std::numbers::pi;

double stage_power_response(double a, double w) {
  const double b = 1.0 - a;
  return a * a / (1.0 + b * b - 2.0 * b * std::cos(w));
}
}  // namespace

double LockInFilter::calc_enbw(double a) const {
  // Simpson integration of |H(f)|^2 over [0, fs/2].
  constexpr int n = 1 << 14;  // intervals (even)
  const double h = (fs_ / 2.0) / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double f = h * k;
    const double p = std::pow(stage_power_response(a, 2.0 * pi * f / fs_), 4);
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * p;
  }
  return sum * h / 3.0;
}

LockInFilter::LockInFilter(double fs, double enbw_hz) : fs_(fs), enbw_(enbw_hz) {
  if (!(fs > 0.0)) throw InvalidInput("LockInFilter: fs must be > 0");
  if (!(enbw_hz > 0.0) || enbw_hz >= fs / 2.0)
    throw InvalidInput("LockInFilter: enbw must be in (0, fs/2)");

  // ENBW grows monotonically with the stage coefficient.
  double lo = 1e-9, hi = 1.0 - 1e-9;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (calc_enbw(mid) < enbw_hz)
      lo = mid;
    else
      hi = mid;
  }
  a_ = 0.5 * (lo + hi);
  const double err = std::abs(calc_enbw(a_) - enbw_hz) / enbw_hz;
  if (err > 0.02)
    throw InvalidInput("LockInFilter: ENBW calibration failed");
}

double LockInFilter::time_constant() const {
  const double b = 1.0 - a_;
  return -2.0 / (fs_ * std::log(b));
}

double LockInFilter::magnitude(double f) const {
  return std::pow(stage_power_response(a_, 2.0 * pi * f / fs_), 2);
}

TimeTrace lockin_demodulate(const TimeTrace& trace, double f_ref, double phase,
                            double enbw_hz) {
  trace.validate();
  if (!(f_ref > 0.0) || f_ref >= trace.fs / 2.0)
    throw InvalidInput("lockin_demodulate: f_ref must be in (0, fs/2)");
  if (enbw_hz >= f_ref)
    throw AliasingConfig("lockin_demodulate: enbw must be < f_ref");

  LockInFilter filter(trace.fs, enbw_hz);

  TimeTrace out;
  out.fs = trace.fs;
  out.t0 = trace.t0;
  out.meta = trace.meta;
  out.meta.protocol += "+lockin";
  out.samples.resize(trace.samples.size());

  const double w = 2.0 * std::numbers::pi * f_ref;
  const double amp = std::numbers::sqrt2;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const double t = trace.time_at(i);
    out.samples[i] = filter.step(amp * std::cos(w * t + phase) * trace.samples[i]);
  }
  return out;
}

}  // namespace nvltm
