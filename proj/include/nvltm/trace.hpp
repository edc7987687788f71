#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nvltm/errors.hpp"

namespace nvltm {

struct TraceMeta {
  std::string protocol;   // human-readable descriptor of how it was made
  std::uint64_t seed = 0;
};

// Uniformly sampled detector voltage record.
struct TimeTrace {
  std::vector<double> samples;  // V
  double fs = 0.0;              // Hz
  double t0 = 0.0;              // s
  TraceMeta meta;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / fs; }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / fs; }

  void validate() const {
    if (!(fs > 0.0)) throw InvalidInput("TimeTrace: fs must be > 0");
    if (samples.empty()) throw InvalidInput("TimeTrace: empty trace");
    for (double v : samples)
      if (!std::isfinite(v)) throw InvalidInput("TimeTrace: non-finite sample");
  }
};

inline double trace_mean(const TimeTrace& t) {
  double s = 0.0;
  for (double v : t.samples) s += v;
  return s / static_cast<double>(t.samples.size());
}

inline double trace_variance(const TimeTrace& t) {
  const double m = trace_mean(t);
  double s = 0.0;
  for (double v : t.samples) s += (v - m) * (v - m);
  return s / static_cast<double>(t.samples.size());
}

// Drop the first `seconds` of a trace (filter settling, etc).
inline TimeTrace trace_tail(const TimeTrace& t, double seconds) {
  const auto skip = static_cast<std::size_t>(seconds * t.fs);
  if (skip >= t.samples.size()) throw InvalidInput("trace_tail: nothing left");
  TimeTrace out;
  out.fs = t.fs;
  out.t0 = t.t0 + static_cast<double>(skip) / t.fs;
  out.meta = t.meta;
  out.samples.assign(t.samples.begin() + static_cast<std::ptrdiff_t>(skip),
                     t.samples.end());
  return out;
}

}  // namespace nvltm
