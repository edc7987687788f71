#include "nvltm/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "nvltm/errors.hpp"

namespace nvltm {

SlopeFit lockin_slope(const std::vector<double>& freqs,
                      const std::vector<double>& values) {
  const std::size_t n = freqs.size();
  if (n != values.size() || n < 4) throw InsufficientData("lockin_slope: too few points");

  // Sign changes; pick the one nearest the scan center.
  std::vector<std::size_t> crossings;
  for (std::size_t i = 1; i < n; ++i)
    if ((values[i - 1] <= 0.0 && values[i] > 0.0) ||
        (values[i - 1] >= 0.0 && values[i] < 0.0))
      crossings.push_back(i);
  if (crossings.empty())
    throw NoCrossingFound("lockin_slope: no zero crossing in the window");
  const double mid = static_cast<double>(n) / 2.0;
  std::size_t cross = crossings.front();
  for (std::size_t c : crossings)
    if (std::abs(static_cast<double>(c) - mid) < std::abs(static_cast<double>(cross) - mid))
      cross = c;

  // Central 30% of points, centered on the crossing.
  auto m = static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(n)));
  m = std::max<std::size_t>(m, 2);
  std::size_t lo = cross > m / 2 ? cross - m / 2 : 0;
  std::size_t hi = std::min(n, lo + m);
  lo = hi > m ? hi - m : 0;

  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    s1 += 1.0;
    sx += freqs[i];
    sxx += freqs[i] * freqs[i];
    sy += values[i];
    sxy += freqs[i] * values[i];
  }
  const double det = s1 * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw DegenerateData("lockin_slope: flat frequency window");
  const double slope = (s1 * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / s1;
  if (slope == 0.0) throw DegenerateData("lockin_slope: zero slope");
  return {slope, -intercept / slope};
}

SpectralDensity volts_to_tesla(const SpectralDensity& sd, double slope_v_per_hz,
                               double gamma_e) {
  sd.validate();
  if (slope_v_per_hz == 0.0) throw InvalidInput("volts_to_tesla: slope is zero");
  if (!(gamma_e > 0.0)) throw InvalidInput("volts_to_tesla: gamma_e must be > 0");
  SpectralDensity out = sd;
  const double scale = 1.0 / (std::abs(slope_v_per_hz) * gamma_e);
  for (auto& v : out.values) v *= scale;
  out.units = "T/sqrt(Hz)";
  return out;
}

double empirical_sensitivity(const SpectralDensity& sd, double f_lo, double f_hi) {
  sd.validate();
  if (!(f_lo <= f_hi)) throw InvalidBand("empirical_sensitivity: f_lo > f_hi");
  if (f_lo < sd.freqs.front() - 0.5 * sd.bin_width() ||
      f_hi > sd.freqs.back() + 0.5 * sd.bin_width())
    throw InvalidBand("empirical_sensitivity: band outside the spectrum");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < sd.freqs.size(); ++k) {
    if (sd.freqs[k] < f_lo || sd.freqs[k] > f_hi) continue;
    sum += sd.values[k];
    ++count;
  }
  if (count == 0) throw InvalidBand("empirical_sensitivity: empty band");
  return sum / static_cast<double>(count);
}

double laser_noise_metric(const SpectralDensity& sd) {
  if (sd.freqs.empty() || sd.freqs.back() < 5e3)
    throw InvalidBand("laser_noise_metric: spectrum does not cover 1-5 kHz");
  return empirical_sensitivity(sd, 1e3, 5e3);
}

double shot_noise_sensitivity(double fwhm_hz, double contrast, double rate_per_s,
                              double gamma_e) {
  if (!(fwhm_hz > 0.0)) throw InvalidInput("shot_noise_sensitivity: fwhm must be > 0");
  if (contrast <= 0.0 || rate_per_s <= 0.0)
    throw InvalidInput("shot_noise_sensitivity: contrast and rate must be > 0");
  const double prefactor = 4.0 / (3.0 * std::sqrt(3.0));
  return prefactor * (1.0 / gamma_e) * fwhm_hz / (contrast * std::sqrt(rate_per_s));
}

double odmr_contrast(double v_on, double v_off) {
  if (!(v_off > 0.0)) throw InvalidInput("odmr_contrast: v_off must be > 0");
  return (v_off - v_on) / v_off;
}

}  // namespace nvltm
