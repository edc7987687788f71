#include "nvltm/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nvltm/errors.hpp"

namespace nvltm {

void SpectralDensity::validate() const {
  if (freqs.size() != values.size() || freqs.empty())
    throw InvalidInput("SpectralDensity: empty or mismatched axes");
  for (std::size_t k = 1; k < freqs.size(); ++k)
    if (!(freqs[k] > freqs[k - 1]))
      throw InvalidInput("SpectralDensity: frequency axis must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0)) throw InvalidInput("SpectralDensity: negative density");
}

SpectralDensity lsd(const TimeTrace& trace, double segment_seconds) {
  trace.validate();
  if (!(segment_seconds > 0.0)) throw InvalidInput("lsd: segment_seconds must be > 0");

  const auto n_seg = static_cast<std::size_t>(std::llround(segment_seconds * trace.fs));
  if (n_seg < 2) throw InvalidInput("lsd: segment too short");
  const std::size_t segments = trace.samples.size() / n_seg;
  if (segments < 1)
    throw InsufficientData("lsd: trace shorter than one segment");

  const std::size_t nbins = n_seg / 2 + 1;
  std::vector<double> power(nbins, 0.0);

  double* in = fftw_alloc_real(n_seg);
  fftw_complex* out = fftw_alloc_complex(nbins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_seg), in, out, FFTW_ESTIMATE);

  for (std::size_t s = 0; s < segments; ++s) {
    std::memcpy(in, trace.samples.data() + s * n_seg, n_seg * sizeof(double));
    fftw_execute(plan);
    for (std::size_t k = 0; k < nbins; ++k) {
      const double mag2 = out[k][0] * out[k][0] + out[k][1] * out[k][1];
      const bool edge = (k == 0) || (n_seg % 2 == 0 && k == nbins - 1);
      power[k] += (edge ? 1.0 : 2.0) * mag2 / (trace.fs * static_cast<double>(n_seg));
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  SpectralDensity sd;
  sd.n_segments = static_cast<int>(segments);
  sd.freqs.resize(nbins);
  sd.values.resize(nbins);
  const double df = trace.fs / static_cast<double>(n_seg);
  for (std::size_t k = 0; k < nbins; ++k) {
    sd.freqs[k] = df * static_cast<double>(k);
    sd.values[k] = std::sqrt(power[k] / static_cast<double>(segments));
  }
  return sd;
}

double integrated_power(const SpectralDensity& sd) {
  sd.validate();
  const double df = sd.bin_width();
  double sum = 0.0;
  for (double v : sd.values) sum += v * v;
  return sum * df;
}

double bin_value(const SpectralDensity& sd, double freq) {
  sd.validate();
  const auto it = std::lower_bound(sd.freqs.begin(), sd.freqs.end(), freq);
  std::size_t k = static_cast<std::size_t>(it - sd.freqs.begin());
  if (k > 0 && (k == sd.freqs.size() || freq - sd.freqs[k - 1] < sd.freqs[k] - freq)) --k;
  return sd.values[k];
}

}  // namespace nvltm
