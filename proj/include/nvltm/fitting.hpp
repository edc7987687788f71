#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nvltm {

struct FitParam {
  std::string name;
  double value = 0.0;
  double stderr_ = 0.0;
  std::string unit;
};

struct FitResult {
  std::vector<FitParam> params;
  std::vector<double> covariance;  // row-major p x p
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;

  const FitParam& at(const std::string& name) const;
  double value(const std::string& name) const { return at(name).value; }
  double error(const std::string& name) const { return at(name).stderr_; }
  double cov(std::size_t i, std::size_t j) const {
    return covariance[i * params.size() + j];
  }
};

// Least-squares sum of Lorentzians plus a constant offset. Damped
// (Levenberg-Marquardt) iteration with numeric Jacobians; initial guesses
// from peak picking unless provided. Parameter order:
//   offset, then per peak: center_k, fwhm_k, amp_k.
// Non-convergence is reported in the result, not thrown.
FitResult fit_lorentzian(const std::vector<double>& freqs,
                         const std::vector<double>& values, int n_peaks,
                         const std::vector<double>* init = nullptr);

// P(I) = step(I - I_th) * (P_step + slope*(I - I_th)) + P_floor, with the
// discontinuity location profiled over the sample grid and the linear
// subproblem solved exactly at each candidate. Parameters:
//   i_th, slope, p_step, p_floor.
FitResult fit_threshold(const std::vector<double>& currents,
                        const std::vector<double>& powers);

// Model value of a fitted Lorentzian sum at a frequency.
double lorentzian_model(const FitResult& fit, double f);

}  // namespace nvltm
