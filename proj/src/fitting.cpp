#include "nvltm/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "nvltm/errors.hpp"

namespace nvltm {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kStepTol = 1e-10;

using Model = std::function<double(const Eigen::VectorXd&, double)>;

struct LMResult {
  Eigen::VectorXd p;
  Eigen::MatrixXd covariance;
  double rms = 0.0;
  bool converged = false;
  int iterations = 0;
};

Eigen::VectorXd residuals(const Model& model, const Eigen::VectorXd& p,
                          const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::VectorXd r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r(i) = model(p, x[i]) - y[i];
  return r;
}

Eigen::MatrixXd jacobian(const Model& model, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& scale, const std::vector<double>& x) {
  Eigen::MatrixXd j(x.size(), p.size());
  for (int k = 0; k < p.size(); ++k) {
    const double h = 1e-7 * std::max(std::abs(p(k)), scale(k));
    Eigen::VectorXd pp = p, pm = p;
    pp(k) += h;
    pm(k) -= h;
    for (std::size_t i = 0; i < x.size(); ++i)
      j(static_cast<int>(i), k) = (model(pp, x[i]) - model(pm, x[i])) / (2.0 * h);
  }
  return j;
}

// Damped least squares with numeric Jacobians.
LMResult levenberg_marquardt(const Model& model, Eigen::VectorXd p,
                             const Eigen::VectorXd& scale, const std::vector<double>& x,
                             const std::vector<double>& y) {
  LMResult res;
  double lambda = 1e-3;
  Eigen::VectorXd r = residuals(model, p, x, y);
  double cost = r.squaredNorm();

  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const Eigen::MatrixXd j = jacobian(model, p, scale, x);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (int k = 0; k < p.size(); ++k)
        a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      const Eigen::VectorXd p_new = p + delta;
      const Eigen::VectorXd r_new = residuals(model, p_new, x, y);
      const double cost_new = r_new.squaredNorm();
      if (cost_new <= cost) {
        double rel_step = 0.0;
        for (int k = 0; k < p.size(); ++k)
          rel_step = std::max(rel_step, std::abs(delta(k)) /
                                            std::max(std::abs(p_new(k)), scale(k)));
        const double rel_drop = (cost - cost_new) / std::max(cost, 1e-300);
        p = p_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (rel_step < kStepTol || rel_drop < 1e-14) {
          res.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || res.converged) {
      if (!accepted) res.converged = true;  // no downhill step left
      ++it;
      break;
    }
  }

  res.p = p;
  res.iterations = std::min(it, kMaxIterations);
  const std::size_t n = x.size();
  const auto np = static_cast<std::size_t>(p.size());
  res.rms = std::sqrt(cost / static_cast<double>(n));

  // Covariance from the undamped normal equations at the optimum.
  const Eigen::MatrixXd j = jacobian(model, p, scale, x);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const double dof = n > np ? static_cast<double>(n - np) : 1.0;
  const double sigma2 = cost / dof;
  Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * sigma2;
  res.covariance = cov;
  return res;
}

double lorentzian_sum(const Eigen::VectorXd& p, double x) {
  double v = p(0);
  const int peaks = (static_cast<int>(p.size()) - 1) / 3;
  for (int k = 0; k < peaks; ++k) {
    const double c = p(1 + 3 * k);
    const double w = p(2 + 3 * k);
    const double a = p(3 + 3 * k);
    const double hw = 0.5 * w;
    const double d = x - c;
    v += a * hw * hw / (d * d + hw * hw);
  }
  return v;
}

}  // namespace

const FitParam& FitResult::at(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw InvalidInput("FitResult: unknown parameter " + name);
}

double lorentzian_model(const FitResult& fit, double f) {
  Eigen::VectorXd p(fit.params.size());
  for (std::size_t k = 0; k < fit.params.size(); ++k) p(k) = fit.params[k].value;
  return lorentzian_sum(p, f);
}

FitResult fit_lorentzian(const std::vector<double>& freqs,
                         const std::vector<double>& values, int n_peaks,
                         const std::vector<double>* init) {
  if (n_peaks != 1 && n_peaks != 2)
    throw InvalidInput("fit_lorentzian: n_peaks must be 1 or 2");
  const std::size_t np = 1 + 3 * static_cast<std::size_t>(n_peaks);
  if (freqs.size() != values.size() || freqs.size() < 3 * np)
    throw InsufficientData("fit_lorentzian: need at least 3*(3*n_peaks+1) points");

  const auto [vmin_it, vmax_it] = std::minmax_element(values.begin(), values.end());
  if (*vmax_it - *vmin_it <= 0.0)
    throw DegenerateData("fit_lorentzian: constant data");
  const auto [fmin_it, fmax_it] = std::minmax_element(freqs.begin(), freqs.end());
  const double span = *fmax_it - *fmin_it;

  // Shift the frequency axis for conditioning.
  const double f0 = 0.5 * (*fmin_it + *fmax_it);
  std::vector<double> x(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) x[i] = freqs[i] - f0;

  Eigen::VectorXd p(np);
  if (init) {
    if (init->size() != np) throw InvalidInput("fit_lorentzian: bad init size");
    for (std::size_t k = 0; k < np; ++k) p(k) = (*init)[k];
    for (int k = 0; k < n_peaks; ++k) p(1 + 3 * k) -= f0;
  } else {
    // Peak picking: extremum against the median, half-height width scan.
    std::vector<double> sorted(values);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double med = sorted[sorted.size() / 2];

    auto pick = [&](const std::vector<bool>& mask) {
      std::size_t best = 0;
      double best_dev = -1.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) continue;
        const double dev = std::abs(values[i] - med);
        if (dev > best_dev) {
          best_dev = dev;
          best = i;
        }
      }
      return best;
    };
    auto width_at = [&](std::size_t peak) {
      const double half = med + 0.5 * (values[peak] - med);
      const bool positive = values[peak] > med;
      std::size_t lo = peak, hi = peak;
      while (lo > 0 && (positive ? values[lo] > half : values[lo] < half)) --lo;
      while (hi + 1 < values.size() && (positive ? values[hi] > half : values[hi] < half))
        ++hi;
      double w = std::abs(freqs[hi] - freqs[lo]);
      if (!(w > 0.0)) w = span / 6.0;
      return w;
    };

    std::vector<bool> mask(values.size(), false);
    const std::size_t p1 = pick(mask);
    const double w1 = width_at(p1);
    p(0) = med;
    p(1) = x[p1];
    p(2) = w1;
    p(3) = values[p1] - med;
    if (n_peaks == 2) {
      for (std::size_t i = 0; i < values.size(); ++i)
        if (std::abs(freqs[i] - freqs[p1]) < 0.75 * w1) mask[i] = true;
      bool any = std::find(mask.begin(), mask.end(), false) != mask.end();
      std::size_t p2 = any ? pick(mask) : p1;
      if (!any || std::abs(x[p2] - x[p1]) < 0.05 * w1) {
        // Merged doublet: split symmetrically about the single hump.
        p(1) = x[p1] - 0.25 * w1;
        p(4) = x[p1] + 0.25 * w1;
        p(5) = w1;
        p(6) = values[p1] - med;
      } else {
        p(4) = x[p2];
        p(5) = width_at(p2);
        p(6) = values[p2] - med;
      }
    }
  }

  Eigen::VectorXd scale(np);
  scale(0) = std::max(std::abs(*vmax_it), std::abs(*vmin_it));
  for (int k = 0; k < n_peaks; ++k) {
    scale(1 + 3 * k) = span;
    scale(2 + 3 * k) = span;
    scale(3 + 3 * k) = *vmax_it - *vmin_it;
  }

  LMResult lm = levenberg_marquardt(lorentzian_sum, p, scale, x, values);

  // Canonical form: positive widths, peaks ordered by center.
  for (int k = 0; k < n_peaks; ++k) lm.p(2 + 3 * k) = std::abs(lm.p(2 + 3 * k));
  if (n_peaks == 2 && lm.p(1) > lm.p(4)) {
    std::swap(lm.p(1), lm.p(4));
    std::swap(lm.p(2), lm.p(5));
    std::swap(lm.p(3), lm.p(6));
    // keep covariance consistent with the swap
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(static_cast<int>(np));
    perm.setIdentity();
    std::swap(perm.indices()(1), perm.indices()(4));
    std::swap(perm.indices()(2), perm.indices()(5));
    std::swap(perm.indices()(3), perm.indices()(6));
    lm.covariance = perm.transpose() * lm.covariance * perm;
  }

  FitResult out;
  out.converged = lm.converged;
  out.iterations = lm.iterations;
  out.residual_rms = lm.rms;
  out.params.push_back({"offset", lm.p(0), std::sqrt(std::max(0.0, lm.covariance(0, 0))), ""});
  for (int k = 0; k < n_peaks; ++k) {
    const std::string suffix = std::to_string(k + 1);
    out.params.push_back({"center" + suffix, lm.p(1 + 3 * k) + f0,
                          std::sqrt(std::max(0.0, lm.covariance(1 + 3 * k, 1 + 3 * k))),
                          "Hz"});
    out.params.push_back({"fwhm" + suffix, lm.p(2 + 3 * k),
                          std::sqrt(std::max(0.0, lm.covariance(2 + 3 * k, 2 + 3 * k))),
                          "Hz"});
    out.params.push_back({"amp" + suffix, lm.p(3 + 3 * k),
                          std::sqrt(std::max(0.0, lm.covariance(3 + 3 * k, 3 + 3 * k))),
                          ""});
  }
  out.covariance.resize(np * np);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j)
      out.covariance[i * np + j] = lm.covariance(static_cast<int>(i), static_cast<int>(j));
  return out;
}

FitResult fit_threshold(const std::vector<double>& currents,
                        const std::vector<double>& powers) {
  if (currents.size() != powers.size() || currents.size() < 8)
    throw InsufficientData("fit_threshold: need at least 8 points");

  // Sort by current.
  std::vector<std::size_t> order(currents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return currents[a] < currents[b]; });
  const std::size_t n = order.size();
  std::vector<double> ci(n), pw(n);
  for (std::size_t k = 0; k < n; ++k) {
    ci[k] = currents[order[k]];
    pw[k] = powers[order[k]];
  }

  // Prefix sums for O(1) constant and linear sub-fits at each candidate.
  std::vector<double> s1(n + 1, 0.0), si(n + 1, 0.0), sii(n + 1, 0.0), sp(n + 1, 0.0),
      sip(n + 1, 0.0), spp(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    s1[k + 1] = s1[k] + 1.0;
    si[k + 1] = si[k] + ci[k];
    sii[k + 1] = sii[k] + ci[k] * ci[k];
    sp[k + 1] = sp[k] + pw[k];
    sip[k + 1] = sip[k] + ci[k] * pw[k];
    spp[k + 1] = spp[k] + pw[k] * pw[k];
  }

  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  double best_floor = 0.0, best_a = 0.0, best_slope = 0.0;
  bool found = false;

  for (std::size_t k = 2; k + 3 <= n; ++k) {
    // below: j < k constant; above: j >= k linear in (I - I_k)
    const double m_lo = s1[k];
    const double c = sp[k] / m_lo;
    const double sse_lo = spp[k] - sp[k] * sp[k] / m_lo;

    const double m_hi = s1[n] - s1[k];
    const double sum_i = si[n] - si[k];
    const double sum_ii = sii[n] - sii[k];
    const double sum_p = sp[n] - sp[k];
    const double sum_ip = sip[n] - sip[k];
    const double sum_pp = spp[n] - spp[k];
    const double det = m_hi * sum_ii - sum_i * sum_i;
    if (!(det > 0.0)) continue;  // no current spread above the candidate
    // fit p = alpha + beta*I on the suffix
    const double beta = (m_hi * sum_ip - sum_i * sum_p) / det;
    const double alpha = (sum_p - beta * sum_i) / m_hi;
    const double sse_hi = sum_pp - alpha * sum_p - beta * sum_ip;

    const double sse = sse_lo + std::max(sse_hi, 0.0);
    if (sse < best_sse) {
      best_sse = sse;
      best_k = k;
      best_floor = c;
      best_slope = beta;
      best_a = alpha + beta * ci[k];  // value of the lasing branch at I_th
      found = true;
    }
  }
  if (!found) throw NoThresholdFound("fit_threshold: no valid split of the data");

  const double i_th = ci[best_k];
  const double p_step = best_a - best_floor;
  const double dof = static_cast<double>(n) - 4.0;
  const double rms = std::sqrt(std::max(best_sse, 0.0) / std::max(dof, 1.0));

  const double scale = std::max(std::abs(*std::max_element(pw.begin(), pw.end())),
                                std::abs(*std::min_element(pw.begin(), pw.end())));
  if (p_step <= std::max(3.0 * rms, 1e-12 * scale))
    throw NoThresholdFound("fit_threshold: no discontinuity above the noise");

  // Local grid spacing bounds the threshold location uncertainty.
  const double grid = best_k > 0 ? ci[best_k] - ci[best_k - 1] : 0.0;

  FitResult out;
  out.converged = true;
  out.iterations = static_cast<int>(n);
  out.residual_rms = rms;
  out.params.push_back({"i_th", i_th, grid, "A"});
  out.params.push_back({"slope", best_slope, 0.0, "W/A"});
  out.params.push_back({"p_step", p_step, rms, "W"});
  out.params.push_back({"p_floor", best_floor, rms, "W"});
  out.covariance.assign(16, 0.0);
  return out;
}

}  // namespace nvltm
