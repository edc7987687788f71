#include "nvltm/spin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "nvltm/errors.hpp"

namespace nvltm {

namespace {

using Matrix3c = Eigen::Matrix3cd;
using std::numbers::pi;

constexpr double kUnitNormTol = 1e-12;

double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(dot(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Local frame for one NV axis: z along the axis, x fixed by projecting a lab
// reference out of the axis. The in-plane strain angle is pinned to 0 here.
void local_frame(const Vec3& axis, Vec3& ex, Vec3& ey) {
  const Vec3 ref = std::abs(axis[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
  const double c = dot(ref, axis);
  Vec3 x{ref[0] - c * axis[0], ref[1] - c * axis[1], ref[2] - c * axis[2]};
  ex = normalized(x);
  ey = cross(axis, ex);
}

}  // namespace

std::array<Vec3, 4> SpinSystem::default_orientations() {
  const double s = 1.0 / std::sqrt(3.0);
  return {Vec3{s, s, s}, Vec3{s, -s, -s}, Vec3{-s, s, -s}, Vec3{-s, -s, s}};
}

void SpinSystem::validate() const {
  if (!(d_splitting > 0.0)) throw InvalidInput("SpinSystem: D must be > 0");
  if (!(e_strain >= 0.0)) throw InvalidInput("SpinSystem: E must be >= 0");
  if (!(gamma_e > 0.0)) throw InvalidInput("SpinSystem: gamma_e must be > 0");
  for (const auto& n : orientations) {
    if (std::abs(dot(n, n) - 1.0) > kUnitNormTol)
      throw InvalidInput("SpinSystem: orientation vector is not unit norm");
  }
}

void RateModel::validate() const {
  for (double r : {k_rad, k35, k45, k56, k61, k62, w_pump, w_mw}) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw InvalidInput("RateModel: rates must be finite and >= 0");
  }
}

bool RateModel::physical_nv() const { return k45 > k35 && k61 > k62; }

void Lineshape::validate() const {
  if (!(fwhm > 0.0)) throw InvalidInput("Lineshape: fwhm must be > 0");
  if (centers.size() != amplitudes.size())
    throw InvalidInput("Lineshape: centers/amplitudes size mismatch");
  if (centers.empty()) throw InvalidInput("Lineshape: no peaks");
  for (double a : amplitudes)
    if (!std::isfinite(a)) throw InvalidInput("Lineshape: non-finite amplitude");
}

std::vector<ResonancePair> resonance_frequencies(const SpinSystem& sys) {
  sys.validate();

  // Spin-1 operators in the |+1>,|0>,|-1> basis.
  const std::complex<double> i(0.0, 1.0);
  const double r2 = 1.0 / std::sqrt(2.0);
  Matrix3c sx, sy, sz;
  sx << 0, r2, 0, r2, 0, r2, 0, r2, 0;
  sy << 0, -i * r2, 0, i * r2, 0, -i * r2, 0, i * r2, 0;
  sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  const Matrix3c sx2 = sx * sx, sy2 = sy * sy, sz2 = sz * sz;

  std::vector<ResonancePair> out;
  out.reserve(sys.orientations.size());
  for (std::size_t k = 0; k < sys.orientations.size(); ++k) {
    const Vec3 axis = sys.orientations[k];
    Vec3 ex, ey;
    local_frame(axis, ex, ey);
    const double bx = dot(sys.b_field, ex);
    const double by = dot(sys.b_field, ey);
    const double bz = dot(sys.b_field, axis);

    Matrix3c h = sys.d_splitting * sz2 + sys.e_strain * (sx2 - sy2) +
                 sys.gamma_e * (bx * sx + by * sy + bz * sz);

    Eigen::SelfAdjointEigenSolver<Matrix3c> solver(h);
    Eigen::Vector3d ev = solver.eigenvalues();  // ascending
    out.push_back({k, ev(1) - ev(0), ev(2) - ev(0)});
  }
  return out;
}

Populations steady_state(const RateModel& m) {
  m.validate();

  // No excitation at all: unpolarized ground manifold.
  if (m.w_pump == 0.0 && m.w_mw == 0.0) {
    Populations pops;
    pops.p = {0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
    return pops;
  }

  Eigen::Matrix<double, 6, 6> rate = Eigen::Matrix<double, 6, 6>::Zero();
  auto flow = [&rate](int from, int to, double k) {
    rate(from, from) -= k;
    rate(to, from) += k;
  };
  flow(0, 2, m.w_pump);  // pump, spin conserving
  flow(1, 3, m.w_pump);
  flow(0, 1, m.w_mw);  // incoherent microwave mixing
  flow(1, 0, m.w_mw);
  flow(2, 0, m.k_rad);  // radiative decay
  flow(3, 1, m.k_rad);
  flow(2, 4, m.k35);  // ISC into the singlet
  flow(3, 4, m.k45);
  flow(4, 5, m.k56);  // singlet internal decay
  flow(5, 0, m.k61);  // ISC back to the ground manifold
  flow(5, 1, m.k62);

  // Replace one balance row with the normalization sum(p) = 1. The matrix is
  // singular exactly when the kernel is not one-dimensional.
  Eigen::Matrix<double, 6, 6> a = rate;
  a.row(5).setOnes();
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  rhs(5) = 1.0;

  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(a);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    throw DegenerateModel("steady_state: rate matrix has a non-unique kernel");

  Eigen::Matrix<double, 6, 1> p = lu.solve(rhs);

  Populations pops;
  double sum = 0.0;
  for (int k = 0; k < 6; ++k) {
    double v = p(k);
    if (v < 0.0) {
      if (v < -1e-9)
        throw DegenerateModel("steady_state: negative population in solution");
      v = 0.0;
    }
    pops.p[k] = v;
    sum += v;
  }
  for (auto& v : pops.p) v /= sum;
  return pops;
}

double singlet_absorption(const Populations& pops, double sigma_cm2,
                          double n_nv_cm3, double path_length_cm) {
  if (sigma_cm2 < 0.0 || n_nv_cm3 < 0.0 || path_length_cm < 0.0)
    throw InvalidInput("singlet_absorption: inputs must be >= 0");
  return sigma_cm2 * n_nv_cm3 * pops.p[5] * path_length_cm;
}

double odmr_lineshape(double f_mw, const Lineshape& shape) {
  shape.validate();
  const double hwhm = 0.5 * shape.fwhm;
  const double h2 = hwhm * hwhm;
  double v = 0.0;
  for (std::size_t k = 0; k < shape.centers.size(); ++k) {
    const double d = f_mw - shape.centers[k];
    v += shape.amplitudes[k] * h2 / (d * d + h2);
  }
  return v;
}

LineshapePeak lineshape_peak(const Lineshape& shape) {
  shape.validate();
  const auto [cmin, cmax] =
      std::minmax_element(shape.centers.begin(), shape.centers.end());
  const double lo = *cmin - 2.0 * shape.fwhm;
  const double hi = *cmax + 2.0 * shape.fwhm;

  // Dense scan to bracket the global maximum, then golden-section refine.
  const int n = 4001;
  const double step = (hi - lo) / (n - 1);
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = odmr_lineshape(lo + k * step, shape);
    if (v > best_v + 1e-18 * std::abs(best_v)) {
      best_v = v;
      best = k;
    }
  }
  double a = lo + std::max(0, best - 1) * step;
  double b = lo + std::min(n - 1, best + 1) * step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = odmr_lineshape(x1, shape), f2 = odmr_lineshape(x2, shape);
  for (int it = 0; it < 200 && (b - a) > 1e-6; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = odmr_lineshape(x1, shape);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = odmr_lineshape(x2, shape);
    }
  }
  const double fpeak = 0.5 * (a + b);
  return {fpeak, odmr_lineshape(fpeak, shape)};
}

double t2star_from_linewidth(double fwhm_hz) {
  if (!(fwhm_hz > 0.0)) throw InvalidInput("t2star_from_linewidth: fwhm must be > 0");
  return 1.0 / (pi * fwhm_hz);
}

}  // namespace nvltm
