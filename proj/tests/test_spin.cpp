#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "nvltm/errors.hpp"
#include "nvltm/spin.hpp"

using namespace nvltm;

namespace {

// Test-side oracle: explicit RK4 integration of the same rate matrix,
// independent of the linear solve in steady_state().
std::array<double, 6> integrate_rate_equations(const RateModel& m, double t_final) {
  auto deriv = [&m](const std::array<double, 6>& s) {
    std::array<double, 6> d{};
    d[0] = -(m.w_pump + m.w_mw) * s[0] + m.w_mw * s[1] + m.k_rad * s[2] + m.k61 * s[5];
    d[1] = -(m.w_pump + m.w_mw) * s[1] + m.w_mw * s[0] + m.k_rad * s[3] + m.k62 * s[5];
    d[2] = m.w_pump * s[0] - (m.k_rad + m.k35) * s[2];
    d[3] = m.w_pump * s[1] - (m.k_rad + m.k45) * s[3];
    d[4] = m.k35 * s[2] + m.k45 * s[3] - m.k56 * s[4];
    d[5] = m.k56 * s[4] - (m.k61 + m.k62) * s[5];
    return d;
  };
  const double max_rate = std::max(
      {m.k_rad, m.k35, m.k45, m.k56, m.k61, m.k62, m.w_pump, m.w_mw, 1.0});
  const double h = 0.5 / max_rate;
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / h));
  std::array<double, 6> q{0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
  std::array<double, 6> tmp{};
  for (std::size_t n = 0; n < steps; ++n) {
    const auto k1 = deriv(q);
    for (int i = 0; i < 6; ++i) tmp[i] = q[i] + 0.5 * h * k1[i];
    const auto k2 = deriv(tmp);
    for (int i = 0; i < 6; ++i) tmp[i] = q[i] + 0.5 * h * k2[i];
    const auto k3 = deriv(tmp);
    for (int i = 0; i < 6; ++i) tmp[i] = q[i] + h * k3[i];
    const auto k4 = deriv(tmp);
    for (int i = 0; i < 6; ++i)
      q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return q;
}

std::array<double, 8> sorted_eight(const std::vector<ResonancePair>& pairs) {
  std::array<double, 8> out{};
  std::size_t k = 0;
  for (const auto& p : pairs) {
    out[k++] = p.f_minus;
    out[k++] = p.f_plus;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("zero field, zero strain: eightfold degeneracy at D") {
  SpinSystem sys;
  const auto res = resonance_frequencies(sys);
  REQUIRE(res.size() == 4);
  for (const auto& r : res) {
    CHECK(r.f_minus == doctest::Approx(2.87e9).epsilon(1e-12));
    CHECK(r.f_plus == doctest::Approx(2.87e9).epsilon(1e-12));
  }
}

TEST_CASE("zero field with strain: splitting 2E on every orientation") {
  SpinSystem sys;
  sys.e_strain = 2.45e6;
  const auto res = resonance_frequencies(sys);
  for (const auto& r : res) {
    CHECK(r.f_minus == doctest::Approx(2.87e9 - 2.45e6).epsilon(1e-12));
    CHECK(r.f_plus == doctest::Approx(2.87e9 + 2.45e6).epsilon(1e-12));
    CHECK(r.f_plus - r.f_minus == doctest::Approx(4.9e6).epsilon(1e-9));
  }
}

TEST_CASE("axial 6 mT field: closed-form D +- gamma*B on the aligned axis") {
  SpinSystem sys;
  const double s = 1.0 / std::sqrt(3.0);
  const double b = 6e-3;
  sys.b_field = {b * s, b * s, b * s};  // along orientation 0
  const auto res = resonance_frequencies(sys);
  const double zeeman = sys.gamma_e * b;  // 168.144 MHz
  CHECK(res[0].f_minus == doctest::Approx(2.87e9 - zeeman).epsilon(1e-10));
  CHECK(res[0].f_plus == doctest::Approx(2.87e9 + zeeman).epsilon(1e-10));
  // the other three orientations see the projected field, not the full one
  CHECK(std::abs(res[1].f_plus - res[1].f_minus) < 2.0 * zeeman);
}

TEST_CASE("resonances invariant under global B sign flip at E = 0") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5e-3, 5e-3);
  for (int trial = 0; trial < 10; ++trial) {
    SpinSystem sys;
    sys.b_field = {u(rng), u(rng), u(rng)};
    SpinSystem flipped = sys;
    for (auto& c : flipped.b_field) c = -c;
    const auto a = sorted_eight(resonance_frequencies(sys));
    const auto b = sorted_eight(resonance_frequencies(flipped));
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(a[k] - b[k]) < 1.0);
  }
}

TEST_CASE("zero field: all orientations identical for any strain") {
  SpinSystem sys;
  sys.e_strain = 1.7e6;
  const auto res = resonance_frequencies(sys);
  for (std::size_t k = 1; k < res.size(); ++k) {
    CHECK(res[k].f_minus == doctest::Approx(res[0].f_minus).epsilon(1e-12));
    CHECK(res[k].f_plus == doctest::Approx(res[0].f_plus).epsilon(1e-12));
  }
}

TEST_CASE("non-unit orientation rejected") {
  SpinSystem sys;
  sys.orientations[2] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(resonance_frequencies(sys), InvalidInput);
}

TEST_CASE("steady state: no excitation leaves the ground manifold") {
  RateModel m;  // w_pump = w_mw = 0
  const Populations p = steady_state(m);
  CHECK(p.p[0] + p.p[1] == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 2; k < 6; ++k) CHECK(p.p[k] == 0.0);
}

TEST_CASE("steady state: symmetric ISC gives no spin polarization") {
  RateModel m;
  m.k35 = m.k45 = 3e7;
  m.k61 = m.k62 = 2e6;
  m.w_pump = 1e6;

  const Populations base = steady_state(m);
  CHECK(base.p[0] == doctest::Approx(base.p[1]).epsilon(1e-12));

  // microwave mixing changes nothing, so the ODMR contrast is exactly zero
  RateModel driven = m;
  driven.w_mw = 5e6;
  const Populations mixed = steady_state(driven);
  CHECK(std::abs(mixed.p[5] - base.p[5]) < 1e-14);
}

TEST_CASE("steady state matches the long-time ODE oracle") {
  RateModel m;
  m.w_pump = 1e6;
  const Populations p = steady_state(m);
  const auto ode = integrate_rate_equations(m, 1e-3);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(p.p[k] - ode[k]) < 1e-9);

  double sum = 0.0;
  for (double v : p.p) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("steady state is a fixed point of the rate matrix") {
  RateModel m;
  m.w_pump = 3e6;
  m.w_mw = 1e6;
  const Populations p = steady_state(m);
  // apply the rate matrix by hand
  std::array<double, 6> d{};
  d[0] = -(m.w_pump + m.w_mw) * p.p[0] + m.w_mw * p.p[1] + m.k_rad * p.p[2] + m.k61 * p.p[5];
  d[1] = -(m.w_pump + m.w_mw) * p.p[1] + m.w_mw * p.p[0] + m.k_rad * p.p[3] + m.k62 * p.p[5];
  d[2] = m.w_pump * p.p[0] - (m.k_rad + m.k35) * p.p[2];
  d[3] = m.w_pump * p.p[1] - (m.k_rad + m.k45) * p.p[3];
  d[4] = m.k35 * p.p[2] + m.k45 * p.p[3] - m.k56 * p.p[4];
  d[5] = m.k56 * p.p[4] - (m.k61 + m.k62) * p.p[5];
  const double max_rate = m.k56;
  for (int k = 0; k < 6; ++k) CHECK(std::abs(d[k]) < 1e-10 * max_rate);
}

TEST_CASE("increasing microwave mixing shelves more population in the singlet") {
  RateModel m;
  m.w_pump = 1e6;
  double last = -1.0;
  for (double w : {0.0, 1e5, 3e5, 1e6, 3e6, 1e7}) {
    m.w_mw = w;
    const double p6 = steady_state(m).p[5];
    CHECK(p6 > last);
    last = p6;
  }
}

TEST_CASE("degenerate rate matrix is rejected") {
  RateModel m;
  m.w_pump = 1e6;
  m.k56 = 0.0;
  m.k61 = 0.0;
  m.k62 = 0.0;  // both singlet levels become absorbing
  CHECK_THROWS_AS(steady_state(m), DegenerateModel);
}

TEST_CASE("singlet absorption worked example") {
  Populations p;
  p.p = {0, 0, 0, 0, 0, 1.0};
  const double n_nv = ppm_to_cm3(1.2);
  CHECK(n_nv == doctest::Approx(2.112e17).epsilon(1e-12));
  const double alpha = singlet_absorption(p, 2e-22, n_nv, 0.025);
  CHECK(alpha == doctest::Approx(1.056e-6).epsilon(1e-12));
  // small-absorbance expansion
  CHECK(std::abs((1.0 - transmission_from_absorbance(alpha)) - alpha) < alpha * alpha);
}

TEST_CASE("singlet absorption: empty crystal") {
  Populations p;
  p.p = {0, 0, 0, 0, 0, 1.0};
  CHECK(singlet_absorption(p, 2e-22, 0.0, 0.025) == 0.0);
  CHECK(transmission_from_absorbance(0.0) == 1.0);
}

TEST_CASE("lineshape: on-resonance and half-maximum values") {
  Lineshape shape;
  shape.centers = {2.87e9};
  shape.fwhm = 6.6e6;
  shape.amplitudes = {0.0054};
  CHECK(odmr_lineshape(2.87e9, shape) == doctest::Approx(0.0054).epsilon(1e-15));
  CHECK(odmr_lineshape(2.87e9 + 3.3e6, shape) == doctest::Approx(0.0027).epsilon(1e-12));
  CHECK(odmr_lineshape(2.87e9 - 3.3e6, shape) == doctest::Approx(0.0027).epsilon(1e-12));
}

TEST_CASE("lineshape: overlapping doublet midpoint") {
  Lineshape shape;
  shape.centers = {2.87e9 - 2.45e6, 2.87e9 + 2.45e6};
  shape.fwhm = 6.6e6;
  shape.amplitudes = {0.0027, 0.0027};
  // analytic: 2*A*hwhm^2/(a^2+hwhm^2), frozen at high precision
  CHECK(odmr_lineshape(2.87e9, shape) == doctest::Approx(3.481189877164422e-3).epsilon(1e-12));
  // wings overlap, so the midpoint sits above a lone peak's half-maximum sum
  CHECK(odmr_lineshape(2.87e9, shape) > 0.0027);
}

TEST_CASE("lineshape symmetry about a single center") {
  Lineshape shape;
  shape.centers = {1e9};
  shape.fwhm = 5e6;
  shape.amplitudes = {1.0};
  for (double d : {1e5, 1e6, 5e6, 2e7})
    CHECK(odmr_lineshape(1e9 + d, shape) ==
          doctest::Approx(odmr_lineshape(1e9 - d, shape)).epsilon(1e-15));
}

TEST_CASE("lineshape peak finder: doublet humps") {
  Lineshape shape;
  shape.centers = {2.87e9 - 2.45e6, 2.87e9 + 2.45e6};
  shape.fwhm = 6.6e6;
  shape.amplitudes = {1.0, 1.0};
  const LineshapePeak peak = lineshape_peak(shape);
  // frozen from a high-precision scan of the doublet profile
  CHECK(peak.value == doctest::Approx(1.3387854411249828).epsilon(1e-9));
  CHECK(std::abs(std::abs(peak.frequency - 2.87e9) - 1.8018708e6) < 100.0);
  // ties resolve to the lower-frequency hump
  CHECK(peak.frequency < 2.87e9);
}

TEST_CASE("invalid lineshape rejected") {
  Lineshape shape;
  shape.centers = {1e9};
  shape.fwhm = -1.0;
  shape.amplitudes = {1.0};
  CHECK_THROWS_AS(odmr_lineshape(1e9, shape), InvalidInput);
}

TEST_CASE("T2* from linewidth") {
  CHECK(t2star_from_linewidth(6.6e6) == doctest::Approx(48.2288e-9).epsilon(1e-4));
  CHECK(t2star_from_linewidth(1.0 / std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t2star_from_linewidth(400e3) == doctest::Approx(795.77e-9).epsilon(1e-4));
  CHECK_THROWS_AS(t2star_from_linewidth(0.0), InvalidInput);
}
