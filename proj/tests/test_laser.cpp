#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nvltm/errors.hpp"
#include "nvltm/laser.hpp"

using namespace nvltm;

TEST_CASE("threshold ladder with the calibrated defaults") {
  const PICurveModel m = paper_default_pi_model();
  const MicrowaveDrive peak = MicrowaveDrive::at(m.mw_peak_freq);

  const auto bare = thresholds(m, false, MicrowaveDrive::off());
  CHECK(bare.forward == doctest::Approx(26.75e-3).epsilon(1e-12));

  const auto pump = thresholds(m, true, MicrowaveDrive::off());
  CHECK(pump.forward == doctest::Approx(28.08e-3).epsilon(1e-12));
  CHECK(pump.reverse == doctest::Approx(24.14e-3).epsilon(1e-12));

  const auto mw = thresholds(m, true, peak);
  CHECK(mw.forward == doctest::Approx(28.26e-3).epsilon(1e-12));
}

TEST_CASE("sweep-session model reproduces the sawtooth thresholds") {
  const PICurveModel m = sweep_session_pi_model();
  const auto th = thresholds(m, true, MicrowaveDrive::off());
  CHECK(th.forward == doctest::Approx(28.11e-3).epsilon(1e-12));
  CHECK(th.reverse == doctest::Approx(24.14e-3).epsilon(1e-12));  // di_hyst = 3.97 mA
}

TEST_CASE("power jump at the forward crossing") {
  const PICurveModel m = paper_default_pi_model();
  LaserState state;
  const double just_below = 26.75e-3 - 1e-6;
  const double at = 26.75e-3;
  CHECK(pi_curve(m, just_below, state, false, MicrowaveDrive::off()) ==
        doctest::Approx(3.49e-6).epsilon(1e-12));
  CHECK_FALSE(state.lasing);
  CHECK(pi_curve(m, at, state, false, MicrowaveDrive::off()) ==
        doctest::Approx(416e-6).epsilon(1e-12));
  CHECK(state.lasing);
}

TEST_CASE("zero current: floor, not lasing") {
  const PICurveModel m = paper_default_pi_model();
  LaserState state;
  CHECK(pi_curve(m, 0.0, state, false, MicrowaveDrive::off()) ==
        doctest::Approx(3.49e-6).epsilon(1e-12));
  CHECK_FALSE(state.lasing);
}

TEST_CASE("hysteresis loop: turn-off below turn-on") {
  const PICurveModel m = paper_default_pi_model();
  const auto th = thresholds(m, true, MicrowaveDrive::off());

  LaserState state;
  std::vector<double> up, down;
  const int n = 2000;
  double turn_on = 0.0, turn_off = 0.0;
  for (int k = 0; k <= n; ++k) {  // up sweep
    const double current = 20e-3 + 12e-3 * k / n;
    const bool was = state.lasing;
    up.push_back(pi_curve(m, current, state, true, MicrowaveDrive::off()));
    if (!was && state.lasing) turn_on = current;
  }
  for (int k = n; k >= 0; --k) {  // down sweep
    const double current = 20e-3 + 12e-3 * k / n;
    const bool was = state.lasing;
    down.push_back(pi_curve(m, current, state, true, MicrowaveDrive::off()));
    if (was && !state.lasing) turn_off = current;
  }
  CHECK(turn_on > turn_off);
  CHECK(turn_on - turn_off == doctest::Approx(m.di_hyst).epsilon(1e-3));
  CHECK(std::abs(turn_on - th.forward) < 12e-3 / n + 1e-9);
  CHECK(std::abs(turn_off - th.reverse) < 12e-3 / n + 1e-9);

  // monotone non-decreasing output on the monotone up sweep
  for (std::size_t k = 1; k < up.size(); ++k) CHECK(up[k] >= up[k - 1]);

  // hysteresis loop area is positive
  double area = 0.0;
  for (std::size_t k = 0; k < up.size(); ++k)
    area += down[up.size() - 1 - k] - up[k];
  area *= 12e-3 / n;
  CHECK(area > 0.0);
}

TEST_CASE("forward and reverse traces coincide outside the hysteresis window") {
  const PICurveModel m = paper_default_pi_model();
  const auto th = thresholds(m, true, MicrowaveDrive::off());
  LaserState up_state, down_state{true, SweepSense::reverse};
  for (double current : {20e-3, 22e-3, th.reverse - 1e-6, th.forward + 1e-6, 30e-3, 45e-3}) {
    LaserState a = up_state, b = down_state;
    const double pa = pi_curve(m, current, a, true, MicrowaveDrive::off());
    const double pb = pi_curve(m, current, b, true, MicrowaveDrive::off());
    if (current < th.reverse || current >= th.forward)
      CHECK(pa == doctest::Approx(pb).epsilon(1e-15));
  }
}

TEST_CASE("threshold ODMR profile") {
  const PICurveModel m = paper_default_pi_model();

  SUBCASE("far off resonance: no shift") {
    const auto prof = threshold_odmr(m, {2.0e9, 3.6e9});
    for (const auto& [f, di] : prof) CHECK(std::abs(di) < 1e-3 * m.di_mw_peak);
  }

  SUBCASE("peak shift is the configured 0.18 mA") {
    const auto prof = threshold_odmr(m, {m.mw_peak_freq});
    CHECK(prof[0].second == doctest::Approx(0.18e-3).epsilon(1e-12));
  }

  SUBCASE("profile is proportional to the lineshape") {
    std::vector<double> freqs;
    for (int k = 0; k <= 200; ++k) freqs.push_back(2.85e9 + 40e6 * k / 200);
    const auto prof = threshold_odmr(m, freqs);
    const double scale = m.di_mw_peak / m.mw_peak_value;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      const double expected = scale * odmr_lineshape(freqs[k], m.mw_shape);
      CHECK(std::abs(prof[k].second - expected) < 1e-12 * m.di_mw_peak);
    }
  }
}

TEST_CASE("contrast model calibration points") {
  const PICurveModel m = paper_default_pi_model();
  const double r_on = m.reverse_threshold(true, 1.0);

  SUBCASE("near threshold: 2.56%") {
    CHECK(contrast_vs_current(m, r_on, ContrastVariant::step) ==
          doctest::Approx(0.0256).epsilon(1e-9));
  }

  SUBCASE("far above threshold: saturates at 0.54%") {
    CHECK(contrast_vs_current(m, 2.0, ContrastVariant::step) ==
          doctest::Approx(0.0054).epsilon(0.05));
    CHECK(contrast_limit(m) == doctest::Approx(0.0054).epsilon(1e-12));
  }

  SUBCASE("ideal variant saturates between thresholds") {
    const double f_off = m.forward_threshold(true, 0.0);
    const double f_on = m.forward_threshold(true, 1.0);
    for (double current : {f_off + 0.01e-3, 0.5 * (f_off + f_on), f_on - 0.01e-3})
      CHECK(contrast_vs_current(m, current, ContrastVariant::ideal) == 1.0);
  }

  SUBCASE("below both thresholds: undefined") {
    CHECK_THROWS_AS(contrast_vs_current(m, 20e-3, ContrastVariant::step),
                    UndefinedContrast);
    CHECK_THROWS_AS(contrast_vs_current(m, 20e-3, ContrastVariant::ideal),
                    UndefinedContrast);
  }
}

TEST_CASE("ideal contrast: monotone, closed-form tail") {
  const PICurveModel m = paper_default_pi_model();
  const double f_off = m.forward_threshold(true, 0.0);
  const double f_on = m.forward_threshold(true, 1.0);

  double last = 2.0;
  for (double current = f_off + 1e-5; current < 0.2; current *= 1.07) {
    const double c = contrast_vs_current(m, current, ContrastVariant::ideal);
    CHECK(c <= last + 1e-15);
    last = c;
    if (current > f_on) {
      const double expected =
          1.0 - m.slope_on * (current - f_on) / (m.slope_off * (current - f_off));
      CHECK(std::abs(c - expected) < 1e-12);
    }
  }
}

TEST_CASE("step contrast never exceeds ideal contrast") {
  const PICurveModel m = paper_default_pi_model();
  const double f_off = m.forward_threshold(true, 0.0);
  for (double current = f_off + 1e-5; current < 0.3; current *= 1.04) {
    const double step = contrast_vs_current(m, current, ContrastVariant::step);
    const double ideal = contrast_vs_current(m, current, ContrastVariant::ideal);
    CHECK(step <= ideal + 1e-15);
  }
}

TEST_CASE("slope calibration solves the two contrast targets") {
  auto [s_off, s_on] = calibrate_slopes(416e-6, 3.94e-3, 0.18e-3, 0.0054, 0.0256);
  CHECK(s_off == doctest::Approx(0.041766413052).epsilon(1e-9));
  CHECK(s_on / s_off == doctest::Approx(1.0 - 0.0054).epsilon(1e-15));
}

TEST_CASE("microwave shift profile derived from the six-level model") {
  RateModel rates;
  rates.w_pump = 1e6;

  Lineshape shape;
  shape.centers = {2.87e9 - 2.45e6, 2.87e9 + 2.45e6};
  shape.fwhm = 6.6e6;
  shape.amplitudes = {1.0, 1.0};

  std::vector<double> freqs;
  for (int k = 0; k <= 80; ++k) freqs.push_back(2.85e9 + 40e6 * k / 80);

  const auto shift = mw_shift_from_spin_model(rates, 1e5, shape, freqs, 0.18e-3);
  const double peak = *std::max_element(shift.begin(), shift.end());
  CHECK(peak == doctest::Approx(0.18e-3).epsilon(1e-12));

  // weak drive: the profile tracks the Lorentzian doublet shape closely
  const double smax = lineshape_peak(shape).value;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double u = odmr_lineshape(freqs[k], shape) / smax;
    CHECK(shift[k] == doctest::Approx(0.18e-3 * u).epsilon(0.08));
  }

  // symmetric ISC: no response at all
  RateModel symmetric = rates;
  symmetric.k35 = symmetric.k45 = 3e7;
  symmetric.k61 = symmetric.k62 = 2e6;
  CHECK_THROWS_AS(mw_shift_from_spin_model(symmetric, 1e5, shape, freqs, 0.18e-3),
                  DegenerateModel);
}

TEST_CASE("model validation") {
  PICurveModel m = paper_default_pi_model();
  m.slope_on = m.slope_off * 1.01;
  CHECK_THROWS_AS(m.validate(), InvalidInput);
}
