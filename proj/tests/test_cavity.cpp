#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nvltm/cavity.hpp"

using namespace nvltm;

TEST_CASE("effective reflectivity of the paper cavity") {
  CavityConfig c;  // R_ff = 0.001, R2 = 0.90, eta = 0.8
  const double re = effective_reflectivity(c);
  CHECK(re == doctest::Approx(0.596046).epsilon(1e-5));
  CHECK(std::abs(re - 0.60) < 0.01);
}

TEST_CASE("effective reflectivity limits") {
  CavityConfig c;
  c.eta_overlap = 0.0;
  CHECK(effective_reflectivity(c) == doctest::Approx(c.r_ff).epsilon(1e-14));
  c.eta_overlap = 1.0;
  c.r_ff = 0.0;
  CHECK(effective_reflectivity(c) == doctest::Approx(c.r2).epsilon(1e-14));
}

TEST_CASE("effective reflectivity monotone in R2") {
  CavityConfig c;
  double last = -1.0;
  for (double r2 = 0.1; r2 <= 0.99; r2 += 0.05) {
    c.r2 = r2;
    const double re = effective_reflectivity(c);
    CHECK(re > last);
    last = re;
  }
}

TEST_CASE("finesse of the compound cavity") {
  CHECK(finesse(0.90, 0.60) == doctest::Approx(10.156677).epsilon(1e-6));
  CHECK(finesse(0.99, 0.99) == doctest::Approx(312.58452).epsilon(1e-6));
  CHECK(finesse(0.0, 0.5) == 0.0);
}

TEST_CASE("finesse strictly increasing in R1*Re") {
  double last = -1.0;
  for (double x = 0.0; x < 0.999; x += 0.013) {
    const double f = finesse(x, 1.0);
    CHECK(f > last);
    last = f;
  }
}

TEST_CASE("divergent finesse rejected") {
  CHECK_THROWS_AS(finesse(1.0, 1.0), DivergentFinesse);
}

TEST_CASE("round trips") {
  CHECK(round_trips(10.0) == doctest::Approx(3.1831).epsilon(1e-4));
  CHECK(round_trips(3.14159265358979323846) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(round_trips(312.58452) == doctest::Approx(99.4987).epsilon(1e-4));
}

TEST_CASE("geometric contrast enhancement and its inverse") {
  CHECK(single_pass_contrast(0.0054, 3.0) == doctest::Approx(0.0009).epsilon(1e-12));
  CHECK(geometric_contrast(0.0, 5.0) == 0.0);
  CHECK(geometric_contrast(1e-6, 99.5) == doctest::Approx(1.99e-4).epsilon(1e-12));
  for (double c = 1e-6; c < 1e-2; c *= 3.7) {
    CHECK(single_pass_contrast(geometric_contrast(c, 3.2), 3.2) ==
          doctest::Approx(c).epsilon(1e-15));
  }
}
