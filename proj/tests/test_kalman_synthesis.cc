#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include "rodlqg/errors.h"
#include "rodlqg/kalman_synthesis.h"
#include "rodlqg/spectral_core.h"

using namespace rodlqg;

TEST_CASE("sensed example gains") {
  const FilterGains g = SolveFilterRiccati(examples::EndsAndMidpointSensed());
  const double half = std::sqrt(2.0) / 2.0;
  CHECK(std::abs(g.p00 - half) < 1e-12);
  REQUIRE(g.num_sensors() == 2);
  CHECK(std::abs(g.l[0] - half) < 1e-12);
  CHECK(std::abs(g.l[1] - half) < 1e-12);
  CHECK(std::abs(g.decay0 - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("single weighted sensor") {
  RodConfig c = examples::BothEnds();
  c.sensors = {{0.3, 2.0, 1.0}};
  const FilterGains g = SolveFilterRiccati(c);
  CHECK(g.p00 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.l[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("noise scaling invariants") {
  RodConfig c = examples::EndsAndMidpointSensed();
  c.sensors = {{0.1, 1.5, 0.5}, {0.6, 0.7, 2.0}, {0.9, 3.0, 1.2}};
  c.b = 0.8;
  const FilterGains g = SolveFilterRiccati(c);
  double info = 0.0;
  for (const auto& s : c.sensors) info += s.c * s.c / (s.d * s.d);
  CHECK(std::abs(g.p00 * g.p00 * info - c.b * c.b) < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(g.l[i] > 0.0);
  c.b = 1e-9;
  const FilterGains tiny = SolveFilterRiccati(c);
  CHECK(tiny.p00 < 1e-8);
  for (double l : tiny.l) CHECK(l < 1e-7);
}

TEST_CASE("filter synthesis errors") {
  try {
    SolveFilterRiccati(examples::BothEnds());
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("unobservable: no sensors") != std::string::npos);
  }
  RodConfig c = examples::EndsAndMidpointSensed();
  c.b_profile = {1.0, 0.3};
  CHECK_THROWS_AS(SolveFilterRiccati(c), ValidationError);
}

TEST_CASE("kernel H") {
  const KernelH k{SolveFilterRiccati(examples::EndsAndMidpointSensed()), 64};
  CHECK_THROWS_AS(KernelHValue(k, 0.2, 0.3, 0.1), std::domain_error);
  // s = 0: truncated delta, on the diagonal 1 + 2 sum cos^2
  const double x = 0.3;
  double diag = 1.0;
  for (int n = 1; n <= 64; ++n) diag += 2.0 * std::pow(std::cos(n * kPi * x), 2);
  CHECK(KernelHValue(k, x, x, 0.0) == doctest::Approx(diag).epsilon(1e-13));
  // s = -1: the constant mode dominates
  const double v = KernelHValue(k, 0.2, 0.7, -1.0);
  CHECK(std::abs(v - std::exp(-std::sqrt(2.0))) < 2e-5);
  CHECK(std::exp(-std::sqrt(2.0)) == doctest::Approx(0.2431).epsilon(1e-3));
  CHECK(std::abs(KernelHValue(k, 0.2, 0.7, -60.0)) < 1e-30);
}

TEST_CASE("kernel H symmetry and monotonicity") {
  const KernelH k{SolveFilterRiccati(examples::EndsAndMidpointSensed()), 64};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng), b = u(rng), s = -2.0 * u(rng);
    CHECK(std::abs(KernelHValue(k, a, b, s) - KernelHValue(k, b, a, s)) < 1e-12);
  }
  double prev = KernelHValue(k, 0.4, 0.4, -3.0);
  for (double s = -2.9; s <= 0.0; s += 0.1) {
    const double cur = KernelHValue(k, 0.4, 0.4, std::min(s, 0.0));
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("impulse response") {
  const KernelH k{SolveFilterRiccati(examples::EndsAndMidpointSensed()), 64};
  const double half = std::sqrt(2.0) / 2.0;
  CHECK(ImpulseResponse(k, 0, 0.3, 0.0) == doctest::Approx(half).epsilon(1e-15));
  CHECK(ImpulseResponse(k, 1, 0.3, -1.0) == doctest::Approx(half * std::exp(-std::sqrt(2.0))).epsilon(1e-14));
  CHECK(ImpulseResponse(k, 1, 0.3, -1.0) == doctest::Approx(0.1719).epsilon(1e-3));
  CHECK_THROWS_AS(ImpulseResponse(k, 2, 0.3, -1.0), std::out_of_range);
  CHECK_THROWS_AS(ImpulseResponse(k, -1, 0.3, -1.0), std::out_of_range);
  CHECK_THROWS_AS(ImpulseResponse(k, 0, 0.3, 1.0), std::domain_error);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 50; ++i) {
    const double v = ImpulseResponse(k, 0, u(rng), -0.7);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo < 1e-12);

  // total weight of sensor i: L_i / sum L
  boost::math::quadrature::exp_sinh<double> integrator;
  const double total = integrator.integrate([&](double t) { return ImpulseResponse(k, 0, 0.5, -t); });
  CHECK(total == doctest::Approx(0.5).epsilon(1e-10));
}
