#include <cmath>

#include <doctest.h>

#include "rodlqg/care.h"
#include "rodlqg/errors.h"

using namespace rodlqg;

TEST_CASE("Lyapunov solve") {
  Eigen::MatrixXd a(3, 3);
  a << -1, 2, 0, 0, -3, 1, 0.5, 0, -2;
  Eigen::MatrixXd w(3, 3);
  w << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  const Eigen::MatrixXd x = SolveContinuousLyapunov(a, w);
  CHECK((a.transpose() * x + x * a + w).norm() < 1e-12);
  CHECK((x - x.transpose()).norm() < 1e-14);
}

TEST_CASE("scalar Riccati equation") {
  // -2 x - x^2 + 1 = 0 -> x = -1 + sqrt 2
  Eigen::MatrixXd a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << -1;
  b << 1;
  q << 1;
  r << 1;
  const CareSolution s = SolveCare(a, b, q, r);
  CHECK(s.x(0, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(s.residual < 1e-9);
  CHECK(!s.residual_history.empty());
}

TEST_CASE("unstable double integrator") {
  Eigen::MatrixXd a(2, 2), b(2, 1), q = Eigen::MatrixXd::Identity(2, 2), r(1, 1);
  a << 0, 1, 0, 0;
  b << 0, 1;
  r << 1;
  const CareSolution s = SolveCare(a, b, q, r);
  // known solution [[sqrt3, 1], [1, sqrt3]]
  CHECK(s.x(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(s.x(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.x(1, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(CareResidual(a, b, q, r, s.x).norm() < 1e-9);
}

TEST_CASE("zero input on a Hurwitz system is a Lyapunov problem") {
  const int n = 6;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) a(k, k) = -(k + 1.0) * (k + 1.0) * M_PI * M_PI;
  const Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, 2);
  const CareSolution s = SolveCare(a, b, Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(2, 2));
  for (int k = 0; k < n; ++k) {
    CHECK(s.x(k, k) == doctest::Approx(1.0 / (2.0 * (k + 1.0) * (k + 1.0) * M_PI * M_PI)).epsilon(1e-12));
  }
}

TEST_CASE("unstabilizable system reports its residual history") {
  Eigen::MatrixXd a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << 1;
  b << 0;
  q << 1;
  r << 1;
  try {
    SolveCare(a, b, q, r);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).size() > 0);
  }
}
