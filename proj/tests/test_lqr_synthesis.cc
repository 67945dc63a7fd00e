#include <cmath>
#include <random>

#include <Eigen/LU>
#include <doctest.h>

#include "rodlqg/errors.h"
#include "rodlqg/lqr_synthesis.h"

using namespace rodlqg;

namespace {

RodConfig SingleLeftActuator() {
  RodConfig c;
  c.actuators = {{0.0, 1.0}};
  c.r = Eigen::MatrixXd::Identity(1, 1);
  return c;
}

}  // namespace

TEST_CASE("gamma examples") {
  const RodConfig e1 = examples::BothEnds();
  for (int n = 0; n < 12; ++n) CHECK(std::abs(Gamma(e1, n, n) - 2.0) < 1e-14);
  CHECK(std::abs(Gamma(e1, 0, 1)) < 1e-14);
  CHECK(std::abs(Gamma(e1, 0, 2) - 2.0) < 1e-14);

  const RodConfig e2 = examples::EndsAndMidpoint();
  for (int n = 0; n < 12; ++n) {
    CHECK(std::abs(Gamma(e2, n, n) - (n % 2 == 0 ? 6.0 : 2.0)) < 1e-12);
  }
  CHECK(Gamma(e2, 3, 5) == doctest::Approx(Gamma(e2, 5, 3)));
}

TEST_CASE("Riccati coefficients for both-ends heating") {
  const DiagonalRiccati ric = SolveRiccatiDiagonal(examples::BothEnds(), 512);
  const double expected[] = {1.4142, 0.1008, 0.0253, 0.0113, 0.0063, 0.0041};
  for (int n = 0; n <= 5; ++n) CHECK(std::abs(ric.p[n] - expected[n]) < 5e-5);
  CHECK(ric.order == 512);
  CHECK(ric.p.size() == 513);
}

TEST_CASE("Riccati coefficient closed form") {
  const DiagonalRiccati ric = SolveRiccatiDiagonal(examples::EndsAndMidpoint(), 4);
  const double pi2 = kPi * kPi;
  CHECK(ric.p[1] == doctest::Approx(-pi2 + std::sqrt(pi2 * pi2 + 2.0)).epsilon(1e-12));
  CHECK(ric.p[1] == doctest::Approx(0.1008).epsilon(1e-3));
  CHECK(ric.p[0] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("small state weight drives P to zero") {
  RodConfig c = examples::BothEnds();
  c.q = 1e-12;
  const DiagonalRiccati ric = SolveRiccatiDiagonal(c, 20);
  for (double p : ric.p) CHECK(p < 2e-6);
}

TEST_CASE("gamma zero on a node gives a zero coefficient") {
  RodConfig c;
  c.actuators = {{0.5, 1.0}};
  c.r = Eigen::MatrixXd::Identity(1, 1);
  const DiagonalRiccati ric = SolveRiccatiDiagonal(c, 5);
  CHECK(ric.p[1] == 0.0);
  CHECK(ric.p[3] == 0.0);
  CHECK(ric.p[2] > 0.0);
}

TEST_CASE("all-zero flux coefficients are rejected upstream") {
  RodConfig d = SingleLeftActuator();
  d.actuators[0].beta = 0.0;
  CHECK_THROWS_AS(SolveRiccatiDiagonal(d, 3), ValidationError);
}

TEST_CASE("kernel symmetry and tail bound") {
  const DiagonalRiccati ric = SolveRiccatiDiagonal(examples::EndsAndMidpoint(), 200);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(ric.Kernel(a, b) - ric.Kernel(b, a)) < 1e-12);
  }
  // the bound covers the actual tail between N = 200 and N = 4000
  const DiagonalRiccati big = SolveRiccatiDiagonal(examples::EndsAndMidpoint(), 4000);
  double tail = 0.0;
  for (int n = 201; n <= 4000; ++n) tail += big.p[n];
  CHECK(tail <= ric.tail_bound);
}

TEST_CASE("gain field matches an independent dense product") {
  for (const RodConfig& c : {examples::BothEnds(), examples::EndsAndMidpoint()}) {
    const DiagonalRiccati ric = SolveRiccatiDiagonal(c, 40);
    const GainField g = ComputeGainField(c, ric);
    const int m = c.num_actuators();
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) beta(k, k) = c.actuators[k].beta;
    const Eigen::MatrixXd rinv = c.r.inverse();
    for (int n = 0; n <= 40; ++n) {
      Eigen::VectorXd col(m);
      for (int j = 0; j < m; ++j) col(j) = ric.p[n] * std::cos(n * kPi * c.actuators[j].xi);
      const Eigen::VectorXd expect = -rinv * beta * col;
      for (int k = 0; k < m; ++k) CHECK(std::abs(g.coeffs(k)[n] - expect(k)) < 1e-13);
    }
  }
}

TEST_CASE("gain field examples") {
  const RodConfig e1 = examples::BothEnds();
  const DiagonalRiccati r1 = SolveRiccatiDiagonal(e1, 10);
  const GainField g1 = ComputeGainField(e1, r1);
  for (int n = 0; n <= 10; ++n) {
    CHECK(g1.coeffs(0)[n] == doctest::Approx(-r1.p[n]));
    CHECK(g1.coeffs(1)[n] == doctest::Approx(-(n % 2 ? -1.0 : 1.0) * r1.p[n]));
  }
  const RodConfig e2 = examples::EndsAndMidpoint();
  const DiagonalRiccati r2 = SolveRiccatiDiagonal(e2, 10);
  const GainField g2 = ComputeGainField(e2, r2);
  for (int n = 0; n <= 10; ++n) {
    const double expect = n % 2 ? 0.0 : -2.0 * ((n / 2) % 2 ? -1.0 : 1.0) * r2.p[n];
    CHECK(std::abs(g2.coeffs(1)[n] - expect) < 1e-14);
  }
  const RodConfig single = SingleLeftActuator();
  const DiagonalRiccati rs = SolveRiccatiDiagonal(single, 6);
  const GainField gs = ComputeGainField(single, rs);
  for (int n = 0; n <= 6; ++n) CHECK(gs.coeffs(0)[n] == -rs.p[n]);
}

TEST_CASE("scaling q and R together") {
  // gamma q is invariant, so P is too; the gains carry R^-1 and scale by 1/alpha
  const RodConfig c = examples::EndsAndMidpoint();
  RodConfig scaled = c;
  const double alpha = 3.5;
  scaled.q *= alpha;
  scaled.r *= alpha;
  const DiagonalRiccati a = SolveRiccatiDiagonal(c, 64);
  const DiagonalRiccati b = SolveRiccatiDiagonal(scaled, 64);
  for (int n = 0; n <= 64; ++n) CHECK(b.p[n] == doctest::Approx(a.p[n]).epsilon(1e-13));
  const GainField ga = ComputeGainField(c, a);
  const GainField gb = ComputeGainField(scaled, b);
  for (int k = 0; k < 3; ++k) {
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      CHECK(std::abs(alpha * gb.Value(k, x) - ga.Value(k, x)) < 1e-12 * (1.0 + std::abs(ga.Value(k, x))));
    }
  }
}

TEST_CASE("gain field rejects a foreign Riccati solution") {
  const DiagonalRiccati ric = SolveRiccatiDiagonal(examples::BothEnds(), 5);
  CHECK_THROWS_AS(ComputeGainField(examples::EndsAndMidpoint(), ric), std::invalid_argument);
}

TEST_CASE("gain field modal weights and apply") {
  const RodConfig c = examples::BothEnds();
  const GainField g = ComputeGainField(c, SolveRiccatiDiagonal(c, 8));
  CHECK(g.FeedbackWeight(0, 0) == g.coeffs(0)[0]);
  CHECK(g.FeedbackWeight(0, 3) == doctest::Approx(g.coeffs(0)[3] / kSqrt2));
  CHECK(g.FeedbackWeight(0, 9) == 0.0);
  const ModalVector z = ModalVector::Unit(Basis::kOrthonormal, 12, 2);
  CHECK(g.Apply(1, z) == doctest::Approx(g.coeffs(1)[2] / kSqrt2));
  CHECK_THROWS_AS(g.Apply(0, ModalVector::Unit(Basis::kPlainCosine, 3, 0)), std::invalid_argument);
}

TEST_CASE("residual entries") {
  const RodConfig e1 = examples::BothEnds();
  const DiagonalRiccati ric = SolveRiccatiDiagonal(e1, 8);
  const Eigen::MatrixXd e = RiccatiResidual(e1, ric, 4);
  CHECK(e.rows() == 5);
  CHECK(e(0, 2) == doctest::Approx(-2.0 * ric.p[0] * ric.p[2]));
  CHECK(std::abs(e(0, 1)) < 1e-15);
  // with gamma = 2 the stored root solves the quadratic only up to the factor gamma
  CHECK(e(0, 0) == doctest::Approx(1.0 - 2.0 * 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(RiccatiResidual(e1, ric, 9), std::invalid_argument);

  const RodConfig single = SingleLeftActuator();
  const DiagonalRiccati rs = SolveRiccatiDiagonal(single, 4);
  const Eigen::MatrixXd es = RiccatiResidual(single, rs, 4);
  CHECK(es(0, 1) == doctest::Approx(-rs.p[0] * rs.p[1]));
  // gamma = 1 here, so the diagonal vanishes
  for (int n = 0; n <= 4; ++n) CHECK(std::abs(es(n, n)) < 1e-10);
}
