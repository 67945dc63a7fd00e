#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "rodlqg/kalman_synthesis.h"
#include "rodlqg/spectrum.h"

using namespace rodlqg;

namespace {

constexpr double kTol = 1e-8;

double Quad(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

GainField Gains(const RodConfig& c, int order = 128) {
  return ComputeGainField(c, SolveRiccatiDiagonal(c, order));
}

// sigma - (sqrt 2 / 16) cot sigma
double SymmetricEquation(double s) { return s - std::sqrt(2.0) / 16.0 / std::tan(s); }

}  // namespace

TEST_CASE("matching matrix shape and breakpoints") {
  const RodConfig e2 = examples::EndsAndMidpoint();
  const MatchingMatrix m = ClosedLoopMatchingMatrix(e2, Gains(e2, 16), 2.0);
  CHECK(m.size() == 4);
  CHECK(m.breakpoints == std::vector<double>{0.0, 0.5, 1.0});
  const RodConfig e3 = examples::EndsAndMidpointSensed();
  const FilterGains f = SolveFilterRiccati(e3);
  const MatchingMatrix em = ErrorMatchingMatrix(e3, f.l, 2.0);
  CHECK(em.size() == 6);
  CHECK_THROWS_AS(ClosedLoopMatchingMatrix(e2, Gains(e2, 16), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ErrorMatchingMatrix(e3, std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("both-ends matching matrix at nu = pi is regular") {
  const RodConfig e1 = examples::BothEnds();
  const MatchingMatrix m = ClosedLoopMatchingMatrix(e1, Gains(e1, 256), kPi);
  CHECK(m.Residual() > 1e-3);
}

TEST_CASE("constant and even-cosine candidates violate the end conditions") {
  const RodConfig e1 = examples::BothEnds();
  const DiagonalRiccati ric = SolveRiccatiDiagonal(e1, 64);
  const GainField g = ComputeGainField(e1, ric);
  Eigen::VectorXd one(2);
  one << 1.0, 0.0;
  const Eigen::VectorXd r0 = ClosedLoopMatchingMatrix(e1, g, 0.0).Apply(one);
  CHECK(std::abs(r0(0)) == doctest::Approx(ric.p[0]).epsilon(1e-12));
  CHECK(std::abs(r0(1)) == doctest::Approx(ric.p[0]).epsilon(1e-12));
  for (int k = 1; k <= 3; ++k) {
    const Eigen::VectorXd rk = ClosedLoopMatchingMatrix(e1, g, 2 * k * kPi).Apply(one);
    CHECK(rk(0) == doctest::Approx(ric.p[2 * k] / 2.0).epsilon(1e-10));
    CHECK(rk(1) == doctest::Approx(ric.p[2 * k] / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("open loop spectrum is the Neumann spectrum") {
  const RodConfig e2 = examples::EndsAndMidpoint();
  const GainField zero = GainField::Zero(3, 8);
  const SpectrumResult s = FindSpectrum(e2, zero, 3.5 * kPi, kTol);
  REQUIRE(s.roots.size() == 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(s.roots[n].nu - n * kPi) < 1e-9);
    CHECK(s.roots[n].eigenvalue == -s.roots[n].nu * s.roots[n].nu);
  }
  const Eigen::MatrixXd a = ModalClosedLoopMatrix(e2, zero, 6);
  for (int n = 0; n <= 6; ++n) CHECK(a(n, n) == doctest::Approx(-n * n * kPi * kPi));
  CHECK((a - Eigen::MatrixXd(a.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("closed loop roots: residual, ordering, local minimum, symmetry") {
  for (const RodConfig& c : {examples::BothEnds(), examples::EndsAndMidpoint()}) {
    const GainField g = Gains(c);
    const SpectrumResult s = FindSpectrum(c, g, 8.0 * kPi, kTol);
    REQUIRE(s.roots.size() >= 6);
    for (std::size_t i = 0; i < s.roots.size(); ++i) {
      const SpectralRoot& r = s.roots[i];
      CHECK(r.converged);
      CHECK(r.residual < kTol);
      CHECK(r.eigenvalue == -r.nu * r.nu);
      if (i > 0) CHECK(s.roots[i - 1].eigenvalue >= r.eigenvalue);
      const double lo = ClosedLoopMatchingMatrix(c, g, r.nu - 10 * kTol).Residual();
      const double hi = ClosedLoopMatchingMatrix(c, g, r.nu + 10 * kTol).Residual();
      CHECK(lo > r.residual);
      CHECK(hi > r.residual);
      CHECK(std::abs(ReflectionParity(r)) == 1);
      double sup = 0.0;
      for (const auto& seg : r.eigenfunction) sup = std::max(sup, seg.SupNorm());
      CHECK(sup == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed loop eigenfunctions satisfy the interface conditions") {
  for (const RodConfig& c : {examples::BothEnds(), examples::EndsAndMidpoint()}) {
    const GainField g = Gains(c);
    const SpectrumResult s = FindSpectrum(c, g, 6.0 * kPi, kTol);
    for (const SpectralRoot& r : s.roots) {
      // feedback integrals by quadrature, independent of the moment formulas
      std::vector<double> u(c.num_actuators(), 0.0);
      for (int k = 0; k < c.num_actuators(); ++k) {
        for (const auto& seg : r.eigenfunction) {
          u[k] += Quad([&](double x) { return g.Value(k, x) * seg.Value(x); }, seg.lower, seg.upper);
        }
      }
      for (int k = 0; k < c.num_actuators(); ++k) {
        const double xi = c.actuators[k].xi;
        const SegmentSinusoid* left = nullptr;
        const SegmentSinusoid* right = nullptr;
        for (const auto& seg : r.eigenfunction) {
          if (seg.upper == xi) left = &seg;
          if (seg.lower == xi) right = &seg;
        }
        const double left_slope = left ? left->Derivative(xi) : 0.0;
        const double right_slope = right ? right->Derivative(xi) : 0.0;
        CHECK(std::abs(left_slope - right_slope - c.actuators[k].beta * u[k]) < 1e-8);
        if (left && right) CHECK(std::abs(left->Value(xi) - right->Value(xi)) < 1e-8);
      }
    }
  }
}

TEST_CASE("modal oracle agrees with the root finder") {
  for (const RodConfig& c : {examples::BothEnds(), examples::EndsAndMidpoint()}) {
    const GainField g = Gains(c, 128);
    const SpectrumResult s = FindSpectrum(c, g, 6.0 * kPi, kTol);
    const auto ev = SortedEigenvalues(ModalClosedLoopMatrix(c, g, 128));
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(ev[i].imag()) < 1e-9);
      CHECK(std::abs(ev[i].real() - s.roots[i].eigenvalue) < 0.01 * std::abs(s.roots[i].eigenvalue));
    }
  }
}

TEST_CASE("threaded scan matches the serial scan") {
  const RodConfig c = examples::EndsAndMidpoint();
  const GainField g = Gains(c, 64);
  const SpectrumResult a = FindSpectrum(c, g, 8.0 * kPi, kTol);
  const SpectrumResult b = FindSpectrum(c, g, 8.0 * kPi, kTol, SpectrumOptions{kPi / 8.0, 4});
  REQUIRE(a.roots.size() == b.roots.size());
  for (std::size_t i = 0; i < a.roots.size(); ++i) CHECK(a.roots[i].nu == b.roots[i].nu);
}

TEST_CASE("error spectrum of the sensed example") {
  const RodConfig c = examples::EndsAndMidpointSensed();
  const FilterGains f = SolveFilterRiccati(c);
  const SpectrumResult s = ErrorSpectrum(c, f.l, 20.0 * kPi, kTol);
  int mean_field = 0;
  for (const auto& r : s.roots) {
    if (r.origin == RootOrigin::kMeanFieldZeroMode) {
      ++mean_field;
      CHECK(std::abs(r.eigenvalue + std::sqrt(2.0)) < 1e-12);
      CHECK(r.Eigenfunction(0.3) == 1.0);
    } else {
      CHECK(r.residual < kTol);
      CHECK(std::abs(ReflectionParity(r)) == 1);
    }
  }
  CHECK(mean_field == 1);

  const auto sym = SensedSymmetricRoots(s, c);
  REQUIRE(sym.size() >= 5);
  // independent bisection on sigma = (sqrt 2/16) cot sigma in (0, pi/2)
  boost::math::tools::eps_tolerance<double> tol(50);
  const auto br = boost::math::tools::bisect(SymmetricEquation, 1e-6, kPi / 2 - 1e-6, tol);
  const double sigma1 = 0.5 * (br.first + br.second);
  CHECK(std::abs(sym[0].nu - 4.0 * sigma1) < 1e-9);
  CHECK(-sym[0].nu * sym[0].nu == doctest::Approx(-1.375).epsilon(2e-3));
  for (int n = 1; n <= 5; ++n) {
    const double tau = sym[n - 1].nu;
    CHECK(std::abs(SymmetricEquation(tau / 4.0)) < 1e-10);
    CHECK(tau > 4.0 * kPi * (n - 1));
    CHECK(tau < 4.0 * kPi * (n - 0.5));
  }
}

TEST_CASE("error eigenfunctions jump by L C theta at the sensors") {
  const RodConfig c = examples::EndsAndMidpointSensed();
  const FilterGains f = SolveFilterRiccati(c);
  const SpectrumResult s = ErrorSpectrum(c, f.l, 8.0 * kPi, kTol);
  for (const auto& r : s.roots) {
    if (r.origin != RootOrigin::kDeterminant) continue;
    REQUIRE(r.eigenfunction.size() == 3);
    for (int i = 0; i < 2; ++i) {
      const double z = c.sensors[i].zeta;
      const double theta = r.eigenfunction[i].Value(z);
      CHECK(std::abs(theta - r.eigenfunction[i + 1].Value(z)) < 1e-8);
      const double jump = r.eigenfunction[i + 1].Derivative(z) - r.eigenfunction[i].Derivative(z);
      CHECK(std::abs(jump - f.l[i] * c.sensors[i].c * theta) < 1e-8);
    }
    CHECK(std::abs(r.eigenfunction[0].Derivative(0.0)) < 1e-8);
    CHECK(std::abs(r.eigenfunction[2].Derivative(1.0)) < 1e-8);
  }
}

TEST_CASE("truncated Riccati oracle") {
  for (const RodConfig& c : {examples::BothEnds(), examples::EndsAndMidpoint()}) {
    const AreOracleResult o = TruncatedAreOracle(c, 32);
    CHECK(o.residual < 1e-9);
    CHECK((o.p_orthonormal - o.p_orthonormal.transpose()).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(o.p_orthonormal);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    // mirror symmetry of both examples decouples even and odd modes
    for (int m = 0; m <= 32; ++m) {
      for (int n = 0; n <= 32; ++n) {
        if ((m + n) % 2 == 1) CHECK(std::abs(o.p_orthonormal(m, n)) < 1e-10);
      }
    }
    const double s = kSqrt2;
    CHECK(o.p_plain(1, 2) == doctest::Approx(o.p_orthonormal(1, 2) * s * s));
    CHECK(o.p_plain(0, 2) == doctest::Approx(o.p_orthonormal(0, 2) * s));
    const AreOracleResult formal = TruncatedAreOracle(c, 32, DeltaConvention::kFormalExpansion);
    CHECK(formal.convention == DeltaConvention::kFormalExpansion);
    CHECK(formal.residual < 1e-9);
    CHECK(formal.p_orthonormal(3, 3) < o.p_orthonormal(3, 3));
  }
  CHECK_THROWS_AS(TruncatedAreOracle(examples::BothEnds(), 257), std::invalid_argument);
}
