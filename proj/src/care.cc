#include "rodlqg/care.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "rodlqg/errors.h"

namespace rodlqg {
namespace {

double SpectralAbscissa(const Eigen::MatrixXd& a) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(a, false)
      .eigenvalues()
      .real()
      .maxCoeff();
}

}  // namespace

Eigen::MatrixXd SolveContinuousLyapunov(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& w) {
  using Complex = std::complex<double>;
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = a.rows();
  if (a.cols() != n || w.rows() != n || w.cols() != n) {
    throw std::invalid_argument("Lyapunov: dimension mismatch");
  }
  // A = U T U*, so with Y = U* X U:  T* Y + Y T = -U* W U =: C.
  Eigen::ComplexSchur<CMatrix> schur(a.cast<Complex>());
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();
  const CMatrix c = -(u.adjoint() * w.cast<Complex>() * u);
  const CMatrix t_adj = t.adjoint();

  CMatrix y = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    CMatrix lower = t_adj;
    lower.diagonal().array() += t(j, j);
    y.col(j) = lower.triangularView<Eigen::Lower>().solve(rhs);
  }
  Eigen::MatrixXd x = (u * y * u.adjoint()).real();
  return 0.5 * (x + x.transpose());
}

namespace {

// K = B' Z^-1 with (A + bI) Z + Z (A + bI)' = 2 B B', b above the spectral
// radius of A. Empty when Z is singular (uncontrollable pair).
Eigen::MatrixXd BassGain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.rows();
  const double shift = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  const Eigen::MatrixXd shifted =
      -(a + shift * Eigen::MatrixXd::Identity(n, n)).transpose();
  const Eigen::MatrixXd z =
      SolveContinuousLyapunov(shifted, 2.0 * b * b.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(z);
  if (llt.info() != Eigen::Success) return {};
  return llt.solve(b).transpose();
}

}  // namespace

Eigen::MatrixXd CareResidual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                             const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd r_inv_bt = r.llt().solve(b.transpose());
  return a.transpose() * x + x * a - x * b * r_inv_bt * x + q;
}

CareSolution SolveCare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                       const CareOptions& options) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("CARE: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> r_llt(r);
  if (r_llt.info() != Eigen::Success) {
    throw std::invalid_argument("CARE: R must be positive definite");
  }
  const Eigen::MatrixXd r_inv_bt = r_llt.solve(b.transpose());

  Eigen::MatrixXd k = SpectralAbscissa(a) < 0.0 ? Eigen::MatrixXd::Zero(m, n)
                                                : r_inv_bt;
  if (SpectralAbscissa(a - b * k) >= 0.0) k = BassGain(a, b);
  CareSolution sol;
  if (k.size() == 0 || SpectralAbscissa(a - b * k) >= 0.0) {
    throw NumericalError("CARE: no stabilizing initial gain; (A, B) may not "
                         "be stabilizable");
  }
  bool polished = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd closed = a - b * k;
    const Eigen::MatrixXd w = q + k.transpose() * r * k;
    Eigen::MatrixXd x = SolveContinuousLyapunov(closed, w);
    const double residual = CareResidual(a, b, q, r, x).norm();
    if (polished && !(residual < sol.residual)) return sol;
    sol.x = std::move(x);
    sol.iterations = it;
    sol.residual = residual;
    sol.residual_history.push_back(residual);
    if (!std::isfinite(residual)) break;
    // one more quadratic step once inside the tolerance
    if (polished) return sol;
    polished = residual < options.tolerance;
    k = r_inv_bt * sol.x;
  }
  if (polished) return sol;
  throw NumericalError("CARE: Newton-Kleinman did not reach residual " +
                           std::to_string(options.tolerance) + " in " +
                           std::to_string(options.max_iterations) +
                           " iterations",
                       sol.residual_history);
}

}  // namespace rodlqg
