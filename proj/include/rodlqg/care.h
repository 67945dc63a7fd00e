#pragma once

#include <vector>

#include <Eigen/Core>

namespace rodlqg {

/// Solves A' X + X A = -W for X, with A Hurwitz and W symmetric
/// (Bartels-Stewart on the complex Schur form of A).
Eigen::MatrixXd SolveContinuousLyapunov(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& w);

struct CareOptions {
  int max_iterations = 60;
  double tolerance = 1e-9;  ///< on the Frobenius norm of the Riccati residual
};

struct CareSolution {
  Eigen::MatrixXd x;
  int iterations = 0;
  std::vector<double> residual_history;
  double residual = 0.0;
};

/// Stabilizing solution of A' X + X A - X B R^-1 B' X + Q = 0 by
/// Newton-Kleinman iteration. The start is K = 0 when A is already Hurwitz,
/// otherwise K = R^-1 B', falling back to Bass's gain. Throws NumericalError (carrying the residual
/// history) when the start is not stabilizing or the iteration stalls.
CareSolution SolveCare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                       const CareOptions& options = {});

/// A' X + X A - X B R^-1 B' X + Q.
Eigen::MatrixXd CareResidual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                             const Eigen::MatrixXd& x);

}  // namespace rodlqg
