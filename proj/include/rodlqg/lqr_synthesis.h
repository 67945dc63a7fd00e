#pragma once

#include <vector>

#include <Eigen/Core>

#include "rodlqg/rod_config.h"
#include "rodlqg/spectral_core.h"

namespace rodlqg {

/// The actuator quadratic form W = beta' R^-1 beta (beta = diag(beta_k)),
/// factored once per configuration.
///
/// gamma^{n1,n2} = c(n1)' W c(n2) with c(n)_k = cos(n pi xi_k).
class ActuatorWeights {
 public:
  explicit ActuatorWeights(const RodConfig& config);

  double Gamma(int n1, int n2) const;
  /// An upper bound on gamma^{n,n} over all n: the sum of |W_jk|.
  double GammaSupremum() const;

  const Eigen::MatrixXd& r_inverse() const { return r_inverse_; }
  const Eigen::MatrixXd& weight() const { return weight_; }

 private:
  Eigen::VectorXd CosineVector(int n) const;

  Eigen::VectorXd xi_;
  Eigen::MatrixXd r_inverse_;
  Eigen::MatrixXd weight_;
};

/// gamma^{n1,n2}; symmetric in its indices.
double Gamma(const RodConfig& config, int n1, int n2);

/// Truncated diagonal series P(x1,x2) = sum_n P^{n,n} cos(n pi x1) cos(n pi x2)
/// with P^{n,n} = -n^2 pi^2 + sqrt(n^4 pi^4 + gamma^{n,n} q).
struct DiagonalRiccati {
  std::vector<double> p;      ///< P^{0,0} .. P^{N,N}
  std::vector<double> gamma;  ///< gamma^{n,n} used for each entry
  int order = 0;              ///< N
  double q = 0.0;
  int num_actuators = 0;
  /// Upper bound on sup |sum_{n>N} P^{n,n} cos cos| over the unit square.
  double tail_bound = 0.0;

  /// The truncated kernel P(x1, x2).
  double Kernel(double x1, double x2) const;
};

/// Throws NumericalError("uncontrollable zero mode") when gamma^{0,0} = 0.
DiagonalRiccati SolveRiccatiDiagonal(const RodConfig& config, int order);

/// Feedback gains K_k(x) = sum_n c_{k,n} cos(n pi x), one plain-cosine
/// series per actuator, with c_{k,n} = -sum_j [R^-1]_{kj} beta_j P^{n,n}
/// cos(n pi xi_j).
class GainField {
 public:
  explicit GainField(std::vector<ModalVector> per_actuator);

  /// All-zero gains (open loop) for m actuators at truncation order N.
  static GainField Zero(int num_actuators, int order);

  int num_actuators() const { return static_cast<int>(coeffs_.size()); }
  int order() const { return coeffs_.front().order(); }
  const ModalVector& coeffs(int k) const { return coeffs_.at(k); }

  /// K_k(x).
  double Value(int k, double x) const;
  /// Integral of K_k against the orthonormal eigenfunction phi_n.
  double FeedbackWeight(int k, int n) const;
  /// Integral of K_k z for an orthonormal modal state z. Modes beyond the
  /// gain truncation contribute nothing.
  double Apply(int k, const ModalVector& z) const;

 private:
  std::vector<ModalVector> coeffs_;
};

/// Throws std::invalid_argument when `ric` was not computed from `config`.
GainField ComputeGainField(const RodConfig& config, const DiagonalRiccati& ric);

/// Coefficient-wise residual of the Riccati PDE for the diagonal ansatz in
/// the plain-cosine convention, with the formal expansion
/// q delta(x1 - x2) = q sum_n cos(n pi x1) cos(n pi x2):
///   E(n1,n2) = [-(n1^2 + n2^2) pi^2 P^{n1,n1} + q] delta_{n1 n2}
///              - gamma^{n1,n2} P^{n1,n1} P^{n2,n2},  0 <= n1, n2 <= J.
Eigen::MatrixXd RiccatiResidual(const RodConfig& config,
                                const DiagonalRiccati& ric, int order);

}  // namespace rodlqg
