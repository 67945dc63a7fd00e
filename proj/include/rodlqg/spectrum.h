#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rodlqg/care.h"
#include "rodlqg/lqr_synthesis.h"
#include "rodlqg/rod_config.h"
#include "rodlqg/spectral_core.h"

namespace rodlqg {

/// Interface conditions for a piecewise-sinusoid eigenfunction candidate.
///
/// [0,1] is cut at `breakpoints` (0, the interior actuator or sensor
/// positions, 1). On segment s = [l, u] the unknowns (a_s, b_s) describe
///   psi = a_s cos(nu (x - l)) + b_s sin(nu (x - l))   for nu > 0,
///   psi = a_s + b_s (x - l)                           for nu = 0,
/// ordered (a_0, b_0, a_1, b_1, ...). Rows, in order: the condition at x = 0,
/// then continuity and derivative jump at each interior breakpoint, then the
/// condition at x = 1. Every derivative condition has the form
///   psi'(x^-) - psi'(x^+) - J(psi) = 0
/// with psi' = 0 outside [0,1]; J is the point functional of that location.
struct MatchingMatrix {
  Eigen::MatrixXd entries;
  std::vector<double> breakpoints;
  double nu = 0.0;

  int size() const { return static_cast<int>(entries.rows()); }
  /// Columns rescaled so that nu -> 0 is continuous, rows scaled to unit
  /// Euclidean norm. Same null space (up to the column scaling).
  Eigen::MatrixXd Normalized() const;
  /// Multiplier mapping normalized-system unknowns back to raw unknowns.
  Eigen::VectorXd ColumnScale() const;
  /// Smallest singular value of Normalized().
  double Residual() const;
  /// Residual vector of the conditions for the given raw unknowns.
  Eigen::VectorXd Apply(const Eigen::VectorXd& unknowns) const;
  /// Converts raw unknowns into the piecewise eigenfunction.
  std::vector<SegmentSinusoid> Piecewise(const Eigen::VectorXd& unknowns) const;
};

/// Closed-loop conditions: at actuator k the flux jump is beta_k u_k with
/// u_k = integral of K_k psi, assembled from exact segment moments.
MatchingMatrix ClosedLoopMatchingMatrix(const RodConfig& config,
                                        const GainField& gains, double nu);

/// Filter-error conditions: continuity at each sensor and
/// theta'(zeta_i^+) - theta'(zeta_i^-) = L_i C_i theta(zeta_i).
MatchingMatrix ErrorMatchingMatrix(const RodConfig& config,
                                   std::span<const double> filter_gains,
                                   double nu);

enum class RootOrigin {
  kDeterminant,        ///< singular matching matrix
  kMeanFieldZeroMode,  ///< theta = 1, eta = -sum L_i C_i
};

struct SpectralRoot {
  double nu = 0.0;
  double eigenvalue = 0.0;  ///< always -nu * nu
  std::vector<SegmentSinusoid> eigenfunction;  ///< sup-norm 1
  double residual = 0.0;
  int multiplicity = 1;
  bool converged = true;
  RootOrigin origin = RootOrigin::kDeterminant;

  double Eigenfunction(double x) const;
};

struct SpectrumResult {
  std::vector<SpectralRoot> roots;  ///< least stable first
};

struct SpectrumOptions {
  double grid_step = kPi / 8.0;
  int threads = 1;
};

/// Roots of the closed-loop matching determinant for nu in [0, nu_max].
SpectrumResult FindSpectrum(const RodConfig& config, const GainField& gains,
                            double nu_max, double tol,
                            const SpectrumOptions& options = {});

/// Filter-error spectrum: the mean-field zero mode followed by the roots of
/// ErrorMatchingMatrix in (0, nu_max].
SpectrumResult ErrorSpectrum(const RodConfig& config,
                             std::span<const double> filter_gains,
                             double nu_max, double tol,
                             const SpectrumOptions& options = {});

/// Parity of an eigenfunction under x -> 1 - x: +1, -1, or 0 when it is
/// neither within `tol` at 101 sample points.
int ReflectionParity(const SpectralRoot& root, double tol = 1e-8);

/// Determinant roots of a filter-error spectrum that are even under
/// x -> 1 - x and do not vanish at every sensor, ascending in nu.
std::vector<SpectralRoot> SensedSymmetricRoots(const SpectrumResult& spectrum,
                                               const RodConfig& config,
                                               double tol = 1e-8);

/// A + B K in orthonormal modal coordinates, modes 0..N:
/// A = diag(-n^2 pi^2), B(n,k) = phi_n(xi_k) beta_k,
/// K(k,n) = integral of K_k phi_n.
Eigen::MatrixXd ModalClosedLoopMatrix(const RodConfig& config,
                                      const GainField& gains, int order);

/// Eigenvalues sorted by real part, largest first.
std::vector<std::complex<double>> SortedEigenvalues(const Eigen::MatrixXd& m);

/// Weight of the state cost on the truncated modal system.
enum class DeltaConvention {
  kOrthonormalExact,  ///< Q_N = q I (projection of q delta(x1 - x2))
  kFormalExpansion,       ///< Q_N = q diag(1, 1/2, 1/2, ...) (q on every plain
                      ///< cosine coefficient)
};

const char* ToString(DeltaConvention c);

struct AreOracleResult {
  Eigen::MatrixXd p_orthonormal;  ///< solution in phi_n coordinates
  Eigen::MatrixXd p_plain;        ///< same kernel on cos(n pi x) products
  DeltaConvention convention = DeltaConvention::kOrthonormalExact;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

/// Finite-dimensional Riccati solution on modes 0..N (N <= 256).
AreOracleResult TruncatedAreOracle(
    const RodConfig& config, int order,
    DeltaConvention convention = DeltaConvention::kOrthonormalExact,
    const CareOptions& options = {});

}  // namespace rodlqg
