#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace rodlqg {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// Normalization of the cosine eigenbasis of the Neumann Laplacian on [0,1].
///   kOrthonormal: phi_0 = 1, phi_n = sqrt(2) cos(n pi x)
///   kPlainCosine: cos(n pi x) for every n
enum class Basis { kOrthonormal, kPlainCosine };

const char* ToString(Basis basis);

/// Coefficients c_0..c_N of a function expanded in the cosine eigenbasis.
/// The basis convention is fixed at construction; arithmetic between
/// vectors of different conventions or orders throws std::invalid_argument.
class ModalVector {
 public:
  ModalVector(Basis basis, std::vector<double> coeffs);

  static ModalVector Zero(Basis basis, int order);
  /// Unit coefficient on mode n, zero elsewhere.
  static ModalVector Unit(Basis basis, int order, int n);

  Basis basis() const { return basis_; }
  /// Truncation order N (the vector holds N+1 coefficients).
  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coeffs() const { return coeffs_; }
  double operator[](int n) const { return coeffs_[n]; }

  ModalVector& operator+=(const ModalVector& other);
  ModalVector& operator-=(const ModalVector& other);
  ModalVector& operator*=(double scale);

  friend ModalVector operator+(ModalVector lhs, const ModalVector& rhs) {
    return lhs += rhs;
  }
  friend ModalVector operator-(ModalVector lhs, const ModalVector& rhs) {
    return lhs -= rhs;
  }
  friend ModalVector operator*(double scale, ModalVector v) {
    return v *= scale;
  }
  friend bool operator==(const ModalVector&, const ModalVector&) = default;

 private:
  void CheckCompatible(const ModalVector& other) const;

  Basis basis_;
  std::vector<double> coeffs_;
};

/// cos(pi t), exact at integer and half-integer t.
double CosPi(double t);

/// Orthonormal Neumann eigenfunction phi_n(x). Throws std::domain_error
/// for x outside [0,1].
double Phi(int n, double x);

/// Value of the n-th basis function of the given convention at x.
double BasisFunction(Basis basis, int n, double x);

/// Same function, other convention.
ModalVector ConvertBasis(const ModalVector& v, Basis target);

/// Sum of c_n times the basis functions of v's convention at x.
double Evaluate(const ModalVector& v, double x);

/// Sum of squared coefficients, square-rooted. Equals the L2 norm on [0,1]
/// for orthonormal vectors.
double CoefficientNorm(const ModalVector& v);

struct CosSinMoments {
  double cos_part = 0.0;  ///< integral of cos(n pi x) cos(nu (x - pivot))
  double sin_part = 0.0;  ///< integral of cos(n pi x) sin(nu (x - pivot))
};

/// Closed-form integrals of cos(n pi x) against cos/sin(nu (x - pivot)) over
/// [lower, upper]. Exact through nu = n pi.
CosSinMoments CosSinMoment(int n, double nu, double lower, double upper,
                           double pivot);

/// Integral of cos(n pi x) (x - pivot) over [lower, upper].
double LinearMoment(int n, double lower, double upper, double pivot);

/// a cos(nu (x - pivot)) + b sin(nu (x - pivot)) on [lower, upper].
/// When nu == 0 the segment is the line a + b (x - pivot), the nu -> 0 limit
/// of a cos + (b / nu) sin.
struct SegmentSinusoid {
  double lower = 0.0;
  double upper = 1.0;
  double a = 0.0;
  double b = 0.0;
  double nu = 0.0;
  double pivot = 0.0;

  double Value(double x) const;
  double Derivative(double x) const;
  /// Exact maximum of |value| over [lower, upper].
  double SupNorm() const;
  /// Points of [lower, upper] where |value| can be extremal, ascending.
  std::vector<double> CriticalPoints() const;
};

/// Evaluates a piecewise function given as consecutive segments covering
/// [0,1]; at a shared endpoint the left segment wins.
double EvaluatePiecewise(std::span<const SegmentSinusoid> pieces, double x);

}  // namespace rodlqg
