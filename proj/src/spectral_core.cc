#include "rodlqg/spectral_core.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rodlqg {
namespace {

void CheckUnitInterval(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("position " + std::to_string(x) +
                            " lies outside [0, 1]");
  }
}

// sin(t)/t, with the series branch near the removable singularity.
double Sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

// Integral of cos(k x + c) over [l, u], written through the half-width so
// that k -> 0 needs no special case.
double IntegrateCos(double k, double c, double l, double u) {
  const double h = u - l;
  const double mid = 0.5 * (u + l);
  return h * std::cos(k * mid + c) * Sinc(0.5 * k * h);
}

// Integral of sin(k x + c) over [l, u].
double IntegrateSin(double k, double c, double l, double u) {
  const double h = u - l;
  const double mid = 0.5 * (u + l);
  return h * std::sin(k * mid + c) * Sinc(0.5 * k * h);
}

double Scale(Basis basis, int n) {
  return (basis == Basis::kOrthonormal && n > 0) ? kSqrt2 : 1.0;
}

}  // namespace

const char* ToString(Basis basis) {
  return basis == Basis::kOrthonormal ? "orthonormal" : "plain_cosine";
}

ModalVector::ModalVector(Basis basis, std::vector<double> coeffs)
    : basis_(basis), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw std::invalid_argument("ModalVector needs at least one coefficient");
  }
  for (std::size_t n = 0; n < coeffs_.size(); ++n) {
    if (!std::isfinite(coeffs_[n])) {
      throw std::invalid_argument("ModalVector coefficient " +
                                  std::to_string(n) + " is not finite");
    }
  }
}

ModalVector ModalVector::Zero(Basis basis, int order) {
  if (order < 0) throw std::invalid_argument("negative truncation order");
  return ModalVector(basis, std::vector<double>(order + 1, 0.0));
}

ModalVector ModalVector::Unit(Basis basis, int order, int n) {
  if (n < 0 || n > order) throw std::invalid_argument("mode index out of range");
  std::vector<double> c(order + 1, 0.0);
  c[n] = 1.0;
  return ModalVector(basis, std::move(c));
}

void ModalVector::CheckCompatible(const ModalVector& other) const {
  if (basis_ != other.basis_) {
    throw std::invalid_argument(
        std::string("mixed-convention modal arithmetic: ") + ToString(basis_) +
        " vs " + ToString(other.basis_));
  }
  if (coeffs_.size() != other.coeffs_.size()) {
    throw std::invalid_argument("modal vectors have different orders");
  }
}

ModalVector& ModalVector::operator+=(const ModalVector& other) {
  CheckCompatible(other);
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += other.coeffs_[n];
  return *this;
}

ModalVector& ModalVector::operator-=(const ModalVector& other) {
  CheckCompatible(other);
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] -= other.coeffs_[n];
  return *this;
}

ModalVector& ModalVector::operator*=(double scale) {
  for (double& c : coeffs_) c *= scale;
  return *this;
}

double CosPi(double t) {
  double r = std::fmod(std::abs(t), 2.0);
  if (r > 1.0) r = 2.0 - r;
  if (r == 0.5) return 0.0;
  return std::cos(kPi * r);
}

double Phi(int n, double x) {
  CheckUnitInterval(x);
  if (n < 0) throw std::invalid_argument("negative mode index");
  return n == 0 ? 1.0 : kSqrt2 * CosPi(n * x);
}

double BasisFunction(Basis basis, int n, double x) {
  CheckUnitInterval(x);
  if (n < 0) throw std::invalid_argument("negative mode index");
  return Scale(basis, n) * CosPi(n * x);
}

ModalVector ConvertBasis(const ModalVector& v, Basis target) {
  if (v.basis() == target) return v;
  std::vector<double> c(v.coeffs().begin(), v.coeffs().end());
  // A plain coefficient c multiplies cos = phi / sqrt(2).
  const double factor =
      target == Basis::kOrthonormal ? 1.0 / kSqrt2 : kSqrt2;
  for (std::size_t n = 1; n < c.size(); ++n) c[n] *= factor;
  return ModalVector(target, std::move(c));
}

double Evaluate(const ModalVector& v, double x) {
  CheckUnitInterval(x);
  double sum = 0.0;
  const auto c = v.coeffs();
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (c[n] == 0.0) continue;
    sum += c[n] * Scale(v.basis(), static_cast<int>(n)) *
           CosPi(static_cast<double>(n) * x);
  }
  return sum;
}

double CoefficientNorm(const ModalVector& v) {
  double s = 0.0;
  for (double c : v.coeffs()) s += c * c;
  return std::sqrt(s);
}

CosSinMoments CosSinMoment(int n, double nu, double lower, double upper,
                           double pivot) {
  if (n < 0) throw std::invalid_argument("negative mode index");
  const double w = n * kPi;
  const double phase = nu * pivot;
  CosSinMoments m;
  // cos(wx) cos(nu(x-p)) = [cos((w-nu)x + nu p) + cos((w+nu)x - nu p)] / 2
  m.cos_part = 0.5 * (IntegrateCos(w - nu, phase, lower, upper) +
                      IntegrateCos(w + nu, -phase, lower, upper));
  // cos(wx) sin(nu(x-p)) = [sin((nu+w)x - nu p) + sin((nu-w)x - nu p)] / 2
  m.sin_part = 0.5 * (IntegrateSin(nu + w, -phase, lower, upper) +
                      IntegrateSin(nu - w, -phase, lower, upper));
  return m;
}

double LinearMoment(int n, double lower, double upper, double pivot) {
  if (n < 0) throw std::invalid_argument("negative mode index");
  if (n == 0) {
    const double hu = upper - pivot;
    const double hl = lower - pivot;
    return 0.5 * (hu * hu - hl * hl);
  }
  const double w = n * kPi;
  auto antiderivative = [&](double x) {
    return (x - pivot) * std::sin(w * x) / w + std::cos(w * x) / (w * w);
  };
  return antiderivative(upper) - antiderivative(lower);
}

double SegmentSinusoid::Value(double x) const {
  if (nu == 0.0) return a + b * (x - pivot);
  const double t = nu * (x - pivot);
  return a * std::cos(t) + b * std::sin(t);
}

double SegmentSinusoid::Derivative(double x) const {
  if (nu == 0.0) return b;
  const double t = nu * (x - pivot);
  return nu * (-a * std::sin(t) + b * std::cos(t));
}

std::vector<double> SegmentSinusoid::CriticalPoints() const {
  std::vector<double> pts{lower};
  if (nu > 0.0 && (a != 0.0 || b != 0.0)) {
    // Stationary phases satisfy tan(t) = b / a.
    const double t0 = std::atan2(b, a);
    const double t_lo = nu * (lower - pivot);
    const double t_hi = nu * (upper - pivot);
    const double k_lo = std::ceil((t_lo - t0) / kPi);
    for (double k = k_lo;; k += 1.0) {
      const double t = t0 + k * kPi;
      if (t > t_hi) break;
      const double x = pivot + t / nu;
      if (x > lower && x < upper) pts.push_back(x);
    }
  }
  pts.push_back(upper);
  return pts;
}

double SegmentSinusoid::SupNorm() const {
  double best = 0.0;
  for (double x : CriticalPoints()) best = std::max(best, std::abs(Value(x)));
  return best;
}

double EvaluatePiecewise(std::span<const SegmentSinusoid> pieces, double x) {
  CheckUnitInterval(x);
  for (const auto& s : pieces) {
    if (x <= s.upper) return s.Value(x);
  }
  if (pieces.empty()) throw std::invalid_argument("empty piecewise function");
  return pieces.back().Value(x);
}

}  // namespace rodlqg
