#include "rodlqg/lqr_synthesis.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "rodlqg/errors.h"

namespace rodlqg {

ActuatorWeights::ActuatorWeights(const RodConfig& config) {
  config.Validate();
  const int m = config.num_actuators();
  xi_.resize(m);
  Eigen::VectorXd beta(m);
  for (int k = 0; k < m; ++k) {
    xi_(k) = config.actuators[k].xi;
    beta(k) = config.actuators[k].beta;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(config.r);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("R: Cholesky factorization failed");
  }
  r_inverse_ = llt.solve(Eigen::MatrixXd::Identity(m, m));
  weight_ = beta.asDiagonal() * r_inverse_ * beta.asDiagonal();
}

Eigen::VectorXd ActuatorWeights::CosineVector(int n) const {
  if (n < 0) throw std::invalid_argument("negative mode index");
  Eigen::VectorXd c(xi_.size());
  for (Eigen::Index k = 0; k < xi_.size(); ++k) c[k] = CosPi(n * xi_[k]);
  return c;
}

double ActuatorWeights::Gamma(int n1, int n2) const {
  return CosineVector(n1).dot(weight_ * CosineVector(n2));
}

double ActuatorWeights::GammaSupremum() const {
  return weight_.cwiseAbs().sum();
}

double Gamma(const RodConfig& config, int n1, int n2) {
  return ActuatorWeights(config).Gamma(n1, n2);
}

double DiagonalRiccati::Kernel(double x1, double x2) const {
  if (!(x1 >= 0.0 && x1 <= 1.0 && x2 >= 0.0 && x2 <= 1.0)) {
    throw std::domain_error("kernel arguments must lie in [0, 1]");
  }
  double sum = 0.0;
  for (int n = 0; n <= order; ++n) {
    sum += p[n] * CosPi(n * x1) * CosPi(n * x2);
  }
  return sum;
}

DiagonalRiccati SolveRiccatiDiagonal(const RodConfig& config, int order) {
  if (order < 0) throw std::invalid_argument("truncation order must be >= 0");
  const ActuatorWeights weights(config);
  DiagonalRiccati ric;
  ric.order = order;
  ric.q = config.q;
  ric.num_actuators = config.num_actuators();
  ric.p.resize(order + 1);
  ric.gamma.resize(order + 1);
  for (int n = 0; n <= order; ++n) {
    const double g = weights.Gamma(n, n);
    ric.gamma[n] = g;
    if (n == 0 && !(g > 0.0)) {
      throw NumericalError(
          "uncontrollable zero mode: gamma^{0,0} = 0, the actuators cannot "
          "move the mean temperature");
    }
    // -a + sqrt(a^2 + g q) without the cancellation at large a.
    const double a = static_cast<double>(n) * n * kPi * kPi;
    const double gq = std::max(g, 0.0) * config.q;
    ric.p[n] = gq == 0.0 ? 0.0 : gq / (a + std::sqrt(a * a + gq));
  }
  // |tail| <= sum_{n>N} sup(gamma) q / (2 n^2 pi^2), and sum_{n>N} 1/n^2 < 1/N.
  const double inverse_square_tail =
      order == 0 ? kPi * kPi / 6.0 : 1.0 / static_cast<double>(order);
  ric.tail_bound =
      weights.GammaSupremum() * config.q / (2.0 * kPi * kPi) * inverse_square_tail;
  return ric;
}

GainField::GainField(std::vector<ModalVector> per_actuator)
    : coeffs_(std::move(per_actuator)) {
  if (coeffs_.empty()) throw std::invalid_argument("GainField needs an actuator");
  for (const auto& c : coeffs_) {
    if (c.basis() != Basis::kPlainCosine) {
      throw std::invalid_argument("gain coefficients must be plain cosine");
    }
    if (c.order() != coeffs_.front().order()) {
      throw std::invalid_argument("gain series must share one truncation");
    }
  }
}

GainField GainField::Zero(int num_actuators, int order) {
  return GainField(std::vector<ModalVector>(
      num_actuators, ModalVector::Zero(Basis::kPlainCosine, order)));
}

double GainField::Value(int k, double x) const {
  return Evaluate(coeffs_.at(k), x);
}

double GainField::FeedbackWeight(int k, int n) const {
  const auto& c = coeffs_.at(k);
  if (n < 0) throw std::invalid_argument("negative mode index");
  if (n > c.order()) return 0.0;
  return n == 0 ? c[0] : c[n] / kSqrt2;
}

double GainField::Apply(int k, const ModalVector& z) const {
  if (z.basis() != Basis::kOrthonormal) {
    throw std::invalid_argument("GainField::Apply expects an orthonormal state");
  }
  const auto& c = coeffs_.at(k);
  const int top = std::min(c.order(), z.order());
  double sum = c[0] * z[0];
  for (int n = 1; n <= top; ++n) sum += c[n] * z[n] / kSqrt2;
  return sum;
}

GainField ComputeGainField(const RodConfig& config, const DiagonalRiccati& ric) {
  const ActuatorWeights weights(config);
  const int m = config.num_actuators();
  if (ric.num_actuators != m) {
    throw std::invalid_argument(
        "Riccati solution was built for " + std::to_string(ric.num_actuators) +
        " actuators, configuration has " + std::to_string(m));
  }
  if (static_cast<int>(ric.p.size()) != ric.order + 1 ||
      static_cast<int>(ric.gamma.size()) != ric.order + 1) {
    throw std::invalid_argument("malformed Riccati solution");
  }
  for (int n = 0; n <= ric.order; ++n) {
    const double g = weights.Gamma(n, n);
    if (std::abs(g - ric.gamma[n]) > 1e-12 * std::max(1.0, std::abs(g))) {
      throw std::invalid_argument("Riccati solution does not match the "
                                  "configuration (gamma mismatch at n = " +
                                  std::to_string(n) + ")");
    }
  }

  const Eigen::MatrixXd& r_inv = weights.r_inverse();
  std::vector<std::vector<double>> c(m, std::vector<double>(ric.order + 1));
  Eigen::VectorXd column(m);
  for (int n = 0; n <= ric.order; ++n) {
    for (int j = 0; j < m; ++j) {
      column(j) = config.actuators[j].beta * ric.p[n] *
                  CosPi(n * config.actuators[j].xi);
    }
    const Eigen::VectorXd kn = -(r_inv * column);
    for (int k = 0; k < m; ++k) c[k][n] = kn(k);
  }
  std::vector<ModalVector> series;
  series.reserve(m);
  for (auto& ck : c) series.emplace_back(Basis::kPlainCosine, std::move(ck));
  return GainField(std::move(series));
}

Eigen::MatrixXd RiccatiResidual(const RodConfig& config,
                                const DiagonalRiccati& ric, int order) {
  if (order < 0 || order > ric.order) {
    throw std::invalid_argument("residual order must lie in [0, " +
                                std::to_string(ric.order) + "]");
  }
  const ActuatorWeights weights(config);
  Eigen::MatrixXd e(order + 1, order + 1);
  for (int n1 = 0; n1 <= order; ++n1) {
    for (int n2 = n1; n2 <= order; ++n2) {
      double v = -weights.Gamma(n1, n2) * ric.p[n1] * ric.p[n2];
      if (n1 == n2) {
        v += -2.0 * static_cast<double>(n1) * n1 * kPi * kPi * ric.p[n1] +
             config.q;
      }
      e(n1, n2) = v;
      e(n2, n1) = v;
    }
  }
  return e;
}

}  // namespace rodlqg
