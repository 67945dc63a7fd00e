#include "rodlqg/rod_config.h"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "rodlqg/errors.h"

namespace rodlqg {
namespace {

std::string Field(const char* list, std::size_t i, const char* name) {
  return std::string(list) + "[" + std::to_string(i) + "]." + name;
}

void RequireFinite(double v, const std::string& field) {
  if (!std::isfinite(v)) throw ValidationError(field + " must be finite");
}

}  // namespace

void RodConfig::Validate() const {
  if (actuators.empty()) {
    throw ValidationError("actuators: at least one actuator is required");
  }
  bool any_beta = false;
  for (std::size_t k = 0; k < actuators.size(); ++k) {
    const auto& a = actuators[k];
    RequireFinite(a.xi, Field("actuators", k, "xi"));
    RequireFinite(a.beta, Field("actuators", k, "beta"));
    if (a.xi < 0.0 || a.xi > 1.0) {
      throw ValidationError(Field("actuators", k, "xi") +
                            ": actuator positions must lie in [0, 1]");
    }
    if (k > 0 && !(a.xi > actuators[k - 1].xi)) {
      throw ValidationError(Field("actuators", k, "xi") +
                            ": actuator positions must be strictly increasing");
    }
    if (a.beta < 0.0) {
      throw ValidationError(Field("actuators", k, "beta") +
                            ": beta must be nonnegative");
    }
    any_beta = any_beta || a.beta > 0.0;
  }
  if (!any_beta) {
    throw ValidationError("actuators: at least one beta must be positive");
  }

  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& s = sensors[i];
    RequireFinite(s.zeta, Field("sensors", i, "zeta"));
    RequireFinite(s.c, Field("sensors", i, "c"));
    RequireFinite(s.d, Field("sensors", i, "d"));
    if (s.zeta < 0.0 || s.zeta > 1.0) {
      throw ValidationError(Field("sensors", i, "zeta") +
                            ": sensor positions must lie in [0, 1]");
    }
    if (i > 0 && !(s.zeta > sensors[i - 1].zeta)) {
      throw ValidationError(Field("sensors", i, "zeta") +
                            ": sensor positions must be strictly increasing");
    }
    if (!(s.c > 0.0)) {
      throw ValidationError(Field("sensors", i, "c") + ": c must be positive");
    }
    if (!(s.d > 0.0)) {
      throw ValidationError(Field("sensors", i, "d") + ": d must be positive");
    }
  }

  RequireFinite(q, "q");
  if (!(q > 0.0)) throw ValidationError("q: state weight must be positive");

  const auto m = static_cast<Eigen::Index>(actuators.size());
  if (r.rows() != m || r.cols() != m) {
    throw ValidationError("R: expected a " + std::to_string(m) + "x" +
                          std::to_string(m) + " matrix, got " +
                          std::to_string(r.rows()) + "x" +
                          std::to_string(r.cols()));
  }
  if (!r.allFinite()) throw ValidationError("R: entries must be finite");
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("R: weight matrix must be symmetric");
  }
  for (Eigen::Index k = 1; k <= m; ++k) {
    if (!(r.topLeftCorner(k, k).determinant() > 0.0)) {
      throw ValidationError("R: weight matrix must be positive definite "
                            "(leading minor " + std::to_string(k) +
                            " is not positive)");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r, Eigen::EigenvaluesOnly);
  const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  if (!(cond <= kMaxWeightCondition)) {
    throw ValidationError("R: condition number " + std::to_string(cond) +
                          " exceeds 1e12");
  }

  RequireFinite(b, "b");
  if (b_profile.empty()) {
    if (!(b > 0.0)) {
      throw ValidationError("b: process-noise coefficient must be positive");
    }
  } else {
    for (std::size_t n = 0; n < b_profile.size(); ++n) {
      RequireFinite(b_profile[n], "b_profile[" + std::to_string(n) + "]");
    }
  }
}

bool RodConfig::HasConstantProcessNoise() const {
  for (std::size_t n = 1; n < b_profile.size(); ++n) {
    if (b_profile[n] != 0.0) return false;
  }
  return true;
}

double RodConfig::ConstantProcessNoise() const {
  if (!HasConstantProcessNoise()) {
    throw ValidationError(
        "b_profile: spatially varying process noise is only supported for "
        "forward simulation");
  }
  return b_profile.empty() ? b : b_profile[0];
}

std::vector<double> RodConfig::ProcessNoiseModes(int order) const {
  std::vector<double> modes(order + 1, 0.0);
  if (b_profile.empty()) {
    modes[0] = b;
  } else {
    for (std::size_t n = 0; n < b_profile.size() && n < modes.size(); ++n) {
      modes[n] = b_profile[n];
    }
  }
  return modes;
}

namespace examples {

RodConfig BothEnds() {
  RodConfig c;
  c.actuators = {{0.0, 1.0}, {1.0, 1.0}};
  c.q = 1.0;
  c.r = Eigen::MatrixXd::Identity(2, 2);
  return c;
}

RodConfig EndsAndMidpoint() {
  RodConfig c;
  c.actuators = {{0.0, 1.0}, {0.5, 2.0}, {1.0, 1.0}};
  c.q = 1.0;
  c.r = Eigen::MatrixXd::Identity(3, 3);
  return c;
}

RodConfig EndsAndMidpointSensed() {
  RodConfig c = EndsAndMidpoint();
  c.sensors = {{0.25, 1.0, 1.0}, {0.75, 1.0, 1.0}};
  c.b = 1.0;
  return c;
}

}  // namespace examples
}  // namespace rodlqg
