#pragma once

#include <vector>

#include <Eigen/Core>

namespace rodlqg {

struct Actuator {
  double xi = 0.0;    ///< position in [0,1]
  double beta = 0.0;  ///< flux coefficient, >= 0
};

struct Sensor {
  double zeta = 0.0;  ///< position in [0,1]
  double c = 1.0;     ///< measurement gain, > 0
  double d = 1.0;     ///< measurement noise standard deviation, > 0
};

/// One problem instance: geometry, cost weights and noise coefficients.
///
/// The process noise enters as B(x) v(t) with scalar white noise v. B is the
/// constant `b` unless `b_profile` is non-empty, in which case B(x) is the
/// orthonormal cosine series with those coefficients. Only forward
/// simulation accepts a non-constant profile.
struct RodConfig {
  std::vector<Actuator> actuators;
  std::vector<Sensor> sensors;
  double q = 1.0;
  Eigen::MatrixXd r;
  double b = 1.0;
  std::vector<double> b_profile;

  int num_actuators() const { return static_cast<int>(actuators.size()); }
  int num_sensors() const { return static_cast<int>(sensors.size()); }

  /// Checks every invariant; throws ValidationError naming the field.
  void Validate() const;

  /// True when the process noise coefficient does not vary along the rod.
  bool HasConstantProcessNoise() const;
  /// The spatially constant B; throws ValidationError for a varying profile.
  double ConstantProcessNoise() const;
  /// Orthonormal modal coefficients of B(x), truncated or zero-padded to
  /// order + 1 entries.
  std::vector<double> ProcessNoiseModes(int order) const;
};

/// Largest/smallest eigenvalue ratio above which R is rejected.
inline constexpr double kMaxWeightCondition = 1e12;

namespace examples {
/// Heating/cooling at both ends, unit weights.
RodConfig BothEnds();
/// Both ends plus the midpoint with beta = (1, 2, 1).
RodConfig EndsAndMidpoint();
/// EndsAndMidpoint with two unit sensors at 0.25 and 0.75 and B = 1.
RodConfig EndsAndMidpointSensed();
}  // namespace examples

}  // namespace rodlqg
