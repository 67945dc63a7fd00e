#pragma once

#include <vector>

#include "rodlqg/rod_config.h"

namespace rodlqg {

/// Stationary filter: the constant covariance P00 and the sensor gains.
struct FilterGains {
  double p00 = 0.0;
  std::vector<double> l;  ///< L_i = P00 C_i / D_i^2
  double decay0 = 0.0;    ///< sum of L_i

  int num_sensors() const { return static_cast<int>(l.size()); }
};

/// P00 = sqrt(B^2 / sum_i C_i^2 / D_i^2). Throws ValidationError when there
/// are no sensors or the process noise varies along the rod.
FilterGains SolveFilterRiccati(const RodConfig& config);

/// Backward kernel of the stationary estimator, truncated at `order`.
struct KernelH {
  FilterGains gains;
  int order = 64;
};

/// sum_n exp((n^2 pi^2 + sum L) s) phi_n(x) phi_n(x1) for s <= 0.
double KernelHValue(const KernelH& k, double x, double x1, double s);

/// L_i exp(sum L s): the weight the estimate gives to sensor i's
/// observation made |s| time units ago. Independent of x.
double ImpulseResponse(const KernelH& k, int sensor, double x, double s);

}  // namespace rodlqg
