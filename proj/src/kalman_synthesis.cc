#include "rodlqg/kalman_synthesis.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rodlqg/errors.h"
#include "rodlqg/spectral_core.h"

namespace rodlqg {

FilterGains SolveFilterRiccati(const RodConfig& config) {
  if (config.sensors.empty()) {
    throw ValidationError("sensors: unobservable: no sensors");
  }
  config.Validate();
  const double b = config.ConstantProcessNoise();

  double info = 0.0;
  for (const auto& s : config.sensors) info += (s.c * s.c) / (s.d * s.d);

  FilterGains g;
  g.p00 = std::sqrt(b * b / info);
  for (const auto& s : config.sensors) {
    g.l.push_back(g.p00 * s.c / (s.d * s.d));
    g.decay0 += g.l.back();
  }
  return g;
}

double KernelHValue(const KernelH& k, double x, double x1, double s) {
  if (!(s <= 0.0)) throw std::domain_error("kernel H is defined for s <= 0");
  if (k.order < 0) throw std::invalid_argument("kernel order must be >= 0");
  double sum = 0.0;
  for (int n = 0; n <= k.order; ++n) {
    const double rate = static_cast<double>(n) * n * kPi * kPi + k.gains.decay0;
    sum += std::exp(rate * s) * Phi(n, x) * Phi(n, x1);
  }
  return sum;
}

double ImpulseResponse(const KernelH& k, int sensor, double x, double s) {
  if (sensor < 0 || sensor >= k.gains.num_sensors()) {
    throw std::out_of_range("sensor index " + std::to_string(sensor) +
                            " out of range");
  }
  if (!(s <= 0.0)) {
    throw std::domain_error("impulse response is defined for s <= 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x must lie in [0, 1]");
  return k.gains.l[sensor] * std::exp(k.gains.decay0 * s);
}

}  // namespace rodlqg
