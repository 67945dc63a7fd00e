#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rodlqg/kalman_synthesis.h"
#include "rodlqg/lqr_synthesis.h"
#include "rodlqg/rod_config.h"
#include "rodlqg/spectral_core.h"

namespace rodlqg {

enum class Integrator {
  kExplicitEuler,     ///< Euler / Euler-Maruyama
  kExponentialEuler,  ///< exact decay of the diagonal, Euler on the rest
};

enum class FeedbackSource { kNone, kState, kEstimate };

const char* ToString(Integrator i);
const char* ToString(FeedbackSource f);

struct SimConfig {
  int order = 64;  ///< modes 0..N
  double dt = 1e-5;
  double horizon = 0.1;
  std::uint64_t seed = 0;
  bool noise_enabled = false;
  /// Any basis; converted to orthonormal and truncated or zero-padded.
  ModalVector initial_state = ModalVector::Zero(Basis::kOrthonormal, 0);
  /// Defaults to zero.
  std::optional<ModalVector> initial_estimate;
  Integrator integrator = Integrator::kExplicitEuler;
  /// Record every k-th step (the final time is always recorded).
  int record_stride = 1;

  /// floor(T / dt), tolerant of T being an exact multiple of dt.
  std::int64_t num_steps() const;
};

/// Modal plant x' = A z + B u on modes 0..N, with the point actuators and
/// sensors of one configuration. Immutable after construction.
class ModalPlant {
 public:
  /// Throws ValidationError when explicit Euler would be unstable on the
  /// bare heat operator (N^2 pi^2 dt >= 2).
  ModalPlant(const RodConfig& config, int order, double dt,
             Integrator integrator = Integrator::kExplicitEuler);

  int order() const { return order_; }
  double dt() const { return dt_; }
  int num_actuators() const { return static_cast<int>(input_.cols()); }
  int num_sensors() const { return static_cast<int>(sensor_phi_.rows()); }
  Integrator integrator() const { return integrator_; }

  /// One step of the plant; noise_increment multiplies the modal process
  /// noise profile.
  ModalVector StepPlant(const ModalVector& state, std::span<const double> u,
                        double noise_increment) const;
  /// dY_i = C_i z(zeta_i) dt + D_i dW_i.
  std::vector<double> Measure(const ModalVector& state,
                              std::span<const double> noise_increments) const;
  /// Plant copy plus the innovation sum_i L_i (dY_i - C_i zhat(zeta_i) dt),
  /// injected into mode 0.
  ModalVector StepFilter(const ModalVector& estimate, std::span<const double> u,
                         std::span<const double> dy,
                         const FilterGains& gains) const;

  /// In-place kernels behind the ModalVector operations.
  void StepPlantInPlace(std::span<double> z, std::span<const double> u,
                        double noise_increment) const;
  void MeasureInto(std::span<const double> z, std::span<const double> noise,
                   std::span<double> dy) const;
  void StepFilterInPlace(std::span<double> zhat, std::span<const double> u,
                         std::span<const double> dy,
                         const FilterGains& gains) const;

  /// phi_n(xi_k) beta_k.
  const Eigen::MatrixXd& input() const { return input_; }
  /// phi_n(zeta_i).
  const Eigen::MatrixXd& sensor_values() const { return sensor_phi_; }

 private:
  void Drift(std::span<double> z, std::span<const double> u) const;

  int order_;
  double dt_;
  Integrator integrator_;
  Eigen::MatrixXd input_;
  Eigen::MatrixXd sensor_phi_;
  std::vector<double> c_;
  std::vector<double> d_;
  std::vector<double> noise_modes_;
  std::vector<double> decay_;   ///< per-mode multiplier on z_n
  std::vector<double> weight_;  ///< per-mode multiplier on the forcing
};

/// Which pieces are wired together.
struct Interconnection {
  std::optional<GainField> gains;
  std::optional<FilterGains> filter;
  FeedbackSource feedback = FeedbackSource::kNone;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ModalVector> z;
  std::vector<ModalVector> zhat;  ///< empty without a filter
  std::vector<ModalVector> zerr;  ///< z - zhat; empty without a filter
  std::vector<std::vector<double>> u;  ///< empty without actuation
  std::vector<std::vector<double>> y;  ///< dY per step; empty without sensors
  std::vector<double> energy_z;
  std::vector<double> energy_zerr;  ///< empty without a filter

  std::size_t size() const { return times.size(); }
};

enum class Signal { kState, kEstimate, kError };

/// Runs the interconnection. Within a step the control and the measurement
/// use the state at the start of the step; then plant and filter advance.
/// Throws ValidationError for inconsistent wiring or an explicit step size
/// beyond the stability bound of the coupled system.
Trajectory Simulate(const RodConfig& config, const Interconnection& wiring,
                    const SimConfig& sim);

Trajectory SimulateOpenLoop(const RodConfig& config, const SimConfig& sim);
Trajectory SimulateLqr(const RodConfig& config, const GainField& gains,
                       const SimConfig& sim);
Trajectory SimulateLqg(const RodConfig& config, const GainField& gains,
                       const FilterGains& filter, const SimConfig& sim);

/// Least-squares slope of log(energy) on [t0, t1]. Needs at least 10 samples;
/// throws NumericalError("signal extinguished; shrink window") when the
/// energy falls below 1e-300.
double DecayRate(std::span<const double> times, std::span<const double> energy,
                 double t0, double t1);
double DecayRate(const Trajectory& traj, Signal signal, double t0, double t1);

/// Header t,energy_z,energy_zerr,u_1..u_m,y_1..y_p,z_0..z_K with
/// K = min(N, 16); energy_zerr is nan without a filter.
void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out);

/// Independent runs, one per seed, on up to `threads` threads. Results are
/// indexed like `seeds`.
std::vector<Trajectory> RunEnsemble(const RodConfig& config,
                                    const Interconnection& wiring,
                                    const SimConfig& sim,
                                    std::span<const std::uint64_t> seeds,
                                    int threads);

}  // namespace rodlqg
