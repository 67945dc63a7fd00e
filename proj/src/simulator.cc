#include "rodlqg/simulator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "rodlqg/errors.h"
#include "rodlqg/number_format.h"

namespace rodlqg {
namespace {

double Lambda(int n) { return static_cast<double>(n) * n * kPi * kPi; }

std::vector<double> Orthonormal(const ModalVector& v, int order) {
  const ModalVector o = ConvertBasis(v, Basis::kOrthonormal);
  std::vector<double> out(order + 1, 0.0);
  for (int n = 0; n <= std::min(order, o.order()); ++n) out[n] = o[n];
  return out;
}

double Energy(std::span<const double> z) {
  double s = 0.0;
  for (double c : z) s += c * c;
  return std::sqrt(s);
}

std::mt19937_64 Stream(std::uint64_t seed, std::uint32_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), channel};
  return std::mt19937_64(seq);
}

// Brownian increments of one channel. Each channel owns its distribution:
// normal_distribution caches the second sample of each pair.
class NoiseChannel {
 public:
  NoiseChannel(std::uint64_t seed, std::uint32_t channel, double dt)
      : rng_(Stream(seed, channel)), normal_(0.0, std::sqrt(dt)) {}
  double Draw() { return normal_(rng_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

// Composite drift matrix of the wired system, for the Gershgorin bound.
Eigen::MatrixXd CoupledDrift(const ModalPlant& plant,
                             const Interconnection& wiring,
                             const RodConfig& config) {
  const int dim = plant.order() + 1;
  const bool filtered = wiring.filter.has_value();
  const int total = filtered ? 2 * dim : dim;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(total, total);
  for (int n = 0; n < dim; ++n) {
    m(n, n) = -Lambda(n);
    if (filtered) m(dim + n, dim + n) = -Lambda(n);
  }
  if (wiring.feedback != FeedbackSource::kNone) {
    Eigen::MatrixXd k(plant.num_actuators(), dim);
    for (int a = 0; a < k.rows(); ++a) {
      for (int n = 0; n < dim; ++n) k(a, n) = wiring.gains->FeedbackWeight(a, n);
    }
    const Eigen::MatrixXd bk = plant.input() * k;
    const int col = wiring.feedback == FeedbackSource::kState ? 0 : dim;
    m.block(0, col, dim, dim) += bk;
    if (filtered) m.block(dim, col, dim, dim) += bk;
  }
  if (filtered) {
    for (int i = 0; i < plant.num_sensors(); ++i) {
      const double g = wiring.filter->l[i] * config.sensors[i].c;
      for (int n = 0; n < dim; ++n) {
        m(dim, n) += g * plant.sensor_values()(i, n);
        m(dim, dim + n) -= g * plant.sensor_values()(i, n);
      }
    }
  }
  return m;
}

void CheckWiring(const RodConfig& config, const Interconnection& w) {
  if (w.feedback != FeedbackSource::kNone && !w.gains) {
    throw ValidationError("feedback requires a gain field");
  }
  if (w.feedback == FeedbackSource::kEstimate && !w.filter) {
    throw ValidationError("feedback on the estimate requires a filter");
  }
  if (w.gains && w.gains->num_actuators() != config.num_actuators()) {
    throw ValidationError("gain field does not match the actuator count");
  }
  if (w.filter && w.filter->num_sensors() != config.num_sensors()) {
    throw ValidationError("filter gains do not match the sensor count");
  }
}

}  // namespace

const char* ToString(Integrator i) {
  return i == Integrator::kExplicitEuler ? "euler" : "exponential";
}

const char* ToString(FeedbackSource f) {
  switch (f) {
    case FeedbackSource::kNone: return "none";
    case FeedbackSource::kState: return "state";
    case FeedbackSource::kEstimate: return "estimate";
  }
  return "?";
}

std::int64_t SimConfig::num_steps() const {
  return static_cast<std::int64_t>(std::floor(horizon / dt * (1.0 + 1e-12)));
}

ModalPlant::ModalPlant(const RodConfig& config, int order, double dt,
                       Integrator integrator)
    : order_(order), dt_(dt), integrator_(integrator) {
  if (order < 0) throw ValidationError("n: modal order must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("dt: time step must be positive");
  }
  if (integrator == Integrator::kExplicitEuler && !(Lambda(order) * dt < 2.0)) {
    throw ValidationError(
        "dt: explicit Euler needs dt < 2/(N^2 pi^2) = " +
        FormatSignificant(2.0 / Lambda(order)) + " at N = " +
        std::to_string(order));
  }
  const int dim = order + 1;
  input_.resize(dim, config.num_actuators());
  for (int n = 0; n < dim; ++n) {
    for (int k = 0; k < config.num_actuators(); ++k) {
      input_(n, k) = Phi(n, config.actuators[k].xi) * config.actuators[k].beta;
    }
  }
  sensor_phi_.resize(config.num_sensors(), dim);
  for (int i = 0; i < config.num_sensors(); ++i) {
    c_.push_back(config.sensors[i].c);
    d_.push_back(config.sensors[i].d);
    for (int n = 0; n < dim; ++n) sensor_phi_(i, n) = Phi(n, config.sensors[i].zeta);
  }
  noise_modes_ = config.ProcessNoiseModes(order);
  for (int n = 0; n < dim; ++n) {
    const double l = Lambda(n);
    if (integrator == Integrator::kExplicitEuler) {
      decay_.push_back(1.0 - l * dt);
      weight_.push_back(dt);
    } else {
      decay_.push_back(std::exp(-l * dt));
      weight_.push_back(n == 0 ? dt : -std::expm1(-l * dt) / l);
    }
  }
}

void ModalPlant::Drift(std::span<double> z, std::span<const double> u) const {
  if (static_cast<int>(z.size()) != order_ + 1) {
    throw std::invalid_argument("state has the wrong number of modes");
  }
  if (static_cast<int>(u.size()) != num_actuators()) {
    throw std::invalid_argument("control has the wrong length");
  }
  for (int n = 0; n <= order_; ++n) {
    double f = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) f += input_(n, k) * u[k];
    z[n] = decay_[n] * z[n] + weight_[n] * f;
  }
}

void ModalPlant::StepPlantInPlace(std::span<double> z, std::span<const double> u,
                                  double noise_increment) const {
  Drift(z, u);
  if (noise_increment != 0.0) {
    for (int n = 0; n <= order_; ++n) z[n] += noise_modes_[n] * noise_increment;
  }
}

void ModalPlant::MeasureInto(std::span<const double> z,
                             std::span<const double> noise,
                             std::span<double> dy) const {
  const int p = num_sensors();
  if (static_cast<int>(dy.size()) != p ||
      (!noise.empty() && static_cast<int>(noise.size()) != p)) {
    throw std::invalid_argument("measurement vectors have the wrong length");
  }
  for (int i = 0; i < p; ++i) {
    double v = 0.0;
    for (int n = 0; n <= order_ && n < static_cast<int>(z.size()); ++n) {
      v += sensor_phi_(i, n) * z[n];
    }
    dy[i] = c_[i] * v * dt_ + (noise.empty() ? 0.0 : d_[i] * noise[i]);
  }
}

void ModalPlant::StepFilterInPlace(std::span<double> zhat,
                                   std::span<const double> u,
                                   std::span<const double> dy,
                                   const FilterGains& gains) const {
  const int p = num_sensors();
  if (static_cast<int>(dy.size()) != p || gains.num_sensors() != p) {
    throw std::invalid_argument("filter inputs have the wrong length");
  }
  double innovation = 0.0;
  for (int i = 0; i < p; ++i) {
    double v = 0.0;
    for (int n = 0; n <= order_; ++n) v += sensor_phi_(i, n) * zhat[n];
    innovation += gains.l[i] * (dy[i] - c_[i] * v * dt_);
  }
  Drift(zhat, u);
  zhat[0] += innovation;
}

ModalVector ModalPlant::StepPlant(const ModalVector& state,
                                  std::span<const double> u,
                                  double noise_increment) const {
  std::vector<double> z = Orthonormal(state, order_);
  StepPlantInPlace(z, u, noise_increment);
  return ModalVector(Basis::kOrthonormal, std::move(z));
}

std::vector<double> ModalPlant::Measure(
    const ModalVector& state, std::span<const double> noise_increments) const {
  const std::vector<double> z = Orthonormal(state, order_);
  std::vector<double> dy(num_sensors());
  MeasureInto(z, noise_increments, dy);
  return dy;
}

ModalVector ModalPlant::StepFilter(const ModalVector& estimate,
                                   std::span<const double> u,
                                   std::span<const double> dy,
                                   const FilterGains& gains) const {
  std::vector<double> z = Orthonormal(estimate, order_);
  StepFilterInPlace(z, u, dy, gains);
  return ModalVector(Basis::kOrthonormal, std::move(z));
}

Trajectory Simulate(const RodConfig& config, const Interconnection& wiring,
                    const SimConfig& sim) {
  config.Validate();
  CheckWiring(config, wiring);
  if (!(sim.horizon >= sim.dt)) throw ValidationError("t: horizon must be >= dt");
  if (sim.record_stride < 1) throw ValidationError("record_stride must be >= 1");
  const ModalPlant plant(config, sim.order, sim.dt, sim.integrator);
  if (sim.integrator == Integrator::kExplicitEuler) {
    const Eigen::MatrixXd m = CoupledDrift(plant, wiring, config);
    double bound = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      bound = std::max(bound, m.row(r).cwiseAbs().sum());
    }
    if (!(bound * sim.dt < 2.0)) {
      throw ValidationError("dt: explicit Euler needs dt < " +
                            FormatSignificant(2.0 / bound) +
                            " for the coupled system");
    }
  }

  const int dim = sim.order + 1;
  const int m = config.num_actuators();
  const int p = config.num_sensors();
  const bool filtered = wiring.filter.has_value();
  const bool actuated = wiring.feedback != FeedbackSource::kNone;

  std::vector<double> z = Orthonormal(sim.initial_state, sim.order);
  std::vector<double> zhat =
      sim.initial_estimate ? Orthonormal(*sim.initial_estimate, sim.order)
                           : std::vector<double>(dim, 0.0);
  std::vector<double> u(m, 0.0);
  std::vector<double> dy(p, 0.0);
  std::vector<double> sensor_noise(sim.noise_enabled ? p : 0, 0.0);

  NoiseChannel process(sim.seed, 0, sim.dt);
  std::vector<NoiseChannel> sensor_channels;
  for (int i = 0; i < p; ++i) sensor_channels.emplace_back(sim.seed, 1 + i, sim.dt);

  Trajectory traj;
  const std::int64_t steps = sim.num_steps();
  const std::size_t reserve = static_cast<std::size_t>(steps / sim.record_stride + 2);
  traj.times.reserve(reserve);
  traj.z.reserve(reserve);
  traj.energy_z.reserve(reserve);
  if (filtered) {
    traj.zhat.reserve(reserve);
    traj.zerr.reserve(reserve);
    traj.energy_zerr.reserve(reserve);
  }

  std::vector<double> err(dim);
  for (std::int64_t k = 0; k <= steps; ++k) {
    if (actuated) {
      const ModalVector src(Basis::kOrthonormal,
                            wiring.feedback == FeedbackSource::kState ? z : zhat);
      for (int a = 0; a < m; ++a) u[a] = wiring.gains->Apply(a, src);
    }
    if (p > 0) {
      if (sim.noise_enabled) {
        for (int i = 0; i < p; ++i) sensor_noise[i] = sensor_channels[i].Draw();
      }
      plant.MeasureInto(z, sensor_noise, dy);
    }

    if (k % sim.record_stride == 0 || k == steps) {
      traj.times.push_back(static_cast<double>(k) * sim.dt);
      traj.z.emplace_back(Basis::kOrthonormal, z);
      traj.energy_z.push_back(Energy(z));
      if (filtered) {
        for (int n = 0; n < dim; ++n) err[n] = z[n] - zhat[n];
        traj.zhat.emplace_back(Basis::kOrthonormal, zhat);
        traj.zerr.emplace_back(Basis::kOrthonormal, err);
        traj.energy_zerr.push_back(Energy(err));
      }
      if (actuated) traj.u.push_back(u);
      if (p > 0) traj.y.push_back(dy);
    }
    if (k == steps) break;

    const double w = sim.noise_enabled ? process.Draw() : 0.0;
    plant.StepPlantInPlace(z, u, w);
    if (filtered) plant.StepFilterInPlace(zhat, u, dy, *wiring.filter);
    if (!std::isfinite(z[0]) || !std::isfinite(zhat[0])) {
      throw NumericalError("simulation diverged at t = " +
                               FormatShortest(static_cast<double>(k) * sim.dt),
                           {});
    }
  }
  return traj;
}

Trajectory SimulateOpenLoop(const RodConfig& config, const SimConfig& sim) {
  return Simulate(config, Interconnection{}, sim);
}

Trajectory SimulateLqr(const RodConfig& config, const GainField& gains,
                       const SimConfig& sim) {
  return Simulate(config, Interconnection{gains, std::nullopt, FeedbackSource::kState},
                  sim);
}

Trajectory SimulateLqg(const RodConfig& config, const GainField& gains,
                       const FilterGains& filter, const SimConfig& sim) {
  return Simulate(config, Interconnection{gains, filter, FeedbackSource::kEstimate},
                  sim);
}

double DecayRate(std::span<const double> times, std::span<const double> energy,
                 double t0, double t1) {
  if (times.size() != energy.size()) {
    throw std::invalid_argument("times and energy differ in length");
  }
  if (!(t1 > t0)) throw std::invalid_argument("decay window needs t1 > t0");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    if (t < t0 || t > t1) continue;
    if (!(energy[j] >= 1e-300)) {
      throw NumericalError("signal extinguished; shrink window", {});
    }
    const double y = std::log(energy[j]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  if (count < 10) {
    throw std::invalid_argument("decay window holds " + std::to_string(count) +
                                " samples; at least 10 are required");
  }
  const double mt = st / count;
  const double my = sy / count;
  return (sty / count - mt * my) / (stt / count - mt * mt);
}

double DecayRate(const Trajectory& traj, Signal signal, double t0, double t1) {
  switch (signal) {
    case Signal::kState:
      return DecayRate(traj.times, traj.energy_z, t0, t1);
    case Signal::kError:
      if (traj.energy_zerr.empty()) {
        throw std::invalid_argument("trajectory has no filter error");
      }
      return DecayRate(traj.times, traj.energy_zerr, t0, t1);
    case Signal::kEstimate: {
      if (traj.zhat.empty()) throw std::invalid_argument("trajectory has no estimate");
      std::vector<double> e;
      for (const auto& v : traj.zhat) e.push_back(Energy(v.coeffs()));
      return DecayRate(traj.times, e, t0, t1);
    }
  }
  return 0.0;
}

void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out) {
  const std::size_t m = traj.u.empty() ? 0 : traj.u.front().size();
  const std::size_t p = traj.y.empty() ? 0 : traj.y.front().size();
  const int top = traj.z.empty() ? 0 : std::min(traj.z.front().order(), 16);
  out << "t,energy_z,energy_zerr";
  for (std::size_t k = 1; k <= m; ++k) out << ",u_" << k;
  for (std::size_t i = 1; i <= p; ++i) out << ",y_" << i;
  for (int n = 0; n <= top; ++n) out << ",z_" << n;
  out << '\n';
  for (std::size_t j = 0; j < traj.size(); ++j) {
    out << FormatShortest(traj.times[j]) << ',' << FormatShortest(traj.energy_z[j])
        << ','
        << (traj.energy_zerr.empty() ? std::string("nan")
                                     : FormatShortest(traj.energy_zerr[j]));
    for (std::size_t k = 0; k < m; ++k) out << ',' << FormatShortest(traj.u[j][k]);
    for (std::size_t i = 0; i < p; ++i) out << ',' << FormatShortest(traj.y[j][i]);
    for (int n = 0; n <= top; ++n) out << ',' << FormatShortest(traj.z[j][n]);
    out << '\n';
  }
}

std::vector<Trajectory> RunEnsemble(const RodConfig& config,
                                    const Interconnection& wiring,
                                    const SimConfig& sim,
                                    std::span<const std::uint64_t> seeds,
                                    int threads) {
  std::vector<Trajectory> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  auto run = [&](std::size_t j) {
    try {
      SimConfig s = sim;
      s.seed = seeds[j];
      out[j] = Simulate(config, wiring, s);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(1, seeds.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t j = t; j < seeds.size(); j += workers) run(j);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace rodlqg
