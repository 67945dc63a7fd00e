#include "rodlqg/spectrum.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "rodlqg/errors.h"

namespace rodlqg {
namespace {

std::vector<double> Breakpoints(const std::vector<double>& points) {
  std::vector<double> bp{0.0};
  for (double x : points) {
    if (x > 0.0 && x < 1.0) bp.push_back(x);
  }
  bp.push_back(1.0);
  return bp;
}

int BreakpointIndex(const std::vector<double>& bp, double x) {
  const auto it = std::find(bp.begin(), bp.end(), x);
  return static_cast<int>(it - bp.begin());
}

// Value and slope of the two segment basis functions at x.
Eigen::Vector2d BasisValue(double nu, double l, double x) {
  if (nu == 0.0) return {1.0, x - l};
  const double t = nu * (x - l);
  return {std::cos(t), std::sin(t)};
}

Eigen::Vector2d BasisSlope(double nu, double l, double x) {
  if (nu == 0.0) return {0.0, 1.0};
  const double t = nu * (x - l);
  return {-nu * std::sin(t), nu * std::cos(t)};
}

// jumps[j] is the functional J at breakpoint j (empty row = none).
MatchingMatrix Assemble(std::vector<double> bp, double nu,
                        const std::vector<Eigen::RowVectorXd>& jumps) {
  const int segments = static_cast<int>(bp.size()) - 1;
  const int dim = 2 * segments;
  MatchingMatrix mm;
  mm.nu = nu;
  mm.entries = Eigen::MatrixXd::Zero(dim, dim);
  auto add_jump = [&](int row, int j) {
    if (jumps[j].size() == dim) mm.entries.row(row) -= jumps[j];
  };

  int row = 0;
  // x = 0: psi'(0^-) - psi'(0^+) = -psi'(0^+).
  mm.entries.block(row, 0, 1, 2) = -BasisSlope(nu, bp[0], bp[0]).transpose();
  add_jump(row, 0);
  ++row;
  for (int j = 1; j < segments; ++j) {
    const double x = bp[j];
    const int left = 2 * (j - 1);
    const int right = 2 * j;
    mm.entries.block(row, left, 1, 2) = BasisValue(nu, bp[j - 1], x).transpose();
    mm.entries.block(row, right, 1, 2) = -BasisValue(nu, x, x).transpose();
    ++row;
    mm.entries.block(row, left, 1, 2) = BasisSlope(nu, bp[j - 1], x).transpose();
    mm.entries.block(row, right, 1, 2) = -BasisSlope(nu, x, x).transpose();
    add_jump(row, j);
    ++row;
  }
  // x = 1: psi'(1^-) - psi'(1^+) = psi'(1^-).
  mm.entries.block(row, dim - 2, 1, 2) =
      BasisSlope(nu, bp[segments - 1], 1.0).transpose();
  add_jump(row, segments);
  mm.breakpoints = std::move(bp);
  return mm;
}

void CheckNu(double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("frequency nu must be finite and >= 0");
  }
}

// Determinant sign and residual of the normalized matching matrix.
struct Probe {
  double det = 0.0;
  double sigma_min = 0.0;
  double sigma_next = 0.0;
};

Probe ProbeAt(const MatchingMatrix& mm) {
  const Eigen::MatrixXd n = mm.Normalized();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(n);
  const auto& s = svd.singularValues();
  Probe p;
  p.det = n.partialPivLu().determinant();
  p.sigma_min = s(s.size() - 1);
  p.sigma_next = s.size() > 1 ? s(s.size() - 2) : p.sigma_min;
  return p;
}

template <class Fn>
void ParallelFor(int count, int threads, const Fn& fn) {
  if (threads <= 1 || count < 2 * threads) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) fn(i);
    });
  }
}

using Builder = std::function<MatchingMatrix(double)>;

SpectralRoot MakeRoot(const Builder& build, double nu, double tol) {
  const MatchingMatrix mm = build(nu);
  const Eigen::MatrixXd n = mm.Normalized();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(n, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  SpectralRoot root;
  root.nu = nu;
  root.eigenvalue = -nu * nu;
  root.residual = s(s.size() - 1);
  root.converged = root.residual < tol;
  root.multiplicity = (s.size() > 1 && s(s.size() - 2) < tol) ? 2 : 1;
  const Eigen::VectorXd raw =
      mm.ColumnScale().cwiseProduct(svd.matrixV().col(n.cols() - 1));
  root.eigenfunction = mm.Piecewise(raw);

  double sup = 0.0;
  for (const auto& seg : root.eigenfunction) sup = std::max(sup, seg.SupNorm());
  if (sup > 0.0) {
    // Sign: positive at the leftmost point where |psi| reaches its maximum.
    double sign = 1.0;
    bool found = false;
    for (const auto& seg : root.eigenfunction) {
      for (double x : seg.CriticalPoints()) {
        const double v = seg.Value(x);
        if (std::abs(v) >= (1.0 - 1e-9) * sup) {
          sign = v > 0.0 ? 1.0 : -1.0;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    for (auto& seg : root.eigenfunction) {
      seg.a *= sign / sup;
      seg.b *= sign / sup;
    }
  }
  return root;
}

double Bisect(const Builder& build, double lo, double hi, double det_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = ProbeAt(build(mid)).det;
    if (d == 0.0) return mid;
    if ((d < 0.0) == (det_lo < 0.0)) {
      lo = mid;
      det_lo = d;
    } else {
      hi = mid;
    }
  }
  const double s_lo = ProbeAt(build(lo)).sigma_min;
  const double s_hi = ProbeAt(build(hi)).sigma_min;
  return s_lo <= s_hi ? lo : hi;
}

double GoldenMinimum(const Builder& build, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = ProbeAt(build(x1)).sigma_min;
  double f2 = ProbeAt(build(x2)).sigma_min;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = ProbeAt(build(x1)).sigma_min;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = ProbeAt(build(x2)).sigma_min;
    }
  }
  return f1 <= f2 ? x1 : x2;
}

SpectrumResult ScanRoots(const Builder& build, double nu_max, double tol,
                         const SpectrumOptions& options) {
  if (!(nu_max > 0.0)) throw std::invalid_argument("nu_max must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(options.grid_step > 0.0)) {
    throw std::invalid_argument("grid_step must be positive");
  }
  const int cells = static_cast<int>(std::ceil(nu_max / options.grid_step));
  std::vector<double> grid(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    grid[i] = std::min(nu_max, i * options.grid_step);
  }
  std::vector<Probe> probes(grid.size());
  ParallelFor(static_cast<int>(grid.size()), options.threads,
              [&](int i) { probes[i] = ProbeAt(build(grid[i])); });

  std::vector<double> found;
  std::vector<bool> cell_has_root(cells, false);
  for (int i = 0; i <= cells; ++i) {
    if (probes[i].det == 0.0 || probes[i].sigma_min < 0.1 * tol) {
      found.push_back(grid[i]);
      if (i > 0) cell_has_root[i - 1] = true;
      if (i < cells) cell_has_root[i] = true;
    }
  }
  for (int i = 0; i < cells; ++i) {
    const double d0 = probes[i].det;
    const double d1 = probes[i + 1].det;
    if (d0 == 0.0 || d1 == 0.0 || (d0 < 0.0) == (d1 < 0.0)) continue;
    found.push_back(Bisect(build, grid[i], grid[i + 1], d0));
    cell_has_root[i] = true;
  }
  // Even-multiplicity roots do not flip the sign; look for residual minima.
  for (int i = 1; i < cells; ++i) {
    if (cell_has_root[i - 1] || cell_has_root[i]) continue;
    if (probes[i].sigma_min > probes[i - 1].sigma_min ||
        probes[i].sigma_min > probes[i + 1].sigma_min) {
      continue;
    }
    const double nu = GoldenMinimum(build, grid[i - 1], grid[i + 1]);
    if (ProbeAt(build(nu)).sigma_min < tol) found.push_back(nu);
  }

  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end(),
                          [](double a, double b) {
                            return std::abs(a - b) <= 1e-9 * std::max(1.0, b);
                          }),
              found.end());
  SpectrumResult result;
  for (double nu : found) result.roots.push_back(MakeRoot(build, nu, tol));
  return result;
}

void SortLeastStableFirst(SpectrumResult& r) {
  std::stable_sort(r.roots.begin(), r.roots.end(),
                   [](const SpectralRoot& a, const SpectralRoot& b) {
                     return a.eigenvalue > b.eigenvalue;
                   });
}

}  // namespace

Eigen::VectorXd MatchingMatrix::ColumnScale() const {
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(entries.cols());
  if (nu > 0.0 && nu < 1.0) {
    for (Eigen::Index c = 1; c < scale.size(); c += 2) scale(c) = 1.0 / nu;
  }
  return scale;
}

Eigen::MatrixXd MatchingMatrix::Normalized() const {
  Eigen::MatrixXd n = entries * ColumnScale().asDiagonal();
  for (Eigen::Index r = 0; r < n.rows(); ++r) {
    const double norm = n.row(r).norm();
    if (norm > 0.0) n.row(r) /= norm;
  }
  return n;
}

double MatchingMatrix::Residual() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Normalized());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Eigen::VectorXd MatchingMatrix::Apply(const Eigen::VectorXd& unknowns) const {
  if (unknowns.size() != entries.cols()) {
    throw std::invalid_argument("unknown vector has the wrong length");
  }
  return entries * unknowns;
}

std::vector<SegmentSinusoid> MatchingMatrix::Piecewise(
    const Eigen::VectorXd& unknowns) const {
  if (unknowns.size() != entries.cols()) {
    throw std::invalid_argument("unknown vector has the wrong length");
  }
  std::vector<SegmentSinusoid> pieces;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    SegmentSinusoid seg;
    seg.lower = breakpoints[s];
    seg.upper = breakpoints[s + 1];
    seg.pivot = seg.lower;
    seg.nu = nu;
    seg.a = unknowns(2 * s);
    seg.b = unknowns(2 * s + 1);
    pieces.push_back(seg);
  }
  return pieces;
}

MatchingMatrix ClosedLoopMatchingMatrix(const RodConfig& config,
                                        const GainField& gains, double nu) {
  CheckNu(nu);
  const int m = config.num_actuators();
  if (gains.num_actuators() != m) {
    throw std::invalid_argument("gain field and configuration disagree on "
                                "the number of actuators");
  }
  std::vector<double> positions;
  for (const auto& a : config.actuators) positions.push_back(a.xi);
  std::vector<double> bp = Breakpoints(positions);
  const int segments = static_cast<int>(bp.size()) - 1;
  const int dim = 2 * segments;
  const int order = gains.order();

  // Feedback integrals: u_k = sum_s (a_s Fc + b_s Fs) with exact moments.
  Eigen::MatrixXd feedback = Eigen::MatrixXd::Zero(m, dim);
  for (int s = 0; s < segments; ++s) {
    const double l = bp[s];
    const double u = bp[s + 1];
    for (int n = 0; n <= order; ++n) {
      double mc;
      double ms;
      if (nu == 0.0) {
        mc = CosSinMoment(n, 0.0, l, u, l).cos_part;
        ms = LinearMoment(n, l, u, l);
      } else {
        const CosSinMoments mom = CosSinMoment(n, nu, l, u, l);
        mc = mom.cos_part;
        ms = mom.sin_part;
      }
      for (int k = 0; k < m; ++k) {
        const double c = gains.coeffs(k)[n];
        feedback(k, 2 * s) += c * mc;
        feedback(k, 2 * s + 1) += c * ms;
      }
    }
  }
  std::vector<Eigen::RowVectorXd> jumps(bp.size());
  for (int k = 0; k < m; ++k) {
    const int j = BreakpointIndex(bp, config.actuators[k].xi);
    jumps[j] = config.actuators[k].beta * feedback.row(k);
  }
  return Assemble(std::move(bp), nu, jumps);
}

MatchingMatrix ErrorMatchingMatrix(const RodConfig& config,
                                   std::span<const double> filter_gains,
                                   double nu) {
  CheckNu(nu);
  const int p = config.num_sensors();
  if (static_cast<int>(filter_gains.size()) != p) {
    throw std::invalid_argument("one filter gain per sensor is required");
  }
  std::vector<double> positions;
  for (const auto& s : config.sensors) positions.push_back(s.zeta);
  std::vector<double> bp = Breakpoints(positions);
  const int segments = static_cast<int>(bp.size()) - 1;
  const int dim = 2 * segments;
  std::vector<Eigen::RowVectorXd> jumps(bp.size());
  for (int i = 0; i < p; ++i) {
    const double zeta = config.sensors[i].zeta;
    const int j = BreakpointIndex(bp, zeta);
    const int seg = j == 0 ? 0 : j - 1;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
    // psi'(zeta^-) - psi'(zeta^+) = -L_i C_i psi(zeta)
    row.segment(2 * seg, 2) = -filter_gains[i] * config.sensors[i].c *
                              BasisValue(nu, bp[seg], zeta).transpose();
    jumps[j] = row;
  }
  return Assemble(std::move(bp), nu, jumps);
}

double SpectralRoot::Eigenfunction(double x) const {
  return EvaluatePiecewise(eigenfunction, x);
}

SpectrumResult FindSpectrum(const RodConfig& config, const GainField& gains,
                            double nu_max, double tol,
                            const SpectrumOptions& options) {
  config.Validate();
  const Builder build = [&](double nu) {
    return ClosedLoopMatchingMatrix(config, gains, nu);
  };
  SpectrumResult r = ScanRoots(build, nu_max, tol, options);
  SortLeastStableFirst(r);
  return r;
}

SpectrumResult ErrorSpectrum(const RodConfig& config,
                             std::span<const double> filter_gains,
                             double nu_max, double tol,
                             const SpectrumOptions& options) {
  config.Validate();
  double rate = 0.0;
  for (std::size_t i = 0; i < filter_gains.size(); ++i) {
    if (!(filter_gains[i] > 0.0)) {
      throw std::invalid_argument("filter gains must be positive");
    }
    if (i < config.sensors.size()) rate += filter_gains[i] * config.sensors[i].c;
  }
  const Builder build = [&](double nu) {
    return ErrorMatchingMatrix(config, filter_gains, nu);
  };
  SpectrumResult r = ScanRoots(build, nu_max, tol, options);
  std::erase_if(r.roots, [](const SpectralRoot& root) { return root.nu == 0.0; });

  SpectralRoot zero;
  zero.nu = std::sqrt(rate);
  zero.eigenvalue = -zero.nu * zero.nu;
  zero.origin = RootOrigin::kMeanFieldZeroMode;
  zero.eigenfunction = {SegmentSinusoid{0.0, 1.0, 1.0, 0.0, 0.0, 0.0}};
  r.roots.push_back(zero);
  SortLeastStableFirst(r);
  return r;
}

int ReflectionParity(const SpectralRoot& root, double tol) {
  double even = 0.0;
  double odd = 0.0;
  for (int j = 0; j <= 100; ++j) {
    const double x = j / 100.0;
    const double a = root.Eigenfunction(x);
    const double b = root.Eigenfunction(1.0 - x);
    even = std::max(even, std::abs(a - b));
    odd = std::max(odd, std::abs(a + b));
  }
  if (even < tol) return 1;
  if (odd < tol) return -1;
  return 0;
}

std::vector<SpectralRoot> SensedSymmetricRoots(const SpectrumResult& spectrum,
                                               const RodConfig& config,
                                               double tol) {
  std::vector<SpectralRoot> out;
  for (const auto& root : spectrum.roots) {
    if (root.origin != RootOrigin::kDeterminant) continue;
    if (ReflectionParity(root, tol) != 1) continue;
    const bool seen = std::any_of(
        config.sensors.begin(), config.sensors.end(),
        [&](const Sensor& s) { return std::abs(root.Eigenfunction(s.zeta)) > tol; });
    if (seen) out.push_back(root);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.nu < b.nu; });
  return out;
}

Eigen::MatrixXd ModalClosedLoopMatrix(const RodConfig& config,
                                      const GainField& gains, int order) {
  if (order < 1) throw std::invalid_argument("modal order must be >= 1");
  const int m = config.num_actuators();
  if (gains.num_actuators() != m) {
    throw std::invalid_argument("gain field and configuration disagree on "
                                "the number of actuators");
  }
  const int dim = order + 1;
  Eigen::MatrixXd input(dim, m);
  Eigen::MatrixXd feedback(m, dim);
  for (int n = 0; n < dim; ++n) {
    for (int k = 0; k < m; ++k) {
      input(n, k) = Phi(n, config.actuators[k].xi) * config.actuators[k].beta;
      feedback(k, n) = gains.FeedbackWeight(k, n);
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) a(n, n) = -static_cast<double>(n) * n * kPi * kPi;
  return a + input * feedback;
}

std::vector<std::complex<double>> SortedEigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  std::vector<std::complex<double>> ev(es.eigenvalues().begin(),
                                       es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(),
            [](const auto& a, const auto& b) { return a.real() > b.real(); });
  return ev;
}

const char* ToString(DeltaConvention c) {
  return c == DeltaConvention::kOrthonormalExact ? "orthonormal_exact"
                                                 : "formal_expansion";
}

AreOracleResult TruncatedAreOracle(const RodConfig& config, int order,
                                   DeltaConvention convention,
                                   const CareOptions& options) {
  config.Validate();
  if (order < 0 || order > 256) {
    throw std::invalid_argument("truncated ARE oracle supports 0 <= N <= 256");
  }
  const int dim = order + 1;
  const int m = config.num_actuators();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd b(dim, m);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    a(n, n) = -static_cast<double>(n) * n * kPi * kPi;
    for (int k = 0; k < m; ++k) {
      b(n, k) = Phi(n, config.actuators[k].xi) * config.actuators[k].beta;
    }
    const double w =
        (convention == DeltaConvention::kFormalExpansion && n > 0) ? 0.5 : 1.0;
    q(n, n) = config.q * w;
  }
  const CareSolution care = SolveCare(a, b, q, config.r, options);

  AreOracleResult out;
  out.convention = convention;
  out.p_orthonormal = care.x;
  out.iterations = care.iterations;
  out.residual = care.residual;
  out.residual_history = care.residual_history;
  Eigen::VectorXd s = Eigen::VectorXd::Constant(dim, kSqrt2);
  s(0) = 1.0;
  out.p_plain = s.asDiagonal() * care.x * s.asDiagonal();
  return out;
}

}  // namespace rodlqg
