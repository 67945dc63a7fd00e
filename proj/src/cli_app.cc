#include "rodlqg/cli_app.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "rodlqg/care.h"
#include "rodlqg/config_io.h"
#include "rodlqg/errors.h"
#include "rodlqg/kalman_synthesis.h"
#include "rodlqg/lqr_synthesis.h"
#include "rodlqg/number_format.h"
#include "rodlqg/simulator.h"
#include "rodlqg/spectrum.h"

namespace rodlqg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::vector<std::pair<std::string, Cell>> summary;
  std::vector<Table> tables;
  /// Files written verbatim (name, content), independent of --format.
  std::vector<std::pair<std::string, std::string>> files;
  bool golden_ok = true;
};

constexpr double kSpectrumTol = 1e-8;
constexpr double kDefaultNuMax = 10.0 * kPi;

std::string CellText(const Cell& c, bool table) {
  if (const double* d = std::get_if<double>(&c)) {
    return table ? FormatSignificant(*d) : FormatShortest(*d);
  }
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

json CellJson(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return FormatShortest(*d);
  }
  if (const long long* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

json TableJson(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = CellJson(r[c]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string RenderTable(const Table& t, OutputFormat fmt) {
  std::ostringstream os;
  if (fmt == OutputFormat::kJson) {
    os << TableJson(t).dump(2) << '\n';
    return os.str();
  }
  if (fmt == OutputFormat::kCsv) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      os << (c ? "," : "") << t.columns[c];
    }
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << CellText(r[c], false);
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(t.columns.size());
  std::vector<std::vector<std::string>> text;
  for (std::size_t c = 0; c < t.columns.size(); ++c) width[c] = t.columns[c].size();
  for (const auto& r : t.rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line.push_back(CellText(r[c], true));
      width[c] = std::max(width[c], line.back().size());
    }
    text.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << (c ? "  " : "") << std::string(width[c] - cells[c].size(), ' ') << cells[c];
    }
    os << '\n';
  };
  emit(t.columns);
  for (const auto& line : text) emit(line);
  return os.str();
}

Table SummaryTable(const Report& r) {
  Table t{"summary", {"key", "value"}, {}};
  for (const auto& [k, v] : r.summary) t.rows.push_back({k, v});
  return t;
}

std::string Extension(OutputFormat fmt) {
  switch (fmt) {
    case OutputFormat::kCsv: return ".csv";
    case OutputFormat::kJson: return ".json";
    case OutputFormat::kTable: return ".txt";
  }
  return ".txt";
}

void PrintReport(const JobSpec& job, const Report& r, std::ostream& out) {
  if (job.format == OutputFormat::kJson) {
    json doc = json::object();
    doc["command"] = job.command;
    json summary = json::object();
    for (const auto& [k, v] : r.summary) summary[k] = CellJson(v);
    doc["summary"] = std::move(summary);
    json tables = json::object();
    for (const auto& t : r.tables) tables[t.name] = TableJson(t);
    doc["tables"] = std::move(tables);
    out << doc.dump(2) << '\n';
    return;
  }
  const bool table = job.format == OutputFormat::kTable;
  for (const auto& [k, v] : r.summary) {
    out << (table ? "" : "# ") << k << (table ? ": " : "=") << CellText(v, table) << '\n';
  }
  for (const auto& t : r.tables) {
    out << '\n' << (table ? "== " : "# ") << t.name << (table ? " ==" : "") << '\n';
    out << RenderTable(t, job.format);
  }
}

// Writes every artifact or none: refuses to clobber without --force and
// removes what it created when a write fails.
void WriteArtifacts(const JobSpec& job, const Report& r) {
  if (job.output_dir.empty()) return;
  const fs::path dir(job.output_dir);
  std::vector<std::pair<fs::path, std::string>> targets;
  const std::string ext = Extension(job.format);
  targets.emplace_back(dir / ("summary" + ext), RenderTable(SummaryTable(r), job.format));
  for (const auto& t : r.tables) {
    targets.emplace_back(dir / (t.name + ext), RenderTable(t, job.format));
  }
  for (const auto& [name, content] : r.files) targets.emplace_back(dir / name, content);

  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw ValidationError("--out " + job.output_dir + ": not a directory");
  }
  if (!job.force) {
    for (const auto& [path, content] : targets) {
      if (fs::exists(path)) {
        throw ValidationError(path.string() + " exists; pass --force to overwrite");
      }
    }
  }
  const bool created_dir = !fs::exists(dir);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  try {
    for (const auto& [path, content] : targets) {
      const fs::path tmp = path.string() + ".partial";
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        written.push_back(tmp);
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + path.string());
      }
      fs::rename(tmp, path);
      written.back() = path;
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    if (created_dir) fs::remove(dir, ec);
    throw;
  }
}

int Modes(const JobSpec& job, int fallback) {
  return job.modes.value_or(fallback);
}

GainField GainsFor(const RodConfig& rod, int order) {
  return ComputeGainField(rod, SolveRiccatiDiagonal(rod, order));
}

Report Gains(const JobSpec& job, const LoadedConfig& cfg) {
  const RodConfig& rod = cfg.rod;
  const int n = Modes(job, 16);
  const DiagonalRiccati ric = SolveRiccatiDiagonal(rod, n);
  const GainField gains = ComputeGainField(rod, ric);
  Report r;
  r.summary = {{"order", static_cast<long long>(n)},
               {"q", rod.q},
               {"actuators", static_cast<long long>(rod.num_actuators())},
               {"tail_bound", ric.tail_bound}};
  Table p{"riccati", {"n", "gamma_nn", "P_nn"}, {}};
  for (int k = 0; k <= n; ++k) {
    p.rows.push_back({static_cast<long long>(k), ric.gamma[k], ric.p[k]});
  }
  Table g{"gain_field", {"n"}, {}};
  for (int a = 1; a <= rod.num_actuators(); ++a) g.columns.push_back("K_" + std::to_string(a));
  for (int k = 0; k <= n; ++k) {
    std::vector<Cell> row{static_cast<long long>(k)};
    for (int a = 0; a < rod.num_actuators(); ++a) row.emplace_back(gains.coeffs(a)[k]);
    g.rows.push_back(std::move(row));
  }
  r.tables = {std::move(p), std::move(g)};
  return r;
}

Table RootTable(const std::string& name, const SpectrumResult& s) {
  Table t{name, {"index", "nu", "eigenvalue", "residual", "multiplicity", "parity", "origin"}, {}};
  long long i = 0;
  for (const auto& root : s.roots) {
    t.rows.push_back({i++, root.nu, root.eigenvalue, root.residual,
                      static_cast<long long>(root.multiplicity),
                      static_cast<long long>(ReflectionParity(root)),
                      std::string(root.origin == RootOrigin::kDeterminant
                                      ? "determinant"
                                      : "mean_field")});
  }
  return t;
}

Report Spectrum(const JobSpec& job, const LoadedConfig& cfg) {
  const RodConfig& rod = cfg.rod;
  const int n = Modes(job, 128);
  const double nu_max = job.nu_max.value_or(kDefaultNuMax);
  const GainField gains = GainsFor(rod, n);
  const SpectrumResult s = FindSpectrum(rod, gains, nu_max, kSpectrumTol);
  const auto modal = SortedEigenvalues(ModalClosedLoopMatrix(rod, gains, n));
  Report r;
  r.summary = {{"order", static_cast<long long>(n)}, {"nu_max", nu_max},
               {"roots", static_cast<long long>(s.roots.size())}};
  if (!s.roots.empty()) {
    const double lead = s.roots.front().eigenvalue;
    r.summary.emplace_back("least_stable", lead);
    r.summary.emplace_back("modal_least_stable", modal.front().real());
    r.summary.emplace_back("relative_gap",
                           std::abs(modal.front().real() - lead) / std::abs(lead));
  }
  r.tables.push_back(RootTable("closed_loop_spectrum", s));
  Table m{"modal_eigenvalues", {"index", "real", "imag"}, {}};
  const std::size_t shown = std::min(modal.size(), std::max<std::size_t>(s.roots.size(), 8));
  for (std::size_t i = 0; i < shown; ++i) {
    m.rows.push_back({static_cast<long long>(i), modal[i].real(), modal[i].imag()});
  }
  r.tables.push_back(std::move(m));
  return r;
}

Report Filter(const JobSpec& job, const LoadedConfig& cfg) {
  const RodConfig& rod = cfg.rod;
  const FilterGains f = SolveFilterRiccati(rod);
  const double nu_max = job.nu_max.value_or(kDefaultNuMax);
  const SpectrumResult s = ErrorSpectrum(rod, f.l, nu_max, kSpectrumTol);
  Report r;
  double eta0 = 0.0;
  for (const auto& root : s.roots) {
    if (root.origin == RootOrigin::kMeanFieldZeroMode) eta0 = root.eigenvalue;
  }
  r.summary = {{"P00", f.p00}, {"decay0", f.decay0}, {"eta0", eta0},
               {"nu_max", nu_max}};
  Table g{"filter_gains", {"sensor", "zeta", "c", "d", "L"}, {}};
  for (int i = 0; i < rod.num_sensors(); ++i) {
    const auto& sn = rod.sensors[i];
    g.rows.push_back({static_cast<long long>(i + 1), sn.zeta, sn.c, sn.d, f.l[i]});
  }
  r.tables.push_back(std::move(g));
  r.tables.push_back(RootTable("error_spectrum", s));
  return r;
}

Report Simulate(const JobSpec& job, const LoadedConfig& cfg) {
  const RodConfig& rod = cfg.rod;
  SimConfig sim = cfg.sim.sim;
  if (job.modes) sim.order = *job.modes;
  if (job.seed) sim.seed = *job.seed;

  Interconnection wiring;
  const bool sensed = rod.num_sensors() > 0;
  wiring.feedback = cfg.sim.feedback.value_or(sensed ? FeedbackSource::kEstimate
                                                     : FeedbackSource::kState);
  if (wiring.feedback != FeedbackSource::kNone) wiring.gains = GainsFor(rod, sim.order);
  if (sensed) wiring.filter = SolveFilterRiccati(rod);

  const Trajectory traj = rodlqg::Simulate(rod, wiring, sim);
  const std::array<double, 2> window =
      cfg.sim.window.value_or(std::array<double, 2>{sim.horizon / 10.0, sim.horizon});

  Report r;
  r.summary = {{"order", static_cast<long long>(sim.order)},
               {"dt", sim.dt},
               {"t", sim.horizon},
               {"seed", std::to_string(sim.seed)},
               {"noise", std::string(sim.noise_enabled ? "on" : "off")},
               {"integrator", std::string(ToString(sim.integrator))},
               {"feedback", std::string(ToString(wiring.feedback))},
               {"filter", std::string(wiring.filter ? "on" : "off")},
               {"samples", static_cast<long long>(traj.size())},
               {"window_t0", window[0]},
               {"window_t1", window[1]},
               {"final_energy_z", traj.energy_z.back()},
               {"decay_rate_z", DecayRate(traj, Signal::kState, window[0], window[1])}};
  if (wiring.filter) {
    r.summary.emplace_back("final_energy_zerr", traj.energy_zerr.back());
    r.summary.emplace_back("decay_rate_zerr",
                           DecayRate(traj, Signal::kError, window[0], window[1]));
  }
  std::ostringstream csv;
  WriteTrajectoryCsv(traj, csv);
  r.files.emplace_back("trajectory.csv", csv.str());
  return r;
}

Report Audit(const JobSpec& job, const LoadedConfig& cfg) {
  const RodConfig& rod = cfg.rod;
  const int n = Modes(job, 32);
  if (n > 256) throw ValidationError("--modes: audit supports at most 256 modes");
  const DiagonalRiccati ric = SolveRiccatiDiagonal(rod, n);
  const Eigen::MatrixXd e = RiccatiResidual(rod, ric, n);
  const AreOracleResult exact = TruncatedAreOracle(rod, n, DeltaConvention::kOrthonormalExact);
  const AreOracleResult formal = TruncatedAreOracle(rod, n, DeltaConvention::kFormalExpansion);

  Table diag{"riccati_diagonal", {"n", "gamma_nn", "P_nn", "quadratic_root", "residual_nn"}, {}};
  for (int k = 0; k <= n; ++k) {
    const double a = static_cast<double>(k) * k * kPi * kPi;
    const double g = ric.gamma[k];
    const double root = g > 0.0 ? rod.q / (a + std::sqrt(a * a + g * rod.q)) : rod.q / (2.0 * a);
    diag.rows.push_back({static_cast<long long>(k), g, ric.p[k], root, e(k, k)});
  }
  Table res{"riccati_residual", {"n1", "n2", "residual"}, {}};
  Table cmp{"are_comparison",
            {"n1", "n2", "diagonal_ansatz", "oracle_orthonormal_exact",
             "oracle_formal_expansion", "diff_orthonormal_exact", "diff_formal_expansion"},
            {}};
  double off = 0.0, on = 0.0, d_exact = 0.0, d_formal = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      res.rows.push_back({static_cast<long long>(i), static_cast<long long>(j), e(i, j)});
      (i == j ? on : off) = std::max(i == j ? on : off, std::abs(e(i, j)));
      const double ansatz = i == j ? ric.p[i] : 0.0;
      const double de = exact.p_plain(i, j) - ansatz;
      const double df = formal.p_plain(i, j) - ansatz;
      d_exact = std::max(d_exact, std::abs(de));
      d_formal = std::max(d_formal, std::abs(df));
      cmp.rows.push_back({static_cast<long long>(i), static_cast<long long>(j), ansatz,
                          exact.p_plain(i, j), formal.p_plain(i, j), de, df});
    }
  }
  Report r;
  r.summary = {{"order", static_cast<long long>(n)},
               {"max_offdiagonal_residual", off},
               {"max_diagonal_residual", on},
               {"oracle_exact_iterations", static_cast<long long>(exact.iterations)},
               {"oracle_exact_residual", exact.residual},
               {"oracle_formal_iterations", static_cast<long long>(formal.iterations)},
               {"oracle_formal_residual", formal.residual},
               {"max_diff_orthonormal_exact", d_exact},
               {"max_diff_formal_expansion", d_formal}};
  r.tables = {std::move(diag), std::move(res), std::move(cmp)};
  return r;
}

struct Golden {
  Table table{"golden_checks", {"check", "value", "expected", "tolerance", "status"}, {}};
  bool ok = true;

  void Near(const std::string& name, double value, double expected, double tol) {
    const bool pass = std::abs(value - expected) <= tol;
    Add(name, value, expected, tol, pass);
  }
  void Add(const std::string& name, double value, double expected, double tol,
           bool pass) {
    ok = ok && pass;
    table.rows.push_back({name, value, expected, tol, std::string(pass ? "PASS" : "FAIL")});
  }
};

Report Example(const JobSpec& job) {
  const LoadedConfig cfg = ParseConfig(ExampleConfigJson(job.example_id),
                                       "example" + std::to_string(job.example_id));
  const RodConfig& rod = cfg.rod;
  Golden golden;
  Report r;
  if (job.example_id == 1 || job.example_id == 2) {
    const int n = Modes(job, 128);
    const DiagonalRiccati ric = SolveRiccatiDiagonal(rod, n);
    const GainField gains = ComputeGainField(rod, ric);
    const SpectrumResult s = FindSpectrum(rod, gains, kDefaultNuMax, kSpectrumTol);
    if (s.roots.empty()) throw NumericalError("no closed-loop roots found");
    if (job.example_id == 1) {
      const double p_ref[] = {1.4142, 0.1008, 0.0253, 0.0113, 0.0063, 0.0041};
      for (int k = 0; k <= 5; ++k) {
        golden.Near("P" + std::to_string(k) + std::to_string(k), ric.p[k], p_ref[k], 5e-5);
      }
      for (int k = 0; k < 4; ++k) {
        const double expected = (2 * k + 1) * kPi;
        double got = NAN;
        for (const auto& root : s.roots) {
          if (std::isnan(got) || std::abs(root.nu - expected) < std::abs(got - expected)) {
            got = root.nu;
          }
        }
        golden.Near("nearest_nu_" + std::to_string(k), got, expected, 1e-6);
      }
      golden.Near("least_stable", s.roots.front().eigenvalue, -kPi * kPi,
                  2.0 * kPi * 1e-6);
    } else {
      const double gamma_ref[] = {6.0, 2.0, 6.0, 2.0};
      for (int k = 0; k < 4; ++k) {
        golden.Near("gamma_" + std::to_string(k), ric.gamma[k], gamma_ref[k], 1e-12);
      }
      golden.Near("least_stable_nu", s.roots.front().nu, 2.0 * kPi, 1e-6);
      golden.Near("least_stable", s.roots.front().eigenvalue, -4.0 * kPi * kPi,
                  4.0 * kPi * 1e-6);
    }
    r.summary = {{"example", static_cast<long long>(job.example_id)},
                 {"least_stable", s.roots.front().eigenvalue}};
    r.tables.push_back(RootTable("closed_loop_spectrum", s));
  } else {
    const FilterGains f = SolveFilterRiccati(rod);
    const SpectrumResult s = ErrorSpectrum(rod, f.l, 4.0 * kPi, kSpectrumTol);
    const double half = std::sqrt(2.0) / 2.0;
    golden.Near("P00", f.p00, half, 1e-12);
    for (int i = 0; i < f.num_sensors(); ++i) {
      golden.Near("L" + std::to_string(i + 1), f.l[i], half, 1e-12);
    }
    double eta0 = NAN;
    for (const auto& root : s.roots) {
      if (root.origin == RootOrigin::kMeanFieldZeroMode) eta0 = root.eigenvalue;
    }
    golden.Near("eta0", eta0, -std::sqrt(2.0), 1e-12);
    const auto sym = SensedSymmetricRoots(s, rod);
    const double tau = sym.empty() ? NAN : sym.front().nu;
    golden.Add("tau1_in_(0,2)", tau, 1.0, 1.0, tau > 0.0 && tau < 2.0);
    const double sigma = tau / 4.0;
    const double resid = std::abs(sigma - std::sqrt(2.0) / 16.0 / std::tan(sigma));
    golden.Add("sigma1_residual", resid, 0.0, 1e-10, resid < 1e-10);
    r.summary = {{"example", 3LL}, {"P00", f.p00}, {"eta0", eta0}, {"tau1", tau}};
    r.tables.push_back(RootTable("error_spectrum", s));
  }
  r.summary.emplace_back("status", std::string(golden.ok ? "PASS" : "FAIL"));
  r.golden_ok = golden.ok;
  r.tables.insert(r.tables.begin(), std::move(golden.table));
  return r;
}

}  // namespace

int Run(const JobSpec& job, std::ostream& out, std::ostream& err) {
  try {
    Report report;
    if (job.command == "example") {
      if (job.example_id < 1 || job.example_id > 3) {
        throw ValidationError("example: id must be 1, 2 or 3");
      }
      report = Example(job);
    } else {
      if (job.config_path.empty()) {
        throw ValidationError(job.command + ": --config is required");
      }
      if (job.modes && (*job.modes < 0 || *job.modes > 4096)) {
        throw ValidationError("--modes: expected 0..4096");
      }
      const LoadedConfig cfg = LoadConfig(job.config_path, job.overrides);
      if (job.command == "gains") {
        report = Gains(job, cfg);
      } else if (job.command == "spectrum") {
        report = Spectrum(job, cfg);
      } else if (job.command == "filter") {
        report = Filter(job, cfg);
      } else if (job.command == "simulate") {
        report = Simulate(job, cfg);
      } else if (job.command == "audit") {
        report = Audit(job, cfg);
      } else {
        throw ValidationError("unknown command '" + job.command + "'");
      }
    }
    WriteArtifacts(job, report);
    PrintReport(job, report, out);
    return report.golden_ok ? kExitOk : kExitNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int RunCommandLine(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LQR/LQG synthesis and simulation for a heated rod"};
  JobSpec job;
  std::optional<int> example_id;
  app.add_option("command", job.command, "gains | spectrum | filter | simulate | audit | example")
      ->required()
      ->check(CLI::IsMember({"gains", "spectrum", "filter", "simulate", "audit", "example"}));
  app.add_option("id", example_id, "example id (1, 2 or 3)");
  app.add_option("--config", job.config_path, "problem description (JSON)");
  app.add_option("--out", job.output_dir, "directory for artifacts");
  const std::map<std::string, OutputFormat> formats{
      {"table", OutputFormat::kTable}, {"csv", OutputFormat::kCsv}, {"json", OutputFormat::kJson}};
  app.add_option("--format", job.format, "output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(
          "{table,csv,json}"));
  app.add_option("--set", job.overrides, "override a config field, key=value")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--seed", job.seed, "simulation seed");
  app.add_option("--modes", job.modes, "modal truncation order N");
  app.add_option("--nu-max", job.nu_max, "upper end of the frequency scan");
  app.add_flag("--force", job.force, "overwrite existing artifacts");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }
  if (job.command == "example") {
    if (!example_id) {
      err << "error: example needs an id (1, 2 or 3)\n";
      return kExitValidation;
    }
    job.example_id = *example_id;
  } else if (example_id) {
    err << "error: unexpected argument after " << job.command << '\n';
    return kExitValidation;
  }
  return Run(job, out, err);
}

}  // namespace rodlqg
