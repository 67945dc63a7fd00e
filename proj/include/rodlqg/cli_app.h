#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rodlqg {

enum class OutputFormat { kTable, kCsv, kJson };

struct JobSpec {
  std::string command;  ///< gains, spectrum, filter, simulate, audit, example
  int example_id = 0;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;  ///< empty: print only
  OutputFormat format = OutputFormat::kTable;
  std::optional<std::uint64_t> seed;
  std::optional<int> modes;
  std::optional<double> nu_max;
  bool force = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Executes one job. Results go to `out`, diagnostics to `err`; files are
/// written under output_dir. On failure every file this job created is
/// removed.
int Run(const JobSpec& job, std::ostream& out, std::ostream& err);

/// Parses the command line and calls Run.
int RunCommandLine(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rodlqg
