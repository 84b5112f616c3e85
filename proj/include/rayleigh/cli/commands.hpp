#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rayleigh/audit.hpp"
#include "rayleigh/cli/config.hpp"
#include "rayleigh/dynamics.hpp"

namespace rayleigh::cli {

// Process exit codes. No command returns anything else.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAuditFailed = 2 };

struct SimulateOptions {
  std::optional<double> t_end;
  std::optional<std::filesystem::path> out;
  std::optional<OutputFormat> format;
  bool plot_data = false;
};

struct SimulationRun {
  Trajectory trajectory;
  AuditReport audit;
};

// Integrates and audits without touching the filesystem.
SimulationRun run_simulation(const RunConfig& cfg);

// Library errors propagate; the caller maps them to kExitError.
int cmd_simulate(RunConfig cfg, const SimulateOptions& options, std::ostream& out);
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_derive_r(const RunConfig& cfg, const std::vector<double>& q,
                 const std::vector<double>& v, std::ostream& out);

struct SweepOptions {
  std::string param;
  std::vector<double> values;
  unsigned jobs = 0;  // 0: hardware concurrency
  std::optional<std::filesystem::path> out;
  std::optional<OutputFormat> format;
};

// "run.csv", "c", 1 -> "run_c_1.csv"
std::filesystem::path sweep_run_path(const std::filesystem::path& base,
                                     const std::string& param, std::size_t index);
// "run.csv" -> "run_sweep.csv"
std::filesystem::path sweep_summary_path(const std::filesystem::path& base);

int cmd_sweep(const RunConfig& cfg, const SweepOptions& options, std::ostream& out);

}  // namespace rayleigh::cli
