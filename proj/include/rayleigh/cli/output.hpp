#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rayleigh/audit.hpp"
#include "rayleigh/cli/config.hpp"
#include "rayleigh/dynamics.hpp"

namespace rayleigh::cli {

// Shortest text that parses back to exactly `x`.
std::string format_double(double x);

// t,q1..qm,v1..vm,H,T,V,D,R,W
std::vector<std::string> trajectory_columns(std::size_t dof);

// Row values in trajectory_columns order.
std::vector<double> trajectory_row(const Sample& s);

void write_csv(const Trajectory& traj, std::size_t dof, std::ostream& out);
void write_jsonl(const Trajectory& traj, std::ostream& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Numeric CSV with a header line. Throws std::runtime_error on malformed rows.
CsvTable read_csv(std::istream& in);

nlohmann::json check_report_json(const CheckReport& r);
nlohmann::json audit_json(const AuditReport& report);

// "run.csv" -> "run.audit.json"
std::filesystem::path audit_path_for(const std::filesystem::path& trajectory);
// "run.csv" -> "run_plot/"
std::filesystem::path plot_dir_for(const std::filesystem::path& trajectory);

// Writes the trajectory in the configured format, creating parent
// directories as needed.
void write_trajectory(const Trajectory& traj, std::size_t dof,
                      const std::filesystem::path& path, OutputFormat format);

// One two-column "t value" file per trajectory column other than t.
void write_plot_data(const Trajectory& traj, std::size_t dof,
                     const std::filesystem::path& dir);

}  // namespace rayleigh::cli
