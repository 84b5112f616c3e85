#include "rayleigh/cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rayleigh::cli {

using nlohmann::json;

namespace {

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

// JSON has no encoding for non-finite numbers.
json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json vector_json(const Eigen::VectorXd& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(number(x[i]));
  return out;
}

template <class T, class F>
json section_json(const AuditSection<T>& section, F&& body) {
  json out = json::object();
  if (section.result) out = body(*section.result);
  out["error"] = section.error.empty() ? json(nullptr) : json(section.error);
  out["computed"] = section.result.has_value();
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::vector<std::string> trajectory_columns(std::size_t dof) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= dof; ++i) cols.push_back("q" + std::to_string(i));
  for (std::size_t i = 1; i <= dof; ++i) cols.push_back("v" + std::to_string(i));
  for (const char* name : {"H", "T", "V", "D", "R", "W"}) cols.emplace_back(name);
  return cols;
}

std::vector<double> trajectory_row(const Sample& s) {
  std::vector<double> row{s.state.t};
  for (Eigen::Index i = 0; i < s.state.q.size(); ++i) row.push_back(s.state.q[i]);
  for (Eigen::Index i = 0; i < s.state.v.size(); ++i) row.push_back(s.state.v[i]);
  const Diagnostics& d = s.diag;
  row.insert(row.end(), {d.H, d.T_kin, d.V_pot, d.D_val, d.R_val, d.W});
  return row;
}

void write_csv(const Trajectory& traj, std::size_t dof, std::ostream& out) {
  const auto cols = trajectory_columns(dof);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& s : traj.samples) {
    const auto row = trajectory_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

void write_jsonl(const Trajectory& traj, std::ostream& out) {
  for (const auto& s : traj.samples) {
    const Diagnostics& d = s.diag;
    json line = {{"t", s.state.t},     {"q", to_vector(s.state.q)}, {"v", to_vector(s.state.v)},
                 {"H", number(d.H)},   {"T", number(d.T_kin)},      {"V", number(d.V_pot)},
                 {"D", number(d.D_val)}, {"R", number(d.R_val)},    {"W", number(d.W)}};
    out << line.dump() << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  std::stringstream header(line);
  for (std::string cell; std::getline(header, cell, ',');) table.header.push_back(cell);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(x);
    }
    if (row.size() != table.header.size())
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(table.header.size()) + " values");
    table.rows.push_back(std::move(row));
  }
  return table;
}

json check_report_json(const CheckReport& r) {
  json out = {{"check", r.check},
              {"pass", r.pass},
              {"worst", number(r.worst)},
              {"samples", r.samples},
              {"detail", r.detail}};
  if (r.witness)
    out["witness"] = {{"q", vector_json(r.witness->q)}, {"v", vector_json(r.witness->v)}};
  else
    out["witness"] = nullptr;
  if (!r.by_lambda.empty()) {
    json lambdas = json::array();
    for (const auto& [lambda, violation] : r.by_lambda)
      lambdas.push_back({{"lambda", lambda}, {"max_relative_violation", number(violation)}});
    out["by_lambda"] = lambdas;
  }
  return out;
}

json audit_json(const AuditReport& report) {
  json out = json::object();
  out["pass"] = report.pass();

  out["energy_balance"] = section_json(report.energy_balance, [](const EnergyBalanceResult& r) {
    return json{{"max_defect", number(r.max_defect)},
                {"H0", number(r.H0)},
                {"threshold", number(r.threshold)},
                {"rule", r.rule},
                {"pass", r.pass}};
  });
  out["euler_identity"] = section_json(report.euler_identity, check_report_json);
  out["positivity"] = section_json(report.positivity, check_report_json);
  out["stationarity"] = section_json(report.stationarity, [](const StationaritySummary& s) {
    json samples = json::array();
    for (const auto& r : s.samples) {
      json probes = json::array();
      for (const auto& p : r.probe_deltas)
        probes.push_back({{"norm", p.norm},
                          {"reduced_change", number(p.reduced_change)},
                          {"curvature", number(p.curvature)}});
      samples.push_back({{"index", r.index},
                         {"t", r.state.t},
                         {"q", vector_json(r.state.q)},
                         {"v", vector_json(r.state.v)},
                         {"frozen_force", vector_json(r.frozen_force)},
                         {"gradient_residual", vector_json(r.gradient_residual)},
                         {"residual_norm", number(r.residual_norm)},
                         {"residual_threshold", number(r.residual_threshold)},
                         {"spacing", r.spacing},
                         {"probe_deltas", probes},
                         {"slopes", r.slopes},
                         {"growth", std::string(growth_status_name(r.growth))},
                         {"note", r.note},
                         {"pass", r.pass()}});
    }
    return json{{"max_gradient_residual", number(s.max_gradient_residual)},
                {"quadratic_growth_verified", s.quadratic_growth_verified},
                {"pass", s.pass},
                {"samples", samples}};
  });
  if (report.conservative_limit) {
    out["conservative_limit"] =
        section_json(*report.conservative_limit, [](const ConservativeLimitResult& r) {
          return json{{"H_drift", number(r.H_drift)},
                      {"threshold", number(r.threshold)},
                      {"pass", r.pass}};
        });
  } else {
    out["conservative_limit"] = nullptr;
  }
  const AuditTolerances& t = report.tolerances;
  out["tolerances"] = {{"energy", t.energy},
                       {"euler", t.euler},
                       {"residual", t.residual},
                       {"residual_spacing", t.residual_spacing},
                       {"slope_min", t.slope_min},
                       {"slope_max", t.slope_max},
                       {"conservative", t.conservative},
                       {"probes", t.probes},
                       {"check_samples", t.check_samples},
                       {"seed", t.seed}};
  return out;
}

std::filesystem::path audit_path_for(const std::filesystem::path& trajectory) {
  std::filesystem::path p = trajectory;
  p.replace_extension(".audit.json");
  return p;
}

std::filesystem::path plot_dir_for(const std::filesystem::path& trajectory) {
  std::filesystem::path p = trajectory;
  p.replace_extension();
  p += "_plot";
  return p;
}

void write_trajectory(const Trajectory& traj, std::size_t dof,
                      const std::filesystem::path& path, OutputFormat format) {
  std::ofstream out = open_out(path);
  if (format == OutputFormat::csv)
    write_csv(traj, dof, out);
  else
    write_jsonl(traj, out);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_plot_data(const Trajectory& traj, std::size_t dof,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto cols = trajectory_columns(dof);
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.size());
  for (const auto& s : traj.samples) rows.push_back(trajectory_row(s));
  for (std::size_t c = 1; c < cols.size(); ++c) {
    std::ofstream out = open_out(dir / (cols[c] + ".dat"));
    out << "# t " << cols[c] << '\n';
    for (const auto& row : rows) out << format_double(row[0]) << ' ' << format_double(row[c]) << '\n';
  }
}

}  // namespace rayleigh::cli
