#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rayleigh/cli/builtins.hpp"
#include "rayleigh/cli/commands.hpp"
#include "rayleigh/cli/config.hpp"

namespace {

using namespace rayleigh::cli;

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "run configuration (JSON)")->required();
  cmd->add_option("--set", common.sets, "parameter override name=value (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
}

RunConfig load(const Common& common, bool check_homogeneity = true) {
  LoadOptions options;
  options.check_homogeneity = check_homogeneity;
  RunConfig cfg = load_config(common.config, options);
  apply_overrides(cfg, parse_assignments(common.sets), options);
  return cfg;
}

const std::map<std::string, OutputFormat> kFormats{{"csv", OutputFormat::csv},
                                                   {"jsonl", OutputFormat::jsonl}};

CLI::Option* add_format(CLI::App* cmd, std::string& target) {
  return cmd->add_option("--format", target, "csv or jsonl")
      ->transform(CLI::IsMember({"csv", "jsonl"}, CLI::ignore_case).description(""))
      ->option_text("csv|jsonl");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and audit mechanical systems with Rayleigh dissipation"};
  app.require_subcommand(1);
  app.footer("builtin systems: sho, damped_sho, quad_drag_particle, coulomb_block, "
             "pendulum_drag_2dof\nexit codes: 0 success, 1 error, 2 audit failure");

  Common sim_common;
  SimulateOptions sim;
  std::string sim_out;
  double sim_t_end = 0.0;
  std::string sim_format;
  unsigned sim_jobs = 0;
  auto* simulate = app.add_subcommand("simulate", "integrate, write the trajectory and audit it");
  add_common(simulate, sim_common);
  auto* t_end_opt = simulate->add_option("--t-end", sim_t_end, "final time");
  auto* out_opt = simulate->add_option("--out", sim_out, "trajectory output path");
  auto* format_opt = add_format(simulate, sim_format);
  simulate->add_flag("--plot-data", sim.plot_data, "write per-column series files");
  simulate->add_option("--jobs", sim_jobs, "accepted for symmetry with sweep; unused");

  Common check_common;
  auto* check = app.add_subcommand("check", "static checks of the dissipation model");
  add_common(check, check_common);

  Common derive_common;
  std::vector<double> derive_q;
  std::vector<double> derive_v;
  auto* derive = app.add_subcommand("derive-r", "evaluate R and its pieces at one state");
  add_common(derive, derive_common);
  derive->add_option("--q", derive_q, "coordinates a,b,...")->required()->delimiter(',');
  derive->add_option("--v", derive_v, "velocities a,b,...")->required()->delimiter(',');

  Common sweep_common;
  SweepOptions sweep_opts;
  std::string sweep_out;
  std::string sweep_format;
  auto* sweep = app.add_subcommand("sweep", "simulate once per parameter value");
  add_common(sweep, sweep_common);
  sweep->add_option("--param", sweep_opts.param, "parameter to vary")->required();
  sweep->add_option("--values", sweep_opts.values, "values v1,v2,...")
      ->required()
      ->delimiter(',');
  sweep->add_option("--jobs", sweep_opts.jobs, "worker threads (default: all cores)");
  auto* sweep_out_opt = sweep->add_option("--out", sweep_out, "base output path");
  auto* sweep_format_opt = add_format(sweep, sweep_format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (simulate->parsed()) {
      if (*t_end_opt) sim.t_end = sim_t_end;
      if (*out_opt) sim.out = sim_out;
      if (*format_opt) sim.format = kFormats.at(sim_format);
      return cmd_simulate(load(sim_common), sim, std::cout);
    }
    if (check->parsed()) return cmd_check(load(check_common, false), std::cout);
    if (derive->parsed())
      return cmd_derive_r(load(derive_common), derive_q, derive_v, std::cout);
    if (sweep->parsed()) {
      if (*sweep_out_opt) sweep_opts.out = sweep_out;
      if (*sweep_format_opt) sweep_opts.format = kFormats.at(sweep_format);
      return cmd_sweep(load(sweep_common), sweep_opts, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
