#include "rayleigh/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "rayleigh/checks.hpp"
#include "rayleigh/dissipation.hpp"
#include "rayleigh/cli/output.hpp"
#include "rayleigh/random.hpp"

namespace rayleigh::cli {

namespace {

std::string vector_text(const Eigen::VectorXd& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

Eigen::VectorXd to_eigen(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

const char* verdict(bool pass) { return pass ? "pass" : "FAIL"; }

template <class T>
std::string section_line(const char* name, const AuditSection<T>& s, bool pass,
                         const std::string& figure) {
  std::ostringstream line;
  line << "  " << std::left << std::setw(20) << name;
  if (!s.error.empty())
    line << "ERROR  " << s.error;
  else
    line << std::setw(7) << verdict(pass) << figure;
  return line.str();
}

void print_audit(const AuditReport& a, std::ostream& out) {
  out << "audit: " << (a.pass() ? "PASS" : "FAIL") << '\n';
  const auto& eb = a.energy_balance;
  out << section_line("energy_balance", eb, eb.result && eb.result->pass,
                      eb.result ? "max defect " + format_double(eb.result->max_defect) : "")
      << '\n';
  const auto& eu = a.euler_identity;
  out << section_line("euler_identity", eu, eu.result && eu.result->pass,
                      eu.result ? "worst " + format_double(eu.result->worst) : "")
      << '\n';
  const auto& po = a.positivity;
  out << section_line("positivity", po, po.result && po.result->pass,
                      po.result ? "min D " + format_double(po.result->worst) : "")
      << '\n';
  const auto& st = a.stationarity;
  std::string figure;
  if (st.result)
    figure = "max residual " + format_double(st.result->max_gradient_residual) +
             (st.result->quadratic_growth_verified ? ", quadratic growth verified" : "");
  out << section_line("stationarity", st, st.result && st.result->pass, figure) << '\n';
  if (a.conservative_limit) {
    const auto& cl = *a.conservative_limit;
    out << section_line("conservative_limit", cl, cl.result && cl.result->pass,
                        cl.result ? "H drift " + format_double(cl.result->H_drift) : "")
        << '\n';
  }
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

SimulationRun run_simulation(const RunConfig& cfg) {
  Trajectory traj = integrate(cfg.system, cfg.initial, cfg.t_end, cfg.integrator);
  AuditReport report = full_audit(cfg.system, traj, cfg.audit);
  return {std::move(traj), std::move(report)};
}

int cmd_simulate(RunConfig cfg, const SimulateOptions& options, std::ostream& out) {
  if (options.t_end) {
    if (!(*options.t_end > cfg.initial.t))
      throw ConfigError("--t-end", "must exceed the initial time");
    cfg.t_end = *options.t_end;
  }
  if (options.out) cfg.output.path = *options.out;
  if (options.format) cfg.output.format = *options.format;
  if (options.plot_data) cfg.output.plot_data = true;

  const SimulationRun run = run_simulation(cfg);
  const std::size_t dof = cfg.system.dof();
  write_trajectory(run.trajectory, dof, cfg.output.path, cfg.output.format);
  const auto audit_path = audit_path_for(cfg.output.path);
  write_json(audit_json(run.audit), audit_path);

  out << "trajectory: " << cfg.output.path.string() << " (" << run.trajectory.size()
      << " samples, " << method_name(run.trajectory.method) << ", "
      << run.trajectory.steps_taken << " steps";
  if (run.trajectory.steps_rejected) out << ", " << run.trajectory.steps_rejected << " rejected";
  out << ")\n";
  out << "final state: t=" << format_double(run.trajectory.samples.back().state.t)
      << " q=" << vector_text(run.trajectory.samples.back().state.q)
      << " v=" << vector_text(run.trajectory.samples.back().state.v) << '\n';
  if (cfg.output.plot_data) {
    const auto dir = plot_dir_for(cfg.output.path);
    write_plot_data(run.trajectory, dof, dir);
    out << "plot data: " << dir.string() << '\n';
  }
  out << "audit report: " << audit_path.string() << '\n';
  print_audit(run.audit, out);
  return run.audit.pass() ? kExitOk : kExitAuditFailed;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const SystemSpec& sys = cfg.system;
  const DissipationSpec& spec = sys.dissipation();
  const std::size_t samples = cfg.audit.check_samples;
  const std::uint64_t seed = cfg.audit.seed;
  bool all = true;

  out << std::left << std::setw(16) << "check" << std::setw(6) << "term" << std::setw(8)
      << "degree" << std::setw(8) << "result" << "worst\n";
  auto row = [&](const std::string& check, const std::string& term, const std::string& degree,
                 const CheckReport& r, const std::string& worst_label) {
    all = all && r.pass;
    out << std::setw(16) << check << std::setw(6) << term << std::setw(8) << degree
        << std::setw(8) << verdict(r.pass) << worst_label << format_double(r.worst) << '\n';
    if (!r.pass && !r.detail.empty()) out << "    " << r.detail << '\n';
    if (!r.pass && r.witness)
      out << "    witness q=" << vector_text(r.witness->q) << " v=" << vector_text(r.witness->v)
          << '\n';
  };

  if (spec.mode() == DissipationMode::homogeneous_sum) {
    for (std::size_t i = 0; i < spec.terms().size(); ++i) {
      const auto& term = spec.terms()[i];
      const CheckReport r = homogeneity_check(sys, term, samples, seed);
      row("homogeneity", std::to_string(i + 1), format_double(term.degree), r, "");
      if (!r.pass)
        for (const auto& [lambda, violation] : r.by_lambda)
          out << "    lambda=" << format_double(lambda) << " violation "
              << format_double(violation) << '\n';
    }
  }
  row("positivity", "-", "-", positivity_scan(sys, samples, seed), "min D ");
  row("euler_identity", "-", "-", euler_identity_check(sys, samples, seed, cfg.audit.euler), "");

  // R/D measured by quadrature of the potential integral, independently of
  // the declared degree.
  SplitMix64 rng(seed);
  std::optional<SampledState> probe;
  for (std::size_t i = 0; i < samples && !probe; ++i) {
    SampledState st = sample_state(rng, sys.dof());
    if (eval_D(spec, EvalContext(st.q, st.v, sys.params())) > 1e-10) probe = std::move(st);
  }
  if (probe) {
    const EvalContext ctx(probe->q, probe->v, sys.params());
    if (spec.mode() == DissipationMode::homogeneous_sum) {
      for (std::size_t i = 0; i < spec.terms().size(); ++i) {
        const auto& term = spec.terms()[i];
        try {
          const SystemSpec single = sys.with_dissipation(DissipationSpec::general(term.expr));
          const double d = eval(single.dissipation().raw(), ctx);
          if (!(d > 1e-10)) continue;
          const double r = eval_R_quadrature(single.dissipation(), ctx).value;
          out << "term " << i + 1 << ": degree " << format_double(term.degree) << ", R/D "
              << format_double(r / d) << " (1/n = " << format_double(1.0 / term.degree)
              << ")\n";
        } catch (const Error& e) {
          out << "term " << i + 1 << ": R/D unavailable: " << e.what() << '\n';
        }
      }
    }
    out << "R/D at q=" << vector_text(probe->q) << " v=" << vector_text(probe->v) << ": "
        << format_double(eval_R(spec, ctx) / eval_D(spec, ctx)) << '\n';
  }
  out << (all ? "all checks pass" : "some checks FAILED") << '\n';
  return all ? kExitOk : kExitError;
}

int cmd_derive_r(const RunConfig& cfg, const std::vector<double>& q_in,
                 const std::vector<double>& v_in, std::ostream& out) {
  const SystemSpec& sys = cfg.system;
  const std::size_t dof = sys.dof();
  if (q_in.size() != dof)
    throw ConfigError("--q", "expected " + std::to_string(dof) + " values");
  if (v_in.size() != dof)
    throw ConfigError("--v", "expected " + std::to_string(dof) + " values");
  const Eigen::VectorXd q = to_eigen(q_in);
  const Eigen::VectorXd v = to_eigen(v_in);
  const DissipationSpec& spec = sys.dissipation();
  const EvalContext ctx(q, v, sys.params());
  const std::string where = " at q=" + vector_text(q) + " v=" + vector_text(v);

  try {
    out << "state: q=" << vector_text(q) << " v=" << vector_text(v) << '\n';
    out << "mode: "
        << (spec.mode() == DissipationMode::homogeneous_sum ? "homogeneous_sum" : "general")
        << '\n';
    if (spec.mode() == DissipationMode::homogeneous_sum) {
      out << std::left << std::setw(6) << "term" << std::setw(24) << "D_n" << std::setw(10)
          << "degree" << "D_n/n" << '\n';
      for (std::size_t i = 0; i < spec.terms().size(); ++i) {
        const auto& term = spec.terms()[i];
        const double d = eval(term.expr, ctx);
        out << std::setw(6) << i + 1 << std::setw(24) << format_double(d) << std::setw(10)
            << format_double(term.degree) << format_double(d / term.degree) << "   "
            << term.expr.to_string() << '\n';
      }
    } else {
      out << "D = " << spec.raw().to_string() << '\n';
    }
    const double R = eval_R(spec, ctx);
    const double D = eval_D(spec, ctx);
    out << "R = " << format_double(R) << '\n';
    out << "D = " << format_double(D) << '\n';
    out << "R/D = " << (D != 0.0 ? format_double(R / D) : std::string("undefined (D = 0)"))
        << '\n';
    out << "dR/dv = " << vector_text(grad_R_v(spec, ctx)) << '\n';
    if (spec.mode() == DissipationMode::general) {
      const QuadratureResult qr = eval_R_quadrature(spec, ctx);
      out << "quadrature: value " << format_double(qr.value) << ", " << qr.panels
          << " panels x " << spec.quadrature().node_count << " nodes, refinement change "
          << format_double(qr.refinement_change) << (qr.warning ? " (accuracy warning)" : "")
          << '\n';
      for (const auto& [panels, value] : qr.evidence)
        out << "  panels " << panels << ": " << format_double(value) << '\n';
    }
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + where);
  }
  return kExitOk;
}

std::filesystem::path sweep_run_path(const std::filesystem::path& base,
                                     const std::string& param, std::size_t index) {
  std::filesystem::path p = base;
  const auto ext = p.extension();
  p.replace_extension();
  p += "_" + param + "_" + std::to_string(index);
  p += ext;
  return p;
}

std::filesystem::path sweep_summary_path(const std::filesystem::path& base) {
  std::filesystem::path p = base;
  p.replace_extension();
  p += "_sweep.csv";
  return p;
}

int cmd_sweep(const RunConfig& cfg, const SweepOptions& options, std::ostream& out) {
  if (!cfg.system.params().contains(options.param))
    throw ConfigError("--param", "unknown parameter '" + options.param + "'");
  if (options.values.empty()) throw ConfigError("--values", "no values given");

  const std::filesystem::path base = options.out.value_or(cfg.output.path);
  const OutputFormat format = options.format.value_or(cfg.output.format);
  const std::size_t n = options.values.size();

  struct Outcome {
    std::optional<State> final_state;
    double max_defect = 0.0;
    bool audit_pass = false;
    std::string error;
    std::filesystem::path path;
  };
  std::vector<Outcome> outcomes(n);

  auto run_one = [&](std::size_t i) {
    Outcome& o = outcomes[i];
    o.path = sweep_run_path(base, options.param, i);
    try {
      RunConfig run_cfg = cfg;
      ParamTable one;
      one.set(options.param, options.values[i]);
      apply_overrides(run_cfg, one);
      const SimulationRun run = run_simulation(run_cfg);
      write_trajectory(run.trajectory, run_cfg.system.dof(), o.path, format);
      write_json(audit_json(run.audit), audit_path_for(o.path));
      o.final_state = run.trajectory.samples.back().state;
      if (run.audit.energy_balance.result)
        o.max_defect = run.audit.energy_balance.result->max_defect;
      o.audit_pass = run.audit.pass();
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  };

  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) run_one(i);
    });
  for (auto& t : workers) t.join();

  const auto summary = sweep_summary_path(base);
  if (summary.has_parent_path()) std::filesystem::create_directories(summary.parent_path());
  std::ofstream csv(summary, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write '" + summary.string() + "'");
  const std::size_t dof = cfg.system.dof();
  csv << "param,value,status,t";
  for (std::size_t j = 1; j <= dof; ++j) csv << ",q" << j;
  for (std::size_t j = 1; j <= dof; ++j) csv << ",v" << j;
  csv << ",max_energy_defect,trajectory,error\n";

  int code = kExitOk;
  for (std::size_t i = 0; i < n; ++i) {
    const Outcome& o = outcomes[i];
    const char* status = !o.error.empty() ? "error" : o.audit_pass ? "ok" : "audit_failed";
    csv << options.param << ',' << format_double(options.values[i]) << ',' << status;
    if (o.final_state) {
      csv << ',' << format_double(o.final_state->t);
      for (Eigen::Index j = 0; j < o.final_state->q.size(); ++j)
        csv << ',' << format_double(o.final_state->q[j]);
      for (Eigen::Index j = 0; j < o.final_state->v.size(); ++j)
        csv << ',' << format_double(o.final_state->v[j]);
      csv << ',' << format_double(o.max_defect) << ',' << o.path.string() << ',';
    } else {
      csv << std::string(2 * dof + 4, ',');
    }
    csv << (o.error.empty() ? "" : csv_quote(o.error)) << '\n';

    out << options.param << "=" << format_double(options.values[i]) << ": " << status;
    if (o.error.empty())
      out << ", max energy defect " << format_double(o.max_defect) << " -> " << o.path.string();
    else
      out << ": " << o.error;
    out << '\n';
    if (!o.error.empty())
      code = kExitError;
    else if (!o.audit_pass && code == kExitOk)
      code = kExitAuditFailed;
  }
  out << "summary: " << summary.string() << '\n';
  return code;
}

}  // namespace rayleigh::cli
