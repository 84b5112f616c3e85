// Acceptance gate: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "expression_corpus.hpp"
#include "rayleigh/audit.hpp"
#include "rayleigh/cli/builtins.hpp"
#include "rayleigh/cli/commands.hpp"
#include "rayleigh/cli/config.hpp"
#include "rayleigh/cli/output.hpp"
#include "rayleigh/dissipation.hpp"
#include "rayleigh/random.hpp"
#include "support.hpp"

namespace {

using namespace rayleigh;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double runtime_limit;  // seconds
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

IntegratorConfig rk45(double rel_tol) {
  IntegratorConfig cfg;
  cfg.method = Method::rk45;
  cfg.rel_tol = rel_tol;
  return cfg;
}

IntegratorConfig rk4(double dt) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  return cfg;
}

std::vector<SystemSpec> builtin_systems() {
  std::vector<SystemSpec> out;
  for (const auto& b : cli::builtin_catalog()) out.push_back(b.make());
  return out;
}

Outcome homogeneity_corollary() {
  double worst = 0.0;
  int systems = 0;
  for (const SystemSpec& sys : builtin_systems()) {
    const auto& terms = sys.dissipation().terms();
    if (terms.size() != 1) continue;
    ++systems;
    const double n = terms[0].degree;
    SplitMix64 rng(1);
    for (int i = 0; i < 100; ++i) {
      const SampledState s = sample_state(rng, sys.dof());
      const EvalContext ctx(s.q, s.v, sys.params());
      const double D = eval_D(sys.dissipation(), ctx);
      if (D <= 1e-10) continue;
      worst = std::max(worst, std::abs(eval_R(sys.dissipation(), ctx) / D - 1.0 / n) * n);
    }
  }
  return {systems == 4 && worst <= 1e-12,
          std::to_string(systems) + " systems, max rel err " + fmt(worst) + " (<= 1e-12)"};
}

Outcome sum_rule() {
  const double c2 = 0.7;
  const double c3 = 1.3;
  const SystemSpec sys(1, {parse("1")}, parse("0"),
                       DissipationSpec::homogeneous_sum(
                           {{parse("c2*v1^2"), 2.0, {}}, {parse("c3*abs(v1)^3"), 3.0, {}}}),
                       testing::params({{"c2", c2}, {"c3", c3}}));
  double worst = 0.0;
  SplitMix64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const SampledState s = sample_state(rng, 1);
    const double v = s.v[0];
    const double termwise = c2 * v * v / 2 + c3 * std::pow(std::abs(v), 3) / 3;
    const double R = eval_R(sys.dissipation(), EvalContext(s.q, s.v, sys.params()));
    worst = std::max(worst, std::abs(R - termwise) / std::abs(termwise));
  }
  return {worst <= 1e-12, "max rel err " + fmt(worst) + " (<= 1e-12)"};
}

Outcome quadrature_vs_closed() {
  double worst = 0.0;
  for (const SystemSpec& sys : builtin_systems()) {
    if (sys.dissipation().empty()) continue;
    const SystemSpec general =
        sys.with_dissipation(DissipationSpec::general(sys.dissipation().summed_expression()));
    SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) {
      const SampledState s = sample_state(rng, sys.dof());
      const EvalContext ctx(s.q, s.v, sys.params());
      const double closed = eval_R_closed(sys.dissipation(), ctx);
      const double quad = eval_R(general.dissipation(), ctx);
      worst = std::max(worst, std::abs(quad - closed) / std::abs(closed));
    }
  }
  return {worst <= 1e-8, "max rel err " + fmt(worst) + " (<= 1e-8)"};
}

Outcome euler_identity() {
  double worst = 0.0;
  for (const SystemSpec& sys : builtin_systems()) {
    SplitMix64 rng(4);
    for (int i = 0; i < 100; ++i) {
      const SampledState s = sample_state(rng, sys.dof());
      const EvalContext ctx(s.q, s.v, sys.params());
      const double D = eval_D(sys.dissipation(), ctx);
      const double power = s.v.dot(grad_R_v(sys.dissipation(), ctx));
      const double err = D == 0.0 ? std::abs(power) : std::abs(power - D) / std::abs(D);
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1e-8, "max rel err " + fmt(worst) + " (<= 1e-8)"};
}

Outcome energy_balance() {
  const Trajectory traj = integrate(testing::oscillator(0.2), testing::state(0, {1}, {0}), 10,
                                    rk45(1e-10));
  const EnergyBalanceResult r = energy_balance_audit(traj, 1e-7);
  const double bound = 1e-7 * (1 + std::abs(r.H0));
  return {r.max_defect <= bound, "max defect " + fmt(r.max_defect) + " (<= " + fmt(bound) + ")"};
}

Outcome conservative_limit() {
  const Trajectory traj = integrate(testing::oscillator(0), testing::state(0, {1}, {0}),
                                    20 * std::numbers::pi, rk45(1e-10));
  double drift = 0.0;
  for (const Sample& s : traj.samples) drift = std::max(drift, std::abs(s.diag.H - traj[0].diag.H));
  return {drift <= 1e-9, "H drift " + fmt(drift) + " (<= 1e-9)"};
}

Outcome cubic_example() {
  const auto& b = cli::find_builtin("quad_drag_particle");
  const Trajectory traj = integrate(b.make(), testing::state(0, {0}, {2}), 3, rk45(1e-10));
  const double v = traj.samples.back().state.v[0];
  const double oracle = 2.0 / (1 + 0.5 * 2.0 * 3.0);
  const double err = std::abs(v - oracle);
  return {err <= 1e-8 && oracle == 0.5, "|v(3) - 0.5| = " + fmt(err) + " (<= 1e-8)"};
}

Outcome damped_oracle() {
  const Trajectory traj = integrate(testing::oscillator(0.2), testing::state(0, {1}, {0}), 10,
                                    rk45(1e-10));
  const double wd = std::sqrt(0.99);
  const double oracle = std::exp(-1.0) * (std::cos(wd * 10) + 0.1 / wd * std::sin(wd * 10));
  const double err = std::abs(traj.samples.back().state.q[0] - oracle);
  return {err <= 1e-8, "|q(10) - oracle| = " + fmt(err) + " (<= 1e-8)"};
}

Outcome stationarity() {
  const SystemSpec sys = testing::oscillator(0.2);
  const Trajectory coarse = integrate(sys, testing::state(0, {1}, {0}), 6, rk4(1e-3));
  const Trajectory fine = integrate(sys, testing::state(0, {1}, {0}), 6, rk4(5e-4));
  double max_residual = 0.0;
  double min_ratio = 1e300;
  double max_ratio = 0.0;
  double min_slope = 1e300;
  double max_slope = 0.0;
  bool ok = true;
  for (std::size_t i = 1; i <= 5; ++i) {
    const auto a = stationarity_audit(sys, coarse, i * 1000, 3, i);
    const auto b = stationarity_audit(sys, fine, i * 2000, 3, i);
    ok = ok && a.state.t == b.state.t && a.growth == GrowthStatus::verified;
    max_residual = std::max(max_residual, a.residual_norm);
    const double ratio = a.residual_norm / b.residual_norm;
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    for (double s : a.slopes) {
      min_slope = std::min(min_slope, s);
      max_slope = std::max(max_slope, s);
    }
  }
  ok = ok && max_residual <= 1e-5 && min_ratio >= 3.5 && max_ratio <= 4.5 && min_slope >= 1.8 &&
       max_slope <= 2.2;
  return {ok, "residual " + fmt(max_residual) + " (<= 1e-5), ratio [" + fmt(min_ratio) + ", " +
                  fmt(max_ratio) + "] (in [3.5, 4.5]), slope [" + fmt(min_slope) + ", " +
                  fmt(max_slope) + "] (in [1.8, 2.2])"};
}

Outcome ad_correctness() {
  const ParamTable p = testing::corpus_params();
  testing::ContextSampler sampler(10);
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& entry : testing::expression_corpus()) {
    const Expr e = parse(entry.source).bind(entry.dof, p);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd q = sampler.uniform(entry.dof, -2, 2);
      const Eigen::VectorXd v = sampler.uniform(entry.dof, -3, 3);
      const EvalContext ctx(q, v, p);
      const Eigen::VectorXd gv = grad_v(e, ctx);
      const Eigen::VectorXd fv = testing::central_difference(
          [&](const Eigen::VectorXd& x) { return eval(e, EvalContext(q, x, p)); }, v, 1e-6);
      const Eigen::VectorXd gq = grad_q(e, ctx);
      const Eigen::VectorXd fq = testing::central_difference(
          [&](const Eigen::VectorXd& x) { return eval(e, EvalContext(x, v, p)); }, q, 1e-6);
      for (Eigen::Index i = 0; i < gv.size(); ++i) {
        worst = std::max(worst, std::abs(gv[i] - fv[i]) / (1 + std::abs(gv[i])));
        worst = std::max(worst, std::abs(gq[i] - fq[i]) / (1 + std::abs(gq[i])));
      }
      ++checks;
    }
  }
  return {worst <= 1e-6, std::to_string(checks) + " contexts, max mixed err " + fmt(worst) +
                             " (<= 1e-6)"};
}

double reversal_miss(double c) {
  const SystemSpec sys = testing::oscillator(c);
  State mid = integrate(sys, testing::state(0, {1}, {0}), 5, rk4(1e-3)).samples.back().state;
  mid.v = -mid.v;
  const State back = integrate(sys, mid, 10, rk4(1e-3)).samples.back().state;
  return std::hypot(back.q[0] - 1.0, back.v[0]);
}

Outcome irreversibility() {
  const double damped = reversal_miss(0.2);
  const double conservative = reversal_miss(0.0);
  return {damped > 0.01 && conservative < 1e-8,
          "miss c=0.2 " + fmt(damped) + " (> 0.01), c=0 " + fmt(conservative) + " (< 1e-8)"};
}

bool same_output(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto ra = cli::trajectory_row(a[k]);
    const auto rb = cli::trajectory_row(b[k]);
    if (std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

Outcome cli_contract() {
  const fs::path dir = testing::scratch_dir("acceptance");
  std::ostringstream log;
  auto simulate = [&](const std::string& text, const std::string& name) {
    cli::SimulateOptions o;
    o.out = dir / name;
    return cli::cmd_simulate(cli::parse_config(text), o, log);
  };
  const std::string adversarial = R"({"dof": 1, "mass_matrix": [["1"]], "potential": "0.5*q1^2",
      "dissipation": {"terms": [{"expr": "-v1^2", "degree": 2}]},
      "initial": {"q": [1], "v": [0]}, "t_end": 5})";

  std::vector<std::string> failures;
  if (simulate(R"({"system": "damped_sho"})", "damped.csv") != cli::kExitOk)
    failures.push_back("damped_sho exit");
  if (first_line(dir / "damped.csv") != "t,q1,v1,H,T,V,D,R,W") failures.push_back("damped_sho header");

  if (simulate(R"({"system": "quad_drag_particle"})", "drag.csv") != cli::kExitOk)
    failures.push_back("quad_drag exit");
  {
    std::ifstream in(dir / "drag.csv");
    const cli::CsvTable t = cli::read_csv(in);
    if (t.rows.empty() || std::abs(t.rows.back()[2] - 0.5) > 1e-8) failures.push_back("quad_drag v(3)");
  }

  if (simulate(adversarial, "neg.csv") != cli::kExitAuditFailed) failures.push_back("adversarial exit");
  for (const char* name : {"damped.audit.json", "drag.audit.json", "neg.audit.json"}) {
    std::ifstream in(dir / name);
    const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("energy_balance") || !doc.contains("stationarity"))
      failures.push_back(std::string(name) + " schema");
  }
  {
    std::ifstream in(dir / "neg.audit.json");
    const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || doc["positivity"]["pass"] != false) failures.push_back("adversarial section");
  }

  for (const std::string& text : {std::string(R"({"system": "damped_sho", "t_end": 3})"), adversarial}) {
    const cli::RunConfig first = cli::parse_config(text);
    const cli::RunConfig second = cli::config_from_json(cli::config_to_json(first));
    if (!same_output(cli::run_simulation(first).trajectory, cli::run_simulation(second).trajectory))
      failures.push_back("round trip");
  }
  fs::remove_all(dir);

  std::string detail = "exit codes 0/0/2, schemas, round trip";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "homogeneity corollary R = D/n", 1, homogeneity_corollary},
      {2, "sum rule R = sum D_n/n", 1, sum_rule},
      {3, "quadrature vs closed form", 5, quadrature_vs_closed},
      {4, "Euler identity v.dR/dv = D", 1, euler_identity},
      {5, "energy balance on damped SHO", 1, energy_balance},
      {6, "conservative limit", 1, conservative_limit},
      {7, "cubic dissipation gives quadratic drag", 1, cubic_example},
      {8, "damped SHO analytic oracle", 1, damped_oracle},
      {9, "reduced-dissipation stationarity", 2, stationarity},
      {10, "AD vs finite differences", 2, ad_correctness},
      {11, "irreversibility", 1, irreversibility},
      {12, "CLI contract", 2, cli_contract},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = outcome.pass && seconds < c.runtime_limit;
    if (!pass) ++failed;
    std::printf("%s [%2d] %s: %s; %.3f s (< %g s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                outcome.detail.c_str(), seconds, c.runtime_limit);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
