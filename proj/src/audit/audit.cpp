#include "rayleigh/audit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "rayleigh/dissipation.hpp"
#include "rayleigh/errors.hpp"
#include "rayleigh/eval.hpp"

namespace rayleigh {

namespace {

// Integral over [a, b] of (t - xj)(t - xk).
double product_integral(double xj, double xk, double a, double b) {
  auto anti = [&](double t) {
    return t * t * t / 3.0 - (xj + xk) * t * t / 2.0 + xj * xk * t;
  };
  return anti(b) - anti(a);
}

// Integral over [a, b] of the quadratic through (x[i], f[i]).
double quadratic_integral(std::array<double, 3> x, const std::array<double, 3>& f,
                          double a, double b) {
  const double origin = x[1];
  for (double& xi : x) xi -= origin;
  a -= origin;
  b -= origin;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    sum += f[i] * product_integral(x[j], x[k], a, b) / ((x[i] - x[j]) * (x[i] - x[k]));
  }
  return sum;
}

bool uniform_spacing(const Trajectory& traj) {
  const double h0 = traj[1].state.t - traj[0].state.t;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double h = traj[k + 1].state.t - traj[k].state.t;
    if (std::abs(h - h0) > 1e-9 * h0) return false;
  }
  return true;
}

double kinetic_gradient_component(const Eigen::MatrixXd& dm, const Eigen::VectorXd& v) {
  return 0.5 * v.dot(dm * v);
}

}  // namespace

std::string_view growth_status_name(GrowthStatus s) {
  switch (s) {
    case GrowthStatus::verified:
      return "verified";
    case GrowthStatus::failed:
      return "failed";
    case GrowthStatus::skipped_nonsmooth:
      return "skipped_nonsmooth";
    case GrowthStatus::skipped_degenerate:
      return "skipped_degenerate";
    case GrowthStatus::not_requested:
      return "not_requested";
  }
  return "unknown";
}

EnergyBalanceResult energy_balance_audit(const Trajectory& traj, double tol,
                                         EnergyQuadrature rule) {
  const std::size_t n = traj.size();
  if (n < 3) throw std::invalid_argument("energy balance audit needs at least 3 samples");

  EnergyBalanceResult r;
  r.H0 = traj[0].diag.H;
  r.threshold = tol * (1.0 + std::abs(r.H0));
  r.defect.assign(n, 0.0);

  auto t = [&](std::size_t k) { return traj[k].state.t; };
  auto d = [&](std::size_t k) { return traj[k].diag.D_val; };

  std::vector<double> dissipated(n, 0.0);
  if (rule == EnergyQuadrature::trapezoid) {
    r.rule = "trapezoid";
    for (std::size_t k = 1; k < n; ++k)
      dissipated[k] = dissipated[k - 1] + 0.5 * (t(k) - t(k - 1)) * (d(k) + d(k - 1));
  } else {
    r.rule = uniform_spacing(traj) ? "simpson_uniform" : "simpson_nonuniform";
    auto fit = [&](std::size_t first, double a, double b) {
      return quadratic_integral({t(first), t(first + 1), t(first + 2)},
                                {d(first), d(first + 1), d(first + 2)}, a, b);
    };
    for (std::size_t k = 1; k < n; ++k) {
      if (k % 2 == 0) {
        dissipated[k] = dissipated[k - 2] + fit(k - 2, t(k - 2), t(k));
      } else {
        const std::size_t first = k + 1 < n ? k - 1 : k - 2;
        dissipated[k] = dissipated[k - 1] + fit(first, t(k - 1), t(k));
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    r.defect[k] = traj[k].diag.H - r.H0 + dissipated[k];
    r.max_defect = std::max(r.max_defect, std::abs(r.defect[k]));
  }
  r.pass = r.max_defect <= r.threshold;
  return r;
}

TrajectoryForce generalized_force(const SystemSpec& sys, const Trajectory& traj,
                                  std::size_t k) {
  if (k < 1 || k + 2 > traj.size())
    throw std::out_of_range("generalized_force needs an interior sample index, got " +
                            std::to_string(k) + " of " + std::to_string(traj.size()));
  const State& prev = traj[k - 1].state;
  const State& here = traj[k].state;
  const State& next = traj[k + 1].state;
  const double h1 = here.t - prev.t;
  const double h2 = next.t - here.t;

  const Eigen::VectorXd p_prev = sys.mass_matrix(prev.q) * prev.v;
  const Eigen::VectorXd p_here = sys.mass_matrix(here.q) * here.v;
  const Eigen::VectorXd p_next = sys.mass_matrix(next.q) * next.v;
  const Eigen::VectorXd dp_dt = -h2 / (h1 * (h1 + h2)) * p_prev +
                                (h2 - h1) / (h1 * h2) * p_here +
                                h1 / (h2 * (h1 + h2)) * p_next;

  const auto n = static_cast<Eigen::Index>(sys.dof());
  Eigen::VectorXd dT_dq = Eigen::VectorXd::Zero(n);
  if (sys.mass_depends_on_q()) {
    const auto partials = sys.mass_matrix_partials(here.q);
    for (Eigen::Index j = 0; j < n; ++j)
      dT_dq[j] = kinetic_gradient_component(partials[static_cast<std::size_t>(j)], here.v);
  }

  TrajectoryForce out;
  out.breakdown.conservative = -sys.potential_gradient(here.q);
  out.breakdown.inertial = dT_dq - dp_dt;
  out.breakdown.generalized = out.breakdown.conservative + out.breakdown.inertial;
  out.breakdown.dissipative =
      -grad_R_v(sys.dissipation(), EvalContext(here.q, here.v, sys.params()));
  out.W = here.v.dot(out.breakdown.generalized);
  out.spacing = std::max(h1, h2);
  return out;
}

ReducedDissipationReport stationarity_audit(const SystemSpec& sys,
                                            const Trajectory& traj, std::size_t k,
                                            std::size_t probes, std::uint64_t seed,
                                            const AuditTolerances& tol) {
  constexpr std::array<double, 3> kMagnitudes{1e-1, 1e-2, 1e-3};

  const TrajectoryForce force = generalized_force(sys, traj, k);
  const State& s = traj[k].state;
  const DissipationSpec& spec = sys.dissipation();
  const EvalContext ctx(s.q, s.v, sys.params());
  const Eigen::VectorXd dR_dv = grad_R_v(spec, ctx);

  ReducedDissipationReport r;
  r.index = k;
  r.state = s;
  r.spacing = force.spacing;
  r.frozen_force = force.breakdown.generalized;
  r.gradient_residual = dR_dv - r.frozen_force;
  r.residual_norm = r.gradient_residual.lpNorm<Eigen::Infinity>();
  const double ratio = force.spacing / tol.residual_spacing;
  r.residual_threshold = tol.residual * std::max(1.0, ratio * ratio);

  if (probes == 0) {
    r.growth = GrowthStatus::not_requested;
    return r;
  }

  const double R0 = eval_R(spec, ctx);
  const double W0 = s.v.dot(r.frozen_force);
  SplitMix64 rng(seed);
  double largest_curvature = 0.0;
  std::vector<std::vector<ProbeDelta>> series;
  for (std::size_t p = 0; p < probes; ++p) {
    const Eigen::VectorXd dir = random_direction(rng, sys.dof());
    std::vector<ProbeDelta> line;
    for (double m : kMagnitudes) {
      const Eigen::VectorXd delta = m * dir;
      const Eigen::VectorXd v = s.v + delta;
      const double R = eval_R(spec, EvalContext(s.q, v, sys.params()));
      const double reduced = (R - v.dot(r.frozen_force)) - (R0 - W0);
      ProbeDelta pd;
      pd.norm = m;
      pd.reduced_change = reduced;
      pd.curvature = reduced - r.gradient_residual.dot(delta);
      largest_curvature = std::max(largest_curvature, std::abs(pd.curvature));
      line.push_back(pd);
      r.probe_deltas.push_back(pd);
    }
    series.push_back(std::move(line));
  }
  std::stable_sort(r.probe_deltas.begin(), r.probe_deltas.end(),
                   [](const ProbeDelta& a, const ProbeDelta& b) { return a.norm < b.norm; });

  if (spec.has_kink()) {
    const double margin = std::max(10.0 * spec.max_smooth_eps(), kMagnitudes.front());
    if (s.v.cwiseAbs().minCoeff() < margin) {
      r.growth = GrowthStatus::skipped_nonsmooth;
      r.note = "R may be non-smooth within the probe radius of v";
      return r;
    }
  }
  // Affine R along every probe (e.g. a degree-1 term in one dimension): the
  // second-order remainder is rounding noise and has no slope.
  if (largest_curvature <= 1e-13 * (1.0 + std::abs(R0))) {
    r.growth = GrowthStatus::skipped_degenerate;
    r.note = "R has no curvature along the probes";
    return r;
  }

  r.growth = GrowthStatus::verified;
  for (const auto& line : series) {
    // Least-squares slope of log|curvature| against log|delta|.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& pd : line) {
      const double x = std::log(pd.norm);
      const double y = std::log(std::max(std::abs(pd.curvature), 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(line.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    r.slopes.push_back(slope);
    if (!(slope >= tol.slope_min && slope <= tol.slope_max)) r.growth = GrowthStatus::failed;
  }
  if (r.growth == GrowthStatus::failed) r.note = "growth of R~ is not quadratic";
  return r;
}

bool AuditReport::pass() const {
  auto ok = [](const auto& section, auto&& passed) {
    return section.error.empty() && section.result && passed(*section.result);
  };
  bool all = ok(energy_balance, [](const auto& r) { return r.pass; }) &&
             ok(euler_identity, [](const auto& r) { return r.pass; }) &&
             ok(positivity, [](const auto& r) { return r.pass; }) &&
             ok(stationarity, [](const auto& r) { return r.pass; });
  if (conservative_limit)
    all = all && ok(*conservative_limit, [](const auto& r) { return r.pass; });
  return all;
}

AuditReport full_audit(const SystemSpec& sys, const Trajectory& traj,
                       const AuditTolerances& tol) {
  AuditReport report;
  report.tolerances = tol;

  auto guarded = [](auto& section, auto&& compute) {
    try {
      section.result = compute();
    } catch (const std::exception& e) {
      section.error = e.what();
    }
  };

  guarded(report.energy_balance, [&] { return energy_balance_audit(traj, tol.energy); });

  guarded(report.euler_identity, [&] {
    return euler_identity_check(sys, tol.check_samples, tol.seed, tol.euler);
  });

  guarded(report.positivity, [&] {
    CheckReport r = positivity_scan(sys, tol.check_samples, tol.seed);
    for (const auto& sample : traj.samples) {
      if (sample.diag.D_val < -1e-12 && sample.diag.D_val < r.worst) {
        r.worst = sample.diag.D_val;
        r.witness = SampledState{sample.state.q, sample.state.v};
        r.pass = false;
        r.detail = "D is negative along the trajectory at t=" +
                   std::to_string(sample.state.t);
      }
    }
    return r;
  });

  guarded(report.stationarity, [&] {
    if (traj.size() < 3)
      throw std::invalid_argument("stationarity audit needs interior samples");
    StationaritySummary summary;
    std::vector<std::size_t> indices;
    const std::size_t last = traj.size() - 1;
    for (std::size_t i = 1; i <= 5; ++i) {
      auto k = static_cast<std::size_t>(
          std::llround(static_cast<double>(i * last) / 6.0));
      k = std::clamp<std::size_t>(k, 1, last - 1);
      if (indices.empty() || indices.back() != k) indices.push_back(k);
    }
    summary.pass = true;
    bool any_verified = false;
    bool any_failed = false;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      auto r = stationarity_audit(sys, traj, indices[i], tol.probes, tol.seed + i, tol);
      summary.max_gradient_residual = std::max(summary.max_gradient_residual, r.residual_norm);
      summary.pass = summary.pass && r.pass();
      any_verified = any_verified || r.growth == GrowthStatus::verified;
      any_failed = any_failed || r.growth == GrowthStatus::failed;
      summary.samples.push_back(std::move(r));
    }
    summary.quadratic_growth_verified = any_verified && !any_failed;
    return summary;
  });

  if (sys.dissipation().empty()) {
    AuditSection<ConservativeLimitResult> section;
    guarded(section, [&] {
      if (traj.size() < 1) throw std::invalid_argument("empty trajectory");
      ConservativeLimitResult r;
      const double h0 = traj[0].diag.H;
      for (const auto& sample : traj.samples)
        r.H_drift = std::max(r.H_drift, std::abs(sample.diag.H - h0));
      r.threshold = tol.conservative * (1.0 + std::abs(h0));
      r.pass = r.H_drift <= r.threshold;
      return r;
    });
    report.conservative_limit = std::move(section);
  }
  return report;
}

}  // namespace rayleigh
