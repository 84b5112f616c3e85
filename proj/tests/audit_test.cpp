#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rayleigh/audit.hpp"
#include "rayleigh/cli/builtins.hpp"
#include "rayleigh/dissipation.hpp"
#include "rayleigh/errors.hpp"
#include "support.hpp"

namespace rayleigh {
namespace {

using testing::oscillator;
using testing::state;

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

Trajectory damped_run(const IntegratorConfig& cfg, double t_end = 10, double c = 0.2) {
  return integrate(oscillator(c), state(0, {1}, {0}), t_end, cfg);
}

// Samples of the exact underdamped motion at spacing h; no integrator involved.
Trajectory analytic_trajectory(const SystemSpec& sys, const testing::Underdamped& exact,
                               double h, std::size_t n) {
  Trajectory traj;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const State s = state(t, {exact.q(t)}, {exact.v(t)});
    traj.samples.push_back(Sample{s, diagnostics(sys, s), std::nullopt});
  }
  traj.dt = h;
  return traj;
}

TEST(EnergyBalance, DampedOscillatorClosesTheBalance) {
  const Trajectory traj = damped_run(rk45(1e-10));
  const EnergyBalanceResult r = energy_balance_audit(traj, 1e-6);
  EXPECT_DOUBLE_EQ(r.H0, 0.5);
  EXPECT_LE(r.max_defect, 1e-7);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.rule, "simpson_nonuniform");
  EXPECT_EQ(r.defect.size(), traj.size());
  EXPECT_EQ(r.defect.front(), 0.0);
}

TEST(EnergyBalance, ConservativeDefectIsTheDrift) {
  const Trajectory traj = integrate(oscillator(0), state(0, {1}, {0}), 20 * std::numbers::pi,
                                    rk45(1e-10));
  const EnergyBalanceResult r = energy_balance_audit(traj, 1e-9);
  double drift = 0.0;
  for (const Sample& s : traj.samples) drift = std::max(drift, std::abs(s.diag.H - traj[0].diag.H));
  EXPECT_EQ(r.max_defect, drift);
  EXPECT_LE(r.max_defect, 1e-9);
}

TEST(EnergyBalance, UniformSpacingUsesSimpson) {
  const EnergyBalanceResult r = energy_balance_audit(damped_run(rk4(1e-2)), 1e-6);
  EXPECT_EQ(r.rule, "simpson_uniform");
  EXPECT_TRUE(r.pass);
}

TEST(EnergyBalance, TooFewSamplesIsAnError) {
  Trajectory traj = damped_run(rk4(0.1), 0.2);
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_NO_THROW(energy_balance_audit(traj, 1e-6));
  traj.samples.pop_back();
  EXPECT_THROW(energy_balance_audit(traj, 1e-6), std::invalid_argument);
  traj.samples.pop_back();
  EXPECT_THROW(energy_balance_audit(traj, 1e-6), std::invalid_argument);
}

TEST(EnergyBalance, TrapezoidDefectIsSecondOrder) {
  const double coarse =
      energy_balance_audit(damped_run(rk4(0.02)), 1, EnergyQuadrature::trapezoid).max_defect;
  const double fine =
      energy_balance_audit(damped_run(rk4(0.01)), 1, EnergyQuadrature::trapezoid).max_defect;
  EXPECT_GE(coarse / fine, 3.5);
  EXPECT_LE(coarse / fine, 4.5);
}

TEST(GeneralizedForce, VanishesOnConservativeMotion) {
  const testing::Underdamped exact{1, 1, 0, 1, 0};
  const SystemSpec sys = oscillator(0);
  double previous = 0.0;
  for (double h : {2e-3, 1e-3}) {
    const Trajectory traj = analytic_trajectory(sys, exact, h, 2001);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < traj.size(); k += 100) {
      const TrajectoryForce f = generalized_force(sys, traj, k);
      worst = std::max(worst, f.breakdown.generalized.cwiseAbs().maxCoeff());
      EXPECT_LE(std::abs(f.W), 1e-6);
      EXPECT_NEAR(f.spacing, h, 1e-12);
    }
    EXPECT_LE(worst, h * h);
    if (previous > 0) {
      EXPECT_GE(previous / worst, 3.5);
      EXPECT_LE(previous / worst, 4.5);
    }
    previous = worst;
  }
}

TEST(GeneralizedForce, BalancesLinearDragOnDampedMotion) {
  const Trajectory traj = damped_run(rk4(1e-3), 2);
  const SystemSpec sys = oscillator(0.2);
  for (std::size_t k : {1u, 500u, 1999u}) {
    const TrajectoryForce f = generalized_force(sys, traj, k);
    EXPECT_NEAR(f.breakdown.generalized[0], 0.2 * traj[k].state.v[0], 1e-6);
    EXPECT_NEAR(f.breakdown.dissipative[0], -0.2 * traj[k].state.v[0], 1e-15);
    EXPECT_EQ(f.breakdown.generalized[0],
              f.breakdown.conservative[0] + f.breakdown.inertial[0]);
  }
}

TEST(GeneralizedForce, NonuniformSpacingKeepsSecondOrder) {
  const testing::Underdamped exact;
  const SystemSpec sys = oscillator(0.2);
  Trajectory traj;
  for (double t : {0.5, 0.5 + 1e-3, 0.5 + 3e-3}) {
    const State s = state(t, {exact.q(t)}, {exact.v(t)});
    traj.samples.push_back(Sample{s, diagnostics(sys, s), std::nullopt});
  }
  const TrajectoryForce f = generalized_force(sys, traj, 1);
  EXPECT_NEAR(f.spacing, 2e-3, 1e-12);
  EXPECT_NEAR(f.breakdown.generalized[0], 0.2 * traj[1].state.v[0], 1e-6);
}

TEST(GeneralizedForce, EndpointsAreOutOfRange) {
  const Trajectory traj = damped_run(rk4(0.1), 1);
  const SystemSpec sys = oscillator(0.2);
  EXPECT_THROW(generalized_force(sys, traj, 0), std::out_of_range);
  EXPECT_THROW(generalized_force(sys, traj, traj.size() - 1), std::out_of_range);
  EXPECT_NO_THROW(generalized_force(sys, traj, traj.size() - 2));
}

TEST(Stationarity, ResidualIsSmallAndSecondOrder) {
  const SystemSpec sys = oscillator(0.2);
  const Trajectory coarse = damped_run(rk4(1e-3), 6);
  const Trajectory fine = damped_run(rk4(5e-4), 6);
  for (std::size_t i = 1; i <= 5; ++i) {
    const ReducedDissipationReport a = stationarity_audit(sys, coarse, i * 1000, 3, i);
    const ReducedDissipationReport b = stationarity_audit(sys, fine, i * 2000, 3, i);
    ASSERT_EQ(a.state.t, b.state.t);
    EXPECT_LE(a.residual_norm, 1e-6);
    EXPECT_TRUE(a.pass());
    EXPECT_EQ(a.growth, GrowthStatus::verified);
    const double ratio = a.residual_norm / b.residual_norm;
    EXPECT_GE(ratio, 3.5) << "sample " << i;
    EXPECT_LE(ratio, 4.5) << "sample " << i;
  }
}

TEST(Stationarity, QuadraticPotentialGrowsByHalfCDeltaSquared) {
  const double c = 0.2;
  const SystemSpec sys = oscillator(c);
  const Trajectory traj = analytic_trajectory(sys, testing::Underdamped{}, 1e-3, 2001);
  const ReducedDissipationReport r = stationarity_audit(sys, traj, 1000, 4, 17);
  ASSERT_EQ(r.probe_deltas.size(), 12u);
  for (const ProbeDelta& pd : r.probe_deltas)
    EXPECT_NEAR(pd.curvature, 0.5 * c * pd.norm * pd.norm, 1e-14);
  ASSERT_EQ(r.slopes.size(), 4u);
  for (double slope : r.slopes) EXPECT_NEAR(slope, 2.0, 1e-6);
  EXPECT_EQ(r.growth, GrowthStatus::verified);
}

TEST(Stationarity, ProbeDeltasAreSortedByNorm) {
  const SystemSpec sys = oscillator(0.2);
  const ReducedDissipationReport r = stationarity_audit(sys, damped_run(rk4(1e-3), 1), 500, 5, 3);
  for (std::size_t i = 1; i < r.probe_deltas.size(); ++i)
    EXPECT_LE(r.probe_deltas[i - 1].norm, r.probe_deltas[i].norm);
}

TEST(Stationarity, ZeroProbesReportsResidualOnly) {
  const SystemSpec sys = oscillator(0.2);
  const ReducedDissipationReport r = stationarity_audit(sys, damped_run(rk4(1e-3), 1), 500, 0, 3);
  EXPECT_EQ(r.growth, GrowthStatus::not_requested);
  EXPECT_TRUE(r.probe_deltas.empty());
  EXPECT_EQ(r.gradient_residual.size(), 1);
  EXPECT_TRUE(r.pass());
}

TEST(Stationarity, ResidualThresholdScalesWithSpacing) {
  const SystemSpec sys = oscillator(0.2);
  const AuditTolerances tol;
  const ReducedDissipationReport fine = stationarity_audit(sys, damped_run(rk4(5e-4), 1), 500, 0, 1);
  const ReducedDissipationReport coarse = stationarity_audit(sys, damped_run(rk4(4e-3), 4), 500, 0, 1);
  EXPECT_EQ(fine.residual_threshold, tol.residual);
  EXPECT_NEAR(coarse.residual_threshold, tol.residual * 16, 1e-15);
}

TEST(Stationarity, KinkNearVelocityIsSkipped) {
  const auto& block = cli::find_builtin("coulomb_block");
  const SystemSpec sys = block.make();
  const Trajectory traj = integrate(sys, block.initial, 0.5, block.integrator);
  // The block starts at rest, so early samples sit inside the probe radius.
  const ReducedDissipationReport r = stationarity_audit(sys, traj, 1, 3, 1);
  EXPECT_EQ(r.growth, GrowthStatus::skipped_nonsmooth);
  EXPECT_FALSE(r.note.empty());
  EXPECT_TRUE(r.slopes.empty());
}

TEST(Stationarity, FlatPotentialIsDegenerate) {
  const SystemSpec sys = oscillator(0);
  const Trajectory traj = integrate(sys, state(0, {1}, {0}), 1, rk4(1e-3));
  const ReducedDissipationReport r = stationarity_audit(sys, traj, 500, 3, 1);
  EXPECT_EQ(r.growth, GrowthStatus::skipped_degenerate);
}

TEST(Stationarity, WrongSignedForceFailsTheResidual) {
  // Trajectory of a system with the drag reversed, audited against the
  // model with the correct sign.
  const Trajectory traj = integrate(oscillator(-0.2), state(0, {1}, {0}), 2, rk4(1e-3));
  const ReducedDissipationReport r = stationarity_audit(oscillator(0.2), traj, 1000, 3, 1);
  EXPECT_FALSE(r.residual_pass());
  EXPECT_FALSE(r.pass());
}

TEST(FullAudit, DampedOscillatorPasses) {
  const AuditReport r = full_audit(oscillator(0.2), damped_run(rk45(1e-10)));
  EXPECT_TRUE(r.pass());
  EXPECT_FALSE(r.conservative_limit.has_value());
  ASSERT_TRUE(r.stationarity.result);
  EXPECT_EQ(r.stationarity.result->samples.size(), 5u);
  EXPECT_TRUE(r.stationarity.result->quadratic_growth_verified);
}

TEST(FullAudit, ConservativePendulumHasConservativeSection) {
  const auto& b = cli::find_builtin("pendulum_drag_2dof");
  const SystemSpec sys = b.make().with_dissipation(DissipationSpec());
  const AuditReport r = full_audit(sys, integrate(sys, b.initial, b.t_end, b.integrator));
  ASSERT_TRUE(r.conservative_limit.has_value());
  ASSERT_TRUE(r.conservative_limit->result);
  EXPECT_TRUE(r.conservative_limit->result->pass);
  EXPECT_TRUE(r.pass());
}

TEST(FullAudit, NegativeDissipationGivesMixedResults) {
  const SystemSpec sys(1, {parse("1")}, parse("0.5*q1^2"),
                       DissipationSpec::homogeneous_sum({{parse("-v1^2"), 2.0, {}}}), {});
  const Trajectory traj = integrate(sys, state(0, {1}, {0}), 10, rk45(1e-10));
  const AuditReport r = full_audit(sys, traj);
  ASSERT_TRUE(r.euler_identity.result);
  EXPECT_TRUE(r.euler_identity.result->pass);
  ASSERT_TRUE(r.positivity.result);
  EXPECT_FALSE(r.positivity.result->pass);
  // Energy grows without bound and the absolute defect grows with it.
  EXPECT_GT(traj.samples.back().diag.H, 100 * traj[0].diag.H);
  ASSERT_TRUE(r.energy_balance.result);
  EXPECT_FALSE(r.energy_balance.result->pass);
  const std::vector<double>& defect = r.energy_balance.result->defect;
  EXPECT_GT(std::abs(defect.back()), 100 * std::abs(defect[defect.size() / 4]));
  EXPECT_FALSE(r.pass());
}

TEST(FullAudit, SectionsAreIndependent) {
  Trajectory traj = damped_run(rk4(0.1), 0.1);
  ASSERT_EQ(traj.size(), 2u);
  const AuditReport r = full_audit(oscillator(0.2), traj);
  EXPECT_FALSE(r.energy_balance.error.empty());
  EXPECT_FALSE(r.stationarity.error.empty());
  ASSERT_TRUE(r.euler_identity.result);
  EXPECT_TRUE(r.euler_identity.result->pass);
  ASSERT_TRUE(r.positivity.result);
  EXPECT_TRUE(r.positivity.result->pass);
  EXPECT_FALSE(r.pass());
}

TEST(FullAudit, EvaluationErrorStaysInItsSection) {
  // D is undefined for q1 < 0, which the check sampler visits but the motion
  // never does.
  const SystemSpec sys(1, {parse("1")}, parse("0.5*(q1-5)^2"),
                       DissipationSpec::homogeneous_sum({{parse("sqrt(q1)*v1^2"), 2.0, {}}}), {});
  const Trajectory traj = integrate(sys, state(0, {4}, {0}), 1, rk4(1e-3));
  const AuditReport r = full_audit(sys, traj);
  EXPECT_FALSE(r.euler_identity.error.empty());
  EXPECT_FALSE(r.positivity.error.empty());
  ASSERT_TRUE(r.energy_balance.result);
  EXPECT_TRUE(r.energy_balance.result->pass);
  ASSERT_TRUE(r.stationarity.result);
  EXPECT_TRUE(r.stationarity.result->pass);
}

TEST(FullAudit, PassIsAFunctionOfTheFields) {
  AuditReport r = full_audit(oscillator(0.2), damped_run(rk45(1e-10)));
  ASSERT_TRUE(r.pass());
  r.energy_balance.result->pass = false;
  EXPECT_FALSE(r.pass());
}

}  // namespace
}  // namespace rayleigh
