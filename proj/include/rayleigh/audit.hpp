#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/checks.hpp"
#include "rayleigh/dynamics.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh {

struct AuditTolerances {
  double energy = 1e-6;        // relative to 1 + |H(t0)|
  double euler = 1e-8;         // relative to 1 + |D|
  double residual = 1e-5;      // |dR/dv - F|_inf at sample spacing <= ...
  double residual_spacing = 1e-3;  // ... and scaled by (h / this)^2 above it
  double slope_min = 1.8;
  double slope_max = 2.2;
  double conservative = 1e-6;  // H drift, relative to 1 + |H(t0)|
  std::size_t probes = 3;
  std::size_t check_samples = 100;
  std::uint64_t seed = kDefaultCheckSeed;

  friend bool operator==(const AuditTolerances&, const AuditTolerances&) = default;
};

enum class EnergyQuadrature {
  // Piecewise quadratic (Simpson, generalised to unequal spacing).
  automatic,
  trapezoid,
};

struct EnergyBalanceResult {
  double max_defect = 0.0;
  double H0 = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string rule;             // "simpson_uniform", "simpson_nonuniform", "trapezoid"
  std::vector<double> defect;   // H(t_k) - H(t_0) + int_{t_0}^{t_k} D dt
};

// Audits H' = -D along `traj`. Throws std::invalid_argument with fewer than
// three samples.
EnergyBalanceResult energy_balance_audit(const Trajectory& traj, double tol,
                                         EnergyQuadrature rule = EnergyQuadrature::automatic);

struct TrajectoryForce {
  ForceBreakdown breakdown;
  double W = 0.0;        // v . F
  double spacing = 0.0;  // larger of the two neighbouring sample spacings
};

// F = dL/dq - d/dt(dL/dv) at interior sample k, with the time derivative of
// the momentum M(q) v taken by three-point finite differences over the
// stored samples. Independent of the acceleration solve. Throws
// std::out_of_range unless 1 <= k <= size - 2.
TrajectoryForce generalized_force(const SystemSpec& sys, const Trajectory& traj,
                                  std::size_t k);

struct ProbeDelta {
  double norm = 0.0;            // |delta|
  double reduced_change = 0.0;  // R~(v + delta) - R~(v), R~ = R - v.F, F frozen
  double curvature = 0.0;       // reduced_change minus (dR/dv - F).delta
};

enum class GrowthStatus { verified, failed, skipped_nonsmooth, skipped_degenerate, not_requested };

std::string_view growth_status_name(GrowthStatus s);

struct ReducedDissipationReport {
  std::size_t index = 0;
  State state;
  Eigen::VectorXd frozen_force;
  Eigen::VectorXd gradient_residual;  // dR/dv - F at the true velocity
  double residual_norm = 0.0;         // inf-norm
  double residual_threshold = 0.0;    // spacing-scaled tolerance
  double spacing = 0.0;
  std::vector<ProbeDelta> probe_deltas;  // sorted by norm
  std::vector<double> slopes;            // log-log growth slope per direction
  GrowthStatus growth = GrowthStatus::not_requested;
  std::string note;

  bool residual_pass() const { return residual_norm <= residual_threshold; }
  bool pass() const { return residual_pass() && growth != GrowthStatus::failed; }
};

// Stationarity of the reduced dissipation potential at sample k. With
// probes > 0, R~ is probed along `probes` random directions at |delta| in
// {1e-1, 1e-2, 1e-3} and the growth after removing the linear residual term
// must be quadratic.
ReducedDissipationReport stationarity_audit(const SystemSpec& sys,
                                            const Trajectory& traj, std::size_t k,
                                            std::size_t probes, std::uint64_t seed,
                                            const AuditTolerances& tol = {});

template <class T>
struct AuditSection {
  std::optional<T> result;
  std::string error;  // set when the section could not be computed
};

struct StationaritySummary {
  std::vector<ReducedDissipationReport> samples;
  double max_gradient_residual = 0.0;
  bool quadratic_growth_verified = false;
  bool pass = false;
};

struct ConservativeLimitResult {
  double H_drift = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct AuditReport {
  AuditSection<EnergyBalanceResult> energy_balance;
  AuditSection<CheckReport> euler_identity;
  AuditSection<CheckReport> positivity;
  AuditSection<StationaritySummary> stationarity;
  std::optional<AuditSection<ConservativeLimitResult>> conservative_limit;
  AuditTolerances tolerances;

  bool pass() const;
};

// Every section is computed independently; an error in one is recorded and
// the others still run.
AuditReport full_audit(const SystemSpec& sys, const Trajectory& traj,
                       const AuditTolerances& tol = {});

}  // namespace rayleigh
