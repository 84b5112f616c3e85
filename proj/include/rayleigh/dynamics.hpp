#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/system.hpp"

namespace rayleigh {

struct State {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
};

// Generalized forces at a state. `generalized` is the Lagrangian force
// F = dL/dq - d/dt(dL/dv) = conservative + inertial; on a motion it equals
// dR/dv = -dissipative.
struct ForceBreakdown {
  Eigen::VectorXd conservative;  // -dV/dq
  Eigen::VectorXd inertial;      // dT/dq - d/dt(dT/dv)
  Eigen::VectorXd dissipative;   // -dR/dv
  Eigen::VectorXd generalized;
};

struct Diagnostics {
  double H = 0.0;
  double T_kin = 0.0;
  double V_pot = 0.0;
  double D_val = 0.0;
  double R_val = 0.0;
  double W = 0.0;  // v . F
  double L_val = 0.0;
};

enum class Method { rk4, rk45 };

std::string_view method_name(Method m);

struct IntegratorConfig {
  Method method = Method::rk4;
  // rk4: the fixed step. rk45: the first trial step.
  double dt = 1e-3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::size_t max_steps = 10'000'000;
  // Keep every n-th step (the final step is always kept).
  std::size_t sample_every = 1;
  bool record_forces = false;

  friend bool operator==(const IntegratorConfig&,
                         const IntegratorConfig&) = default;
};

struct Sample {
  State state;
  Diagnostics diag;
  std::optional<ForceBreakdown> forces;
};

struct Trajectory {
  std::vector<Sample> samples;
  Method method = Method::rk4;
  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
  double dt = 0.0;  // rk4 step
  double rel_tol = 0.0;
  double abs_tol = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  const Sample& operator[](std::size_t k) const { return samples[k]; }
};

// Solves M(q) a = dT/dq - (dM/dt) v - dV/dq - dR/dv for the accelerations,
// with dT/dq_j = v.(dM/dq_j)v / 2 and dM/dt = sum_j v_j dM/dq_j.
Eigen::VectorXd accel(const SystemSpec& sys, const State& s);

// Forces and energies at a state whose acceleration is `a`.
ForceBreakdown model_forces(const SystemSpec& sys, const State& s,
                            const Eigen::VectorXd& a);
Diagnostics diagnostics(const SystemSpec& sys, const State& s,
                        const Eigen::VectorXd& a);
Diagnostics diagnostics(const SystemSpec& sys, const State& s);

State step_rk4(const SystemSpec& sys, const State& s, double dt);

struct Rk45Step {
  State state;  // input state when rejected
  double dt_next = 0.0;
  bool accepted = false;
  double error_norm = 0.0;
};

// Step-size controller of the embedded pair.
bool rk45_accept(double error_norm);
double rk45_step_factor(double error_norm);

// One Dormand-Prince 5(4) step. `error_norm` is the RMS of the embedded
// difference weighted by abs_tol + rel_tol * max(|y_old|, |y_new|).
Rk45Step step_rk45(const SystemSpec& sys, const State& s, double dt_try,
                   const IntegratorConfig& cfg);

Trajectory integrate(const SystemSpec& sys, const State& init, double t_end,
                     const IntegratorConfig& cfg);

}  // namespace rayleigh
