#include <sstream>

#include <Eigen/Cholesky>

#include "rayleigh/dissipation.hpp"
#include "rayleigh/dynamics.hpp"
#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

std::string describe(const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << s.t << " q=(" << s.q.transpose() << ") v=(" << s.v.transpose()
     << ")";
  return os.str();
}

// Everything the equations of motion need at one state.
struct Assembly {
  Eigen::MatrixXd mass;
  Eigen::VectorXd dT_dq;
  Eigen::VectorXd mdot_v;  // (dM/dt) v
  Eigen::VectorXd dV_dq;
  Eigen::VectorXd dR_dv;
};

Assembly assemble(const SystemSpec& sys, const State& s) {
  const auto n = static_cast<Eigen::Index>(sys.dof());
  if (s.q.size() != n || s.v.size() != n)
    throw std::invalid_argument("state dimension does not match the system");
  Assembly a;
  a.mass = sys.mass_matrix(s.q);
  a.dT_dq = Eigen::VectorXd::Zero(n);
  a.mdot_v = Eigen::VectorXd::Zero(n);
  if (sys.mass_depends_on_q()) {
    const auto partials = sys.mass_matrix_partials(s.q);
    Eigen::MatrixXd mdot = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& dm = partials[static_cast<std::size_t>(j)];
      a.dT_dq[j] = 0.5 * s.v.dot(dm * s.v);
      mdot += s.v[j] * dm;
    }
    a.mdot_v = mdot * s.v;
  }
  a.dV_dq = sys.potential_gradient(s.q);
  a.dR_dv = grad_R_v(sys.dissipation(), EvalContext(s.q, s.v, sys.params()));
  return a;
}

}  // namespace

std::string_view method_name(Method m) {
  return m == Method::rk4 ? "rk4" : "rk45";
}

Eigen::VectorXd accel(const SystemSpec& sys, const State& s) {
  const Assembly a = assemble(sys, s);
  const Eigen::LLT<Eigen::MatrixXd> llt(a.mass);
  if (llt.info() != Eigen::Success)
    throw DynamicsError(DynamicsError::Kind::not_positive_definite,
                        "mass matrix not positive definite at state " + describe(s),
                        s.t);
  return llt.solve(a.dT_dq - a.mdot_v - a.dV_dq - a.dR_dv);
}

ForceBreakdown model_forces(const SystemSpec& sys, const State& s,
                            const Eigen::VectorXd& acc) {
  const Assembly a = assemble(sys, s);
  ForceBreakdown f;
  f.conservative = -a.dV_dq;
  f.inertial = a.dT_dq - (a.mass * acc + a.mdot_v);
  f.dissipative = -a.dR_dv;
  f.generalized = f.conservative + f.inertial;
  return f;
}

Diagnostics diagnostics(const SystemSpec& sys, const State& s,
                        const Eigen::VectorXd& acc) {
  const EvalContext ctx(s.q, s.v, sys.params());
  Diagnostics d;
  d.T_kin = sys.kinetic_energy(s.q, s.v);
  d.V_pot = sys.potential_energy(s.q);
  d.H = d.T_kin + d.V_pot;
  d.L_val = d.T_kin - d.V_pot;
  d.D_val = eval_D(sys.dissipation(), ctx);
  d.R_val = eval_R(sys.dissipation(), ctx);
  d.W = s.v.dot(model_forces(sys, s, acc).generalized);
  return d;
}

Diagnostics diagnostics(const SystemSpec& sys, const State& s) {
  return diagnostics(sys, s, accel(sys, s));
}

}  // namespace rayleigh
