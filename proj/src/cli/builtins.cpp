#include "rayleigh/cli/builtins.hpp"

#include <cmath>

#include "rayleigh/errors.hpp"

namespace rayleigh::cli {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

State state1(double q, double v) { return State{0.0, vec({q}), vec({v})}; }

ParamTable table(std::initializer_list<std::pair<const char*, double>> entries) {
  ParamTable p;
  for (const auto& [name, value] : entries) p.set(name, value);
  return p;
}

std::vector<DissipationTerm> one_term(const char* expr, double degree,
                                      std::optional<double> eps = std::nullopt) {
  return {DissipationTerm{parse(expr), degree, eps}};
}

// m q'' + c q' + k q = 0 with c^2 < 4 m k.
std::optional<State> underdamped(double m, double k, double c, const State& init,
                                 double t) {
  if (!(m > 0.0) || !(k > 0.0) || c < 0.0 || c * c >= 4.0 * m * k) return std::nullopt;
  const double gamma = c / (2.0 * m);
  const double wd = std::sqrt(k / m - gamma * gamma);
  const double q0 = init.q[0];
  const double v0 = init.v[0];
  const double s = t - init.t;
  const double a = q0;
  const double b = (v0 + gamma * q0) / wd;
  const double decay = std::exp(-gamma * s);
  const double cs = std::cos(wd * s);
  const double sn = std::sin(wd * s);
  const double q = decay * (a * cs + b * sn);
  const double v = decay * ((b * wd - gamma * a) * cs - (a * wd + gamma * b) * sn);
  return state1(q, v);
}

BuiltinSystem sho() {
  BuiltinSystem b;
  b.name = "sho";
  b.description = "harmonic oscillator without dissipation";
  b.defaults = table({{"m", 1.0}, {"k", 1.0}});
  b.build = [](const ParamTable& p) {
    return SystemSpec(1, {parse("m")}, parse("0.5*k*q1^2"), DissipationSpec(), p, {"x"});
  };
  b.initial = state1(1.0, 0.0);
  b.t_end = 10.0;
  b.reference = [](const ParamTable& p, const State& init, double t) {
    return underdamped(p.at("m"), p.at("k"), 0.0, init, t);
  };
  return b;
}

BuiltinSystem damped_sho() {
  BuiltinSystem b;
  b.name = "damped_sho";
  b.description = "harmonic oscillator with D = c*v1^2 (linear drag)";
  b.defaults = table({{"m", 1.0}, {"k", 1.0}, {"c", 0.2}});
  b.build = [](const ParamTable& p) {
    return SystemSpec(1, {parse("m")}, parse("0.5*k*q1^2"),
                      DissipationSpec::homogeneous_sum(one_term("c*v1^2", 2.0)), p, {"x"});
  };
  b.initial = state1(1.0, 0.0);
  b.t_end = 10.0;
  // D = c v^2 gives R = c v^2 / 2 and the drag force c v.
  b.reference = [](const ParamTable& p, const State& init, double t) {
    return underdamped(p.at("m"), p.at("k"), p.at("c"), init, t);
  };
  return b;
}

BuiltinSystem quad_drag_particle() {
  BuiltinSystem b;
  b.name = "quad_drag_particle";
  b.description = "free particle with D = A*abs(v1)^3 (quadratic drag)";
  b.defaults = table({{"m", 1.0}, {"A", 0.5}});
  b.build = [](const ParamTable& p) {
    return SystemSpec(1, {parse("m")}, Expr::constant(0.0),
                      DissipationSpec::homogeneous_sum(one_term("A*abs(v1)^3", 3.0)), p,
                      {"x"});
  };
  b.initial = state1(0.0, 2.0);
  b.t_end = 3.0;
  // m v' = -A |v| v.
  b.reference = [](const ParamTable& p, const State& init,
                   double t) -> std::optional<State> {
    const double m = p.at("m");
    const double A = p.at("A");
    if (!(m > 0.0) || A < 0.0) return std::nullopt;
    const double v0 = init.v[0];
    const double s = t - init.t;
    if (A == 0.0 || v0 == 0.0) return state1(init.q[0] + v0 * s, v0);
    const double rate = A / m * std::abs(v0);
    const double dir = v0 > 0.0 ? 1.0 : -1.0;
    return state1(init.q[0] + dir * (m / A) * std::log1p(rate * s), v0 / (1.0 + rate * s));
  };
  return b;
}

BuiltinSystem coulomb_block() {
  BuiltinSystem b;
  b.name = "coulomb_block";
  b.description = "spring-mounted block with D = mu*abs(v1) (dry friction, regularised)";
  b.defaults = table({{"m", 1.0}, {"k", 1.0}, {"mu", 0.1}});
  b.build = [](const ParamTable& p) {
    return SystemSpec(1, {parse("m")}, parse("0.5*k*q1^2"),
                      DissipationSpec::homogeneous_sum(one_term("mu*abs(v1)", 1.0, 1e-4)),
                      p, {"x"});
  };
  b.initial = state1(1.0, 0.0);
  b.t_end = 10.0;
  // Exact sign friction: each half swing is harmonic about -mu/k sign(v),
  // until the block sticks. Regularisation shifts this by O(smooth_eps).
  b.reference = [](const ParamTable& p, const State& init,
                   double t) -> std::optional<State> {
    const double m = p.at("m");
    const double k = p.at("k");
    const double mu = p.at("mu");
    if (!(m > 0.0) || !(k > 0.0) || mu < 0.0 || init.v[0] != 0.0) return std::nullopt;
    const double w = std::sqrt(k / m);
    const double half = M_PI / w;
    const double shift = mu / k;
    double q = init.q[0];
    double s = t - init.t;
    while (s > 0.0) {
      if (std::abs(q) <= shift) return state1(q, 0.0);
      const double centre = q > 0.0 ? shift : -shift;
      const double amp = q - centre;
      const double span = std::min(s, half);
      const double qn = centre + amp * std::cos(w * span);
      const double vn = -amp * w * std::sin(w * span);
      if (s <= half) return state1(qn, vn);
      q = centre - amp;
      s -= half;
    }
    return state1(q, 0.0);
  };
  return b;
}

BuiltinSystem pendulum_drag_2dof() {
  BuiltinSystem b;
  b.name = "pendulum_drag_2dof";
  b.description = "planar double pendulum with D = A*(v1^2+v2^2)^1.5";
  b.defaults = table({{"m1", 1.0}, {"m2", 1.0}, {"l1", 1.0}, {"l2", 1.0}, {"g", 9.81},
                      {"A", 0.1}});
  b.build = [](const ParamTable& p) {
    std::vector<Expr> mass{parse("(m1+m2)*l1^2"), parse("m2*l1*l2*cos(q1-q2)"),
                           parse("m2*l1*l2*cos(q1-q2)"), parse("m2*l2^2")};
    return SystemSpec(2, std::move(mass),
                      parse("-(m1+m2)*g*l1*cos(q1) - m2*g*l2*cos(q2)"),
                      DissipationSpec::homogeneous_sum(one_term("A*(v1^2+v2^2)^1.5", 3.0)),
                      p, {"theta1", "theta2"});
  };
  b.initial = State{0.0, vec({0.5, 0.0}), vec({0.0, 0.0})};
  b.t_end = 10.0;
  // Keeps the momentum finite-difference error of the stationarity audit
  // under its absolute tolerance at g = 9.81.
  b.integrator.dt = 5e-4;
  return b;
}

}  // namespace

SystemSpec BuiltinSystem::make(const ParamTable& overrides) const {
  ParamTable params = defaults;
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const auto& name = overrides.names()[i];
    if (!params.contains(name))
      throw BindError("builtin '" + this->name + "' has no parameter '" + name + "'");
    params.set(name, overrides.values()[i]);
  }
  return build(params);
}

const std::vector<BuiltinSystem>& builtin_catalog() {
  static const std::vector<BuiltinSystem> catalog{sho(), damped_sho(), quad_drag_particle(),
                                                  coulomb_block(), pendulum_drag_2dof()};
  return catalog;
}

const BuiltinSystem& find_builtin(std::string_view name) {
  std::string known;
  for (const auto& b : builtin_catalog()) {
    if (b.name == name) return b;
    known += (known.empty() ? "" : ", ") + b.name;
  }
  throw ModelError("unknown builtin system '" + std::string(name) + "' (known: " + known +
                   ")");
}

}  // namespace rayleigh::cli
