#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rayleigh/dynamics.hpp"
#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (fifth minus fourth order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// First-order form y = (q, v), y' = (v, a).
struct Slope {
  Eigen::VectorXd dq;
  Eigen::VectorXd dv;
};

Slope slope(const SystemSpec& sys, double t, const Eigen::VectorXd& q,
            const Eigen::VectorXd& v) {
  return {v, accel(sys, State{t, q, v})};
}

bool finite(const State& s) { return s.q.allFinite() && s.v.allFinite(); }

[[noreturn]] void diverged(double t, double dt) {
  throw DynamicsError(DynamicsError::Kind::divergence,
                      "non-finite state in step from t=" + std::to_string(t) +
                          " with dt=" + std::to_string(dt),
                      t);
}

Sample make_sample(const SystemSpec& sys, const State& s, bool forces) {
  const Eigen::VectorXd a = accel(sys, s);
  Sample out{s, diagnostics(sys, s, a), std::nullopt};
  if (forces) out.forces = model_forces(sys, s, a);
  return out;
}

void check_config(const IntegratorConfig& cfg) {
  if (cfg.method == Method::rk4 && !(cfg.dt > 0.0))
    throw std::invalid_argument("rk4 needs dt > 0");
  if (cfg.method == Method::rk45 &&
      (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.dt > 0.0)))
    throw std::invalid_argument("rk45 needs positive tolerances and initial dt");
  if (cfg.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (cfg.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

}  // namespace

State step_rk4(const SystemSpec& sys, const State& s, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step_rk4: dt must be positive");
  if (!finite(s)) diverged(s.t, dt);
  const double h = dt;
  const Slope k1 = slope(sys, s.t, s.q, s.v);
  const Slope k2 = slope(sys, s.t + h / 2, s.q + h / 2 * k1.dq, s.v + h / 2 * k1.dv);
  const Slope k3 = slope(sys, s.t + h / 2, s.q + h / 2 * k2.dq, s.v + h / 2 * k2.dv);
  const Slope k4 = slope(sys, s.t + h, s.q + h * k3.dq, s.v + h * k3.dv);
  State out;
  out.t = s.t + h;
  out.q = s.q + h / 6 * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq);
  out.v = s.v + h / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  if (!finite(out)) diverged(s.t, dt);
  return out;
}

bool rk45_accept(double error_norm) { return error_norm <= 1.0; }

double rk45_step_factor(double error_norm) {
  if (error_norm <= 0.0) return 5.0;
  return std::min(5.0, std::max(0.2, 0.9 * std::pow(error_norm, -0.2)));
}

Rk45Step step_rk45(const SystemSpec& sys, const State& s, double dt_try,
                   const IntegratorConfig& cfg) {
  if (!(dt_try > 0.0) || !std::isfinite(dt_try))
    throw std::invalid_argument("step_rk45: dt must be positive");
  if (!finite(s)) diverged(s.t, dt_try);
  if (dt_try < 1e-14 * (1.0 + std::abs(s.t)))
    throw DynamicsError(DynamicsError::Kind::stiffness,
                        "step size underflow at t=" + std::to_string(s.t) +
                            " (dt=" + std::to_string(dt_try) + ")",
                        s.t);

  const double h = dt_try;
  const double t = s.t;
  const auto& q = s.q;
  const auto& v = s.v;
  const Slope k1 = slope(sys, t, q, v);
  const Slope k2 = slope(sys, t + c2 * h, q + h * (a21 * k1.dq),
                         v + h * (a21 * k1.dv));
  const Slope k3 = slope(sys, t + c3 * h, q + h * (a31 * k1.dq + a32 * k2.dq),
                         v + h * (a31 * k1.dv + a32 * k2.dv));
  const Slope k4 = slope(
      sys, t + c4 * h, q + h * (a41 * k1.dq + a42 * k2.dq + a43 * k3.dq),
      v + h * (a41 * k1.dv + a42 * k2.dv + a43 * k3.dv));
  const Slope k5 = slope(
      sys, t + c5 * h,
      q + h * (a51 * k1.dq + a52 * k2.dq + a53 * k3.dq + a54 * k4.dq),
      v + h * (a51 * k1.dv + a52 * k2.dv + a53 * k3.dv + a54 * k4.dv));
  const Slope k6 = slope(
      sys, t + h,
      q + h * (a61 * k1.dq + a62 * k2.dq + a63 * k3.dq + a64 * k4.dq + a65 * k5.dq),
      v + h * (a61 * k1.dv + a62 * k2.dv + a63 * k3.dv + a64 * k4.dv + a65 * k5.dv));

  State next;
  next.t = t + h;
  next.q = q + h * (b1 * k1.dq + b3 * k3.dq + b4 * k4.dq + b5 * k5.dq + b6 * k6.dq);
  next.v = v + h * (b1 * k1.dv + b3 * k3.dv + b4 * k4.dv + b5 * k5.dv + b6 * k6.dv);
  if (!finite(next)) diverged(t, h);
  const Slope k7 = slope(sys, next.t, next.q, next.v);

  const Eigen::VectorXd err_q =
      h * (e1 * k1.dq + e3 * k3.dq + e4 * k4.dq + e5 * k5.dq + e6 * k6.dq + e7 * k7.dq);
  const Eigen::VectorXd err_v =
      h * (e1 * k1.dv + e3 * k3.dv + e4 * k4.dv + e5 * k5.dv + e6 * k6.dv + e7 * k7.dv);

  double sum = 0.0;
  auto accumulate = [&](const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                        const Eigen::VectorXd& y1) {
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double scale =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = err[i] / scale;
      sum += r * r;
    }
  };
  accumulate(err_q, q, next.q);
  accumulate(err_v, v, next.v);
  const double norm = std::sqrt(sum / static_cast<double>(2 * q.size()));
  if (!std::isfinite(norm)) diverged(t, h);

  Rk45Step out;
  out.error_norm = norm;
  out.accepted = rk45_accept(norm);
  out.dt_next = h * rk45_step_factor(norm);
  out.state = out.accepted ? std::move(next) : s;
  return out;
}

Trajectory integrate(const SystemSpec& sys, const State& init, double t_end,
                     const IntegratorConfig& cfg) {
  check_config(cfg);
  if (!(t_end > init.t)) throw std::invalid_argument("t_end must exceed the initial time");
  if (!finite(init) || !std::isfinite(init.t))
    throw std::invalid_argument("initial state must be finite");
  const auto n = static_cast<Eigen::Index>(sys.dof());
  if (init.q.size() != n || init.v.size() != n)
    throw std::invalid_argument("initial state dimension does not match the system");

  Trajectory traj;
  traj.method = cfg.method;
  traj.rel_tol = cfg.rel_tol;
  traj.abs_tol = cfg.abs_tol;
  traj.samples.push_back(make_sample(sys, init, cfg.record_forces));

  State s = init;
  auto with_time = [&](auto&& f) {
    try {
      return f();
    } catch (const DynamicsError&) {
      throw;
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " (integrating from t=" +
                  std::to_string(s.t) + ")");
    }
  };

  if (cfg.method == Method::rk4) {
    traj.dt = cfg.dt;
    const double span = t_end - init.t;
    const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
    if (steps > cfg.max_steps)
      throw DynamicsError(DynamicsError::Kind::max_steps,
                          "rk4 needs " + std::to_string(steps) +
                              " steps, more than max_steps",
                          init.t);
    for (std::size_t k = 1; k <= steps; ++k) {
      const double t_next =
          k == steps ? t_end : init.t + static_cast<double>(k) * cfg.dt;
      s = with_time([&] { return step_rk4(sys, s, t_next - s.t); });
      s.t = t_next;
      ++traj.steps_taken;
      if (k % cfg.sample_every == 0 || k == steps)
        traj.samples.push_back(make_sample(sys, s, cfg.record_forces));
    }
    return traj;
  }

  double dt = cfg.dt;
  std::size_t accepted = 0;
  while (s.t < t_end) {
    if (traj.steps_taken + traj.steps_rejected >= cfg.max_steps)
      throw DynamicsError(DynamicsError::Kind::max_steps,
                          "max_steps exceeded at t=" + std::to_string(s.t), s.t);
    bool last = false;
    double h = dt;
    if (s.t + h >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
      h = t_end - s.t;
      last = true;
    }
    Rk45Step r = with_time([&] { return step_rk45(sys, s, h, cfg); });
    if (!r.accepted) {
      ++traj.steps_rejected;
      dt = r.dt_next;
      continue;
    }
    s = std::move(r.state);
    if (last) s.t = t_end;
    ++traj.steps_taken;
    ++accepted;
    if (accepted % cfg.sample_every == 0 || last)
      traj.samples.push_back(make_sample(sys, s, cfg.record_forces));
    // A clipped final step says nothing about the natural step size.
    if (!last || r.dt_next < dt) dt = r.dt_next;
    if (last) break;
  }
  return traj;
}

}  // namespace rayleigh
