#include "rayleigh/dissipation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

// integral_0^1 D(q, u v) / u du on `panels` panels, taken in s with u = s^2
// so that a degree-n term becomes 2 s^(2n-1).
double potential_integral(const DissipationSpec& spec, const Expr& d,
                          const EvalContext& ctx, std::size_t panels) {
  std::vector<double> scaled(ctx.v.size());
  return spec.rule().integrate(
      [&](double s) {
        const double u = s * s;
        for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = u * ctx.v[j];
        return 2.0 * eval(d, EvalContext(ctx.q, scaled, *ctx.params)) / s;
      },
      0.0, 1.0, panels);
}

// Same integral carried in dual numbers seeded on v[start, start + width).
// The tangent integrand is dD/dv evaluated at u v, so du carries no 1/u.
double potential_integral_dual(const DissipationSpec& spec, const Expr& d,
                               const EvalContext& ctx, std::size_t panels,
                               std::size_t start, std::size_t width,
                               Eigen::Ref<Eigen::VectorXd> gradient) {
  const std::vector<DualScalar> q(ctx.q.begin(), ctx.q.end());
  std::vector<DualScalar> v(ctx.v.size());
  double value = 0.0;
  spec.rule().for_each_node(0.0, 1.0, panels, [&](double s, double w) {
    const double u = s * s;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double x = u * ctx.v[j];
      v[j] = (j >= start && j < start + width)
                 ? DualScalar::variable(x, width, j - start)
                 : DualScalar(x);
    }
    const DualScalar r = eval_dual(d, q, v, *ctx.params);
    value += 2.0 * w * r.value() / s;
    for (std::size_t i = 0; i < width; ++i)
      gradient[static_cast<Eigen::Index>(start + i)] += 2.0 * s * w * r.tangent(i);
  });
  return value;
}

bool converged(double previous, double current, double tolerance) {
  return std::abs(current - previous) <=
         tolerance * std::max(1.0, std::abs(current));
}

[[noreturn]] void refinement_failed(const QuadratureResult& r) {
  std::string msg = "potential quadrature did not converge:";
  for (const auto& [panels, value] : r.evidence)
    msg += " I(" + std::to_string(panels) + ")=" + std::to_string(value);
  throw AccuracyError(msg);
}

}  // namespace

double eval_D(const DissipationSpec& spec, const EvalContext& ctx) {
  if (spec.mode() == DissipationMode::general) return eval(spec.raw(), ctx);
  double d = 0.0;
  for (const auto& t : spec.terms()) d += eval(t.expr, ctx);
  return d;
}

double eval_R_closed(const DissipationSpec& spec, const EvalContext& ctx) {
  if (spec.mode() != DissipationMode::homogeneous_sum)
    throw std::invalid_argument("eval_R_closed needs homogeneous_sum mode");
  double r = 0.0;
  for (const auto& t : spec.terms()) r += eval(t.expr, ctx) / t.degree;
  return r;
}

QuadratureResult eval_R_quadrature(const DissipationSpec& spec,
                                   const EvalContext& ctx) {
  const Expr d = spec.summed_expression();
  const auto& cfg = spec.quadrature();
  QuadratureResult r;
  std::size_t panels = cfg.panels;
  r.evidence.emplace_back(panels, potential_integral(spec, d, ctx, panels));
  for (int doubling = 1; doubling <= 2; ++doubling) {
    panels *= 2;
    const double value = potential_integral(spec, d, ctx, panels);
    const double previous = r.evidence.back().second;
    r.evidence.emplace_back(panels, value);
    if (converged(previous, value, cfg.tolerance)) {
      r.value = value;
      r.panels = panels;
      r.refinement_change = std::abs(value - previous);
      r.warning = doubling > 1;
      return r;
    }
  }
  refinement_failed(r);
}

double eval_R(const DissipationSpec& spec, const EvalContext& ctx) {
  if (spec.mode() == DissipationMode::homogeneous_sum)
    return eval_R_closed(spec, ctx);
  return eval_R_quadrature(spec, ctx).value;
}

Eigen::VectorXd grad_R_v(const DissipationSpec& spec, const EvalContext& ctx) {
  const auto n = static_cast<Eigen::Index>(ctx.v.size());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);

  if (spec.mode() == DissipationMode::homogeneous_sum) {
    Eigen::VectorXd g(n);
    for (const auto& t : spec.terms()) {
      EvalOptions options;
      if (t.smooth_eps) options.kink_eps = *t.smooth_eps;
      value_and_gradient(t.expr, ctx, Wrt::velocities, g, options);
      total += g / t.degree;
    }
    return total;
  }

  // General mode: differentiate through the quadrature, refining exactly as
  // the value does.
  const auto& cfg = spec.quadrature();
  auto at_panels = [&](std::size_t panels, Eigen::VectorXd& grad) {
    grad.setZero(n);
    double value = 0.0;
    constexpr std::size_t chunk = DualScalar::kMaxDirections;
    for (std::size_t start = 0; start < ctx.v.size() || start == 0; start += chunk) {
      const std::size_t width = std::min(chunk, ctx.v.size() - start);
      value = potential_integral_dual(spec, spec.raw(), ctx, panels, start,
                                      width, grad);
      if (ctx.v.empty()) break;
    }
    return value;
  };

  QuadratureResult r;
  std::size_t panels = cfg.panels;
  Eigen::VectorXd grad;
  r.evidence.emplace_back(panels, at_panels(panels, grad));
  for (int doubling = 1; doubling <= 2; ++doubling) {
    panels *= 2;
    const double value = at_panels(panels, grad);
    const double previous = r.evidence.back().second;
    r.evidence.emplace_back(panels, value);
    if (converged(previous, value, cfg.tolerance)) return grad;
  }
  refinement_failed(r);
}

}  // namespace rayleigh
