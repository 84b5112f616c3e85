#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/dual.hpp"
#include "rayleigh/expr.hpp"

namespace rayleigh {

// Point of evaluation. The spans must outlive the context.
struct EvalContext {
  std::span<const double> q;
  std::span<const double> v;
  const ParamTable* params = nullptr;

  EvalContext(std::span<const double> q_, std::span<const double> v_,
              const ParamTable& p)
      : q(q_), v(v_), params(&p) {}
  EvalContext(const Eigen::VectorXd& q_, const Eigen::VectorXd& v_,
              const ParamTable& p)
      : q(q_.data(), static_cast<std::size_t>(q_.size())),
        v(v_.data(), static_cast<std::size_t>(v_.size())),
        params(&p) {}
};

struct EvalOptions {
  // When > 0, the derivative of abs(x) and the value of sign(x) use
  // tanh(x / kink_eps) instead of the discontinuous sign. Values of abs are
  // unaffected. Only meaningful for dual evaluation.
  double kink_eps = 0.0;
};

enum class Wrt { coordinates, velocities };

double eval(const Expr& e, const EvalContext& ctx);

// Dual evaluation with caller-seeded q and v. Exposed for the dissipation
// potential, which differentiates through its quadrature.
DualScalar eval_dual(const Expr& e, std::span<const DualScalar> q,
                     std::span<const DualScalar> v, const ParamTable& params,
                     const EvalOptions& options = {});

Eigen::VectorXd grad_q(const Expr& e, const EvalContext& ctx,
                       const EvalOptions& options = {});
Eigen::VectorXd grad_v(const Expr& e, const EvalContext& ctx,
                       const EvalOptions& options = {});

// Value and exact gradient with respect to `wrt`, one dual sweep per chunk of
// DualScalar::kMaxDirections variables.
double value_and_gradient(const Expr& e, const EvalContext& ctx, Wrt wrt,
                          Eigen::Ref<Eigen::VectorXd> gradient,
                          const EvalOptions& options = {});

// Central finite differences. Test and audit use only.
Eigen::VectorXd fd_gradient(const Expr& e, const EvalContext& ctx, Wrt wrt,
                            double step);

}  // namespace rayleigh
