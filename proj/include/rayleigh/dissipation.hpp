#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/eval.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh {

// Dissipation potential R built from D.
//
// R is the solution of v . dR/dv = D normalised by R(q, 0) = 0:
//
//   R(q, v) = integral_0^1 D(q, u v) / u du.
//
// A term homogeneous of degree n integrates to D_n / n, which is the closed
// form used in homogeneous_sum mode. General mode evaluates the integral by
// composite Gauss-Legendre quadrature.

double eval_D(const DissipationSpec& spec, const EvalContext& ctx);

// sum_n D_n / n. Requires homogeneous_sum mode.
double eval_R_closed(const DissipationSpec& spec, const EvalContext& ctx);

struct QuadratureResult {
  double value = 0.0;
  std::size_t panels = 0;          // panel count of the returned value
  double refinement_change = 0.0;  // |I(panels) - I(panels / 2)|
  bool warning = false;            // converged only after the second doubling
  std::vector<std::pair<std::size_t, double>> evidence;  // (panels, I)
};

// Quadrature of the potential integral over D (the term sum in
// homogeneous_sum mode). Throws AccuracyError when the result still moves by
// more than the tolerance after doubling the panels twice.
QuadratureResult eval_R_quadrature(const DissipationSpec& spec,
                                   const EvalContext& ctx);

// Closed form in homogeneous_sum mode, quadrature in general mode.
double eval_R(const DissipationSpec& spec, const EvalContext& ctx);

// dR/dv, exact up to the quadrature in general mode. Terms with smooth_eps
// use the regularised sign.
Eigen::VectorXd grad_R_v(const DissipationSpec& spec, const EvalContext& ctx);

// Evaluatable potential tied to its dissipation function.
class PotentialR {
 public:
  explicit PotentialR(const DissipationSpec& spec) : spec_(&spec) {}

  DissipationMode mode() const noexcept { return spec_->mode(); }
  const DissipationSpec& spec() const noexcept { return *spec_; }

  double operator()(const EvalContext& ctx) const { return eval_R(*spec_, ctx); }
  Eigen::VectorXd gradient(const EvalContext& ctx) const {
    return grad_R_v(*spec_, ctx);
  }

 private:
  const DissipationSpec* spec_;
};

}  // namespace rayleigh
