#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/expr.hpp"
#include "rayleigh/quadrature.hpp"

namespace rayleigh {

struct QuadratureConfig {
  std::size_t node_count = 64;
  std::size_t panels = 4;
  double tolerance = 1e-10;

  friend bool operator==(const QuadratureConfig&,
                         const QuadratureConfig&) = default;
};

// One velocity-homogeneous piece D_n of the dissipation function.
struct DissipationTerm {
  Expr expr;
  double degree = 2.0;
  // Replaces sign(v) by tanh(v / smooth_eps) when this term's force is
  // evaluated. Unset means the exact, discontinuous sign with sign(0) = 0.
  std::optional<double> smooth_eps;
};

enum class DissipationMode { homogeneous_sum, general };

// The dissipation function D(q, v), the only constitutive input for the
// nonconservative forces. Either a sum of declared-degree homogeneous terms,
// whose potential has the closed form R = sum D_n / n, or a general
// expression integrated numerically.
class DissipationSpec {
 public:
  DissipationSpec();  // D = 0

  static DissipationSpec homogeneous_sum(std::vector<DissipationTerm> terms,
                                         QuadratureConfig quadrature = {});
  static DissipationSpec general(Expr raw, QuadratureConfig quadrature = {});

  DissipationMode mode() const noexcept { return mode_; }
  const std::vector<DissipationTerm>& terms() const noexcept { return terms_; }
  const Expr& raw() const noexcept { return raw_; }
  const QuadratureConfig& quadrature() const noexcept { return quadrature_; }
  const GaussLegendreRule& rule() const noexcept { return *rule_; }

  // True for homogeneous_sum with no terms.
  bool empty() const noexcept;
  bool has_kink() const;
  // Largest smooth_eps over terms, 0 when none is set.
  double max_smooth_eps() const;

  // D as a single expression: the term sum, or `raw`.
  Expr summed_expression() const;

  DissipationSpec bind(std::size_t dof, const ParamTable& params) const;

 private:
  DissipationMode mode_ = DissipationMode::homogeneous_sum;
  std::vector<DissipationTerm> terms_;
  Expr raw_;
  QuadratureConfig quadrature_;
  std::shared_ptr<const GaussLegendreRule> rule_;
};

// A discrete mechanical system: T = v.M(q)v/2, V(q), D(q, v). All
// expressions are bound against `params` on construction.
class SystemSpec {
 public:
  // `mass_matrix` holds dof*dof entries in row-major order. Throws BindError
  // or ModelError.
  SystemSpec(std::size_t dof, std::vector<Expr> mass_matrix, Expr potential,
             DissipationSpec dissipation, ParamTable params,
             std::vector<std::string> labels = {});

  std::size_t dof() const noexcept { return dof_; }
  const Expr& mass_entry(std::size_t i, std::size_t j) const {
    return mass_[i * dof_ + j];
  }
  const std::vector<Expr>& mass_entries() const noexcept { return mass_; }
  const Expr& potential() const noexcept { return potential_; }
  const DissipationSpec& dissipation() const noexcept { return dissipation_; }
  const ParamTable& params() const noexcept { return params_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool mass_depends_on_q() const noexcept { return mass_depends_on_q_; }

  // Same system with some parameter values replaced. Names must exist.
  SystemSpec with_params(const ParamTable& overrides) const;
  SystemSpec with_dissipation(DissipationSpec dissipation) const;

  // M(q). Throws ModelError when it is not symmetric to 1e-12.
  Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const;
  // dM/dq_j for j = 0..dof-1.
  std::vector<Eigen::MatrixXd> mass_matrix_partials(const Eigen::VectorXd& q) const;
  double kinetic_energy(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const;
  double potential_energy(const Eigen::VectorXd& q) const;
  Eigen::VectorXd potential_gradient(const Eigen::VectorXd& q) const;

 private:
  std::size_t dof_;
  std::vector<Expr> mass_;
  std::vector<bool> mass_varies_;
  Expr potential_;
  DissipationSpec dissipation_;
  ParamTable params_;
  std::vector<std::string> labels_;
  bool mass_depends_on_q_ = false;
};

}  // namespace rayleigh
