#include "rayleigh/system.hpp"

#include <cmath>

#include "rayleigh/errors.hpp"
#include "rayleigh/eval.hpp"
#include "rayleigh/random.hpp"

namespace rayleigh {

namespace {

constexpr std::uint64_t kRestCheckSeed = 0x7265737421ULL;
constexpr std::size_t kRestCheckSamples = 16;

void validate_quadrature(const QuadratureConfig& c) {
  if (c.node_count < 8)
    throw ModelError("quadrature.node_count must be at least 8");
  if (c.panels < 1) throw ModelError("quadrature.panels must be at least 1");
  if (!(c.tolerance > 0.0))
    throw ModelError("quadrature.tolerance must be positive");
}

NodePtr add_nodes(NodePtr lhs, NodePtr rhs) {
  return std::make_shared<const Node>(
      Node{Binary{BinaryOp::add, std::move(lhs), std::move(rhs)}, 1});
}

}  // namespace

DissipationSpec::DissipationSpec()
    : rule_(std::make_shared<const GaussLegendreRule>(quadrature_.node_count)) {}

DissipationSpec DissipationSpec::homogeneous_sum(
    std::vector<DissipationTerm> terms, QuadratureConfig quadrature) {
  validate_quadrature(quadrature);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (!(t.degree > 0.0) || !std::isfinite(t.degree)) {
      throw ModelError("dissipation term " + std::to_string(i + 1) + " ('" +
                       t.expr.to_string() +
                       "') must have degree > 0: a degree-0 part makes the "
                       "potential integral diverge");
    }
    if (t.smooth_eps && !(*t.smooth_eps > 0.0))
      throw ModelError("dissipation term " + std::to_string(i + 1) +
                       ": smooth_eps must be positive");
  }
  DissipationSpec spec;
  spec.mode_ = DissipationMode::homogeneous_sum;
  spec.terms_ = std::move(terms);
  spec.quadrature_ = quadrature;
  spec.rule_ = std::make_shared<const GaussLegendreRule>(quadrature.node_count);
  return spec;
}

DissipationSpec DissipationSpec::general(Expr raw, QuadratureConfig quadrature) {
  validate_quadrature(quadrature);
  DissipationSpec spec;
  spec.mode_ = DissipationMode::general;
  spec.raw_ = std::move(raw);
  spec.quadrature_ = quadrature;
  spec.rule_ = std::make_shared<const GaussLegendreRule>(quadrature.node_count);
  return spec;
}

bool DissipationSpec::empty() const noexcept {
  return mode_ == DissipationMode::homogeneous_sum && terms_.empty();
}

bool DissipationSpec::has_kink() const {
  if (mode_ == DissipationMode::general) return raw_.has_kink();
  for (const auto& t : terms_)
    if (t.expr.has_kink()) return true;
  return false;
}

double DissipationSpec::max_smooth_eps() const {
  double eps = 0.0;
  for (const auto& t : terms_)
    if (t.smooth_eps) eps = std::max(eps, *t.smooth_eps);
  return eps;
}

Expr DissipationSpec::summed_expression() const {
  if (mode_ == DissipationMode::general) return raw_;
  if (terms_.empty()) return Expr::constant(0.0);
  NodePtr sum = terms_.front().expr.root_ptr();
  for (std::size_t i = 1; i < terms_.size(); ++i)
    sum = add_nodes(sum, terms_[i].expr.root_ptr());
  return Expr(sum);
}

DissipationSpec DissipationSpec::bind(std::size_t dof,
                                      const ParamTable& params) const {
  DissipationSpec out = *this;
  for (auto& t : out.terms_) t.expr = t.expr.bind(dof, params);
  out.raw_ = raw_.bind(dof, params);
  return out;
}

SystemSpec::SystemSpec(std::size_t dof, std::vector<Expr> mass_matrix,
                       Expr potential, DissipationSpec dissipation,
                       ParamTable params, std::vector<std::string> labels)
    : dof_(dof), params_(std::move(params)), labels_(std::move(labels)) {
  if (dof == 0) throw ModelError("dof must be positive");
  if (mass_matrix.size() != dof * dof)
    throw ModelError("mass matrix must have " + std::to_string(dof * dof) +
                     " entries, got " + std::to_string(mass_matrix.size()));
  if (!labels_.empty() && labels_.size() != dof)
    throw ModelError("labels must name every coordinate");

  mass_.reserve(mass_matrix.size());
  for (std::size_t k = 0; k < mass_matrix.size(); ++k) {
    Expr e = mass_matrix[k].bind(dof, params_);
    if (e.uses_velocity())
      throw BindError("mass_matrix[" + std::to_string(k / dof) + "][" +
                      std::to_string(k % dof) +
                      "] must not reference velocities");
    mass_varies_.push_back(e.uses_coordinate());
    mass_depends_on_q_ = mass_depends_on_q_ || mass_varies_.back();
    mass_.push_back(std::move(e));
  }
  potential_ = potential.bind(dof, params_);
  if (potential_.uses_velocity())
    throw BindError("potential must not reference velocities");
  dissipation_ = dissipation.bind(dof, params_);

  if (dissipation_.mode() == DissipationMode::general) {
    // R(q, 0) = 0 and a finite potential integral need D(q, 0) = 0.
    SplitMix64 rng(kRestCheckSeed);
    const Eigen::VectorXd rest = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof));
    for (std::size_t i = 0; i < kRestCheckSamples; ++i) {
      const SampledState s = sample_state(rng, dof);
      const double d = eval(dissipation_.raw(), EvalContext(s.q, rest, params_));
      if (std::abs(d) > 1e-12)
        throw ModelError("general dissipation must vanish at rest, but D(q, 0) = " +
                         std::to_string(d) +
                         "; a non-vanishing part makes the potential integral diverge");
    }
  }
}

SystemSpec SystemSpec::with_params(const ParamTable& overrides) const {
  ParamTable params = params_;
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const auto& name = overrides.names()[i];
    if (!params.contains(name))
      throw BindError("unknown parameter '" + name + "'");
    params.set(name, overrides.values()[i]);
  }
  return SystemSpec(dof_, mass_, potential_, dissipation_, std::move(params),
                    labels_);
}

SystemSpec SystemSpec::with_dissipation(DissipationSpec dissipation) const {
  return SystemSpec(dof_, mass_, potential_, std::move(dissipation), params_,
                    labels_);
}

Eigen::MatrixXd SystemSpec::mass_matrix(const Eigen::VectorXd& q) const {
  const auto n = static_cast<Eigen::Index>(dof_);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const EvalContext ctx(q, zero, params_);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = eval(mass_[static_cast<std::size_t>(i * n + j)], ctx);
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ModelError("mass matrix is not symmetric");
  return m;
}

std::vector<Eigen::MatrixXd> SystemSpec::mass_matrix_partials(
    const Eigen::VectorXd& q) const {
  const auto n = static_cast<Eigen::Index>(dof_);
  std::vector<Eigen::MatrixXd> partials(dof_, Eigen::MatrixXd::Zero(n, n));
  if (!mass_depends_on_q_) return partials;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const EvalContext ctx(q, zero, params_);
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto k = static_cast<std::size_t>(i * n + j);
      if (!mass_varies_[k]) continue;
      value_and_gradient(mass_[k], ctx, Wrt::coordinates, g);
      for (Eigen::Index k = 0; k < n; ++k) {
        partials[static_cast<std::size_t>(k)](i, j) = g[k];
        partials[static_cast<std::size_t>(k)](j, i) = g[k];
      }
    }
  }
  return partials;
}

double SystemSpec::kinetic_energy(const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& v) const {
  return 0.5 * v.dot(mass_matrix(q) * v);
}

double SystemSpec::potential_energy(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(q.size());
  return eval(potential_, EvalContext(q, zero, params_));
}

Eigen::VectorXd SystemSpec::potential_gradient(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(q.size());
  return grad_q(potential_, EvalContext(q, zero, params_));
}

}  // namespace rayleigh
