#include "rayleigh/checks.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rayleigh/dissipation.hpp"
#include "rayleigh/eval.hpp"

namespace rayleigh {

namespace {

void require_samples(std::size_t samples) {
  if (samples < 1) throw std::invalid_argument("check needs at least one sample");
}

}  // namespace

CheckReport homogeneity_check(const SystemSpec& sys, const DissipationTerm& term,
                              std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  constexpr std::array<double, 3> kScales{0.5, 2.0, 3.0};

  const Expr e = term.expr.bind(sys.dof(), sys.params());
  const ParamTable& params = sys.params();
  CheckReport report;
  report.check = "homogeneity";
  report.samples = samples;
  for (double s : kScales) report.by_lambda.emplace_back(s, 0.0);

  SplitMix64 rng(seed);
  const Eigen::VectorXd rest = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dof()));
  for (std::size_t i = 0; i < samples; ++i) {
    const SampledState st = sample_state(rng, sys.dof());
    const double at_rest = eval(e, EvalContext(st.q, rest, params));
    if (std::abs(at_rest) > 1e-12) {
      report.pass = false;
      report.detail = "term does not vanish at rest";
      report.worst = std::max(report.worst, std::abs(at_rest));
      if (!report.witness) report.witness = SampledState{st.q, rest};
    }

    const double base = eval(e, EvalContext(st.q, st.v, params));
    for (std::size_t k = 0; k < kScales.size(); ++k) {
      const Eigen::VectorXd scaled = kScales[k] * st.v;
      const double lhs = eval(e, EvalContext(st.q, scaled, params));
      const double rhs = std::pow(kScales[k], term.degree) * base;
      const double diff = std::abs(lhs - rhs);
      const double rel = std::abs(rhs) > 0.0 ? diff / std::abs(rhs) : diff;
      auto& worst_here = report.by_lambda[k].second;
      worst_here = std::max(worst_here, rel);
      if (diff > 1e-9 * (1.0 + std::abs(rhs))) report.pass = false;
      if (rel > report.worst) {
        report.worst = rel;
        report.witness = st;
      }
    }
  }
  if (!report.pass && report.detail.empty()) {
    std::ostringstream msg;
    msg << "'" << term.expr.to_string() << "' is not homogeneous of degree " << term.degree;
    report.detail = msg.str();
  }
  return report;
}

CheckReport euler_identity_check(const SystemSpec& sys, std::size_t samples,
                                 std::uint64_t seed, double tolerance) {
  require_samples(samples);
  const DissipationSpec& spec = sys.dissipation();
  CheckReport report;
  report.check = "euler_identity";
  report.samples = samples;

  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const SampledState st = sample_state(rng, sys.dof());
    const EvalContext ctx(st.q, st.v, sys.params());
    const double d = eval_D(spec, ctx);
    const double power = st.v.dot(grad_R_v(spec, ctx));
    const double violation = std::abs(power - d) / (1.0 + std::abs(d));
    if (violation > tolerance) report.pass = false;
    if (violation > report.worst || !report.witness) {
      report.worst = std::max(report.worst, violation);
      report.witness = st;
    }
  }
  if (!report.pass) report.detail = "v . dR/dv differs from D";
  return report;
}

CheckReport positivity_scan(const SystemSpec& sys, std::size_t samples,
                            std::uint64_t seed) {
  require_samples(samples);
  CheckReport report;
  report.check = "positivity";
  report.samples = samples;
  report.worst = std::numeric_limits<double>::infinity();

  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const SampledState st = sample_state(rng, sys.dof());
    const double d = eval_D(sys.dissipation(), EvalContext(st.q, st.v, sys.params()));
    if (d < report.worst) {
      report.worst = d;
      report.witness = st;
    }
  }
  report.pass = report.worst >= -1e-12;
  if (!report.pass) report.detail = "D is negative at the witness state";
  return report;
}

}  // namespace rayleigh
