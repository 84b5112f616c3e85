#include "rayleigh/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "overloaded.hpp"
#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

using detail::overloaded;

double value_of(double x) { return x; }
double value_of(const DualScalar& x) { return x.value(); }

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

bool is_integral(double y) {
  return std::abs(y) < 9007199254740992.0 && std::trunc(y) == y;
}

template <class T>
class Evaluator {
 public:
  Evaluator(std::span<const T> q, std::span<const T> v,
            const ParamTable& params, const EvalOptions& options)
      : q_(q), v_(v), params_(params), options_(options) {}

  T operator()(const Node& n) const {
    return std::visit(
        overloaded{
            [&](const Constant& c) { return T(c.value); },
            [&](const CoordinateRef& r) { return lookup(q_, r.index, 'q', n); },
            [&](const VelocityRef& r) { return lookup(v_, r.index, 'v', n); },
            [&](const ParameterRef& p) {
              if (p.slot < 0 ||
                  static_cast<std::size_t>(p.slot) >= params_.size())
                throw BindError("parameter '" + p.name + "' is not bound");
              return T(params_.values()[static_cast<std::size_t>(p.slot)]);
            },
            [&](const Negate& neg) { return -(*this)(*neg.operand); },
            [&](const Binary& b) { return binary(b, n); },
            [&](const Call& c) { return call(c, n); },
        },
        n.data);
  }

 private:
  T lookup(std::span<const T> xs, int index, char prefix, const Node& n) const {
    if (index < 1 || static_cast<std::size_t>(index) > xs.size())
      throw BindError(std::string(1, prefix) + std::to_string(index) +
                      " is out of range in '" + to_string(n) + "'");
    return xs[static_cast<std::size_t>(index - 1)];
  }

  T binary(const Binary& b, const Node& n) const {
    const T lhs = (*this)(*b.lhs);
    const T rhs = (*this)(*b.rhs);
    switch (b.op) {
      case BinaryOp::add:
        return lhs + rhs;
      case BinaryOp::sub:
        return lhs - rhs;
      case BinaryOp::mul:
        return lhs * rhs;
      case BinaryOp::div:
        if (value_of(rhs) == 0.0) throw DomainError("division by zero", to_string(n));
        return lhs / rhs;
      case BinaryOp::pow:
        return power(lhs, rhs, n);
    }
    return T(0.0);
  }

  T call(const Call& c, const Node& n) const {
    const T x = (*this)(*c.args[0]);
    const double xv = value_of(x);
    switch (c.fn) {
      case Function::sin:
        return apply(x, std::sin(xv), [&] { return std::cos(xv); });
      case Function::cos:
        return apply(x, std::cos(xv), [&] { return -std::sin(xv); });
      case Function::exp: {
        const double e = std::exp(xv);
        return apply(x, e, [&] { return e; });
      }
      case Function::ln:
        if (!(xv > 0.0))
          throw DomainError("logarithm of non-positive value", to_string(n));
        return apply(x, std::log(xv), [&] { return 1.0 / xv; });
      case Function::sqrt: {
        if (xv < 0.0)
          throw DomainError("square root of negative value", to_string(n));
        const double s = std::sqrt(xv);
        return apply_guarded(x, s, [&] { return 0.5 / s; });
      }
      case Function::abs:
        return apply(x, std::abs(xv), [&] {
          return options_.kink_eps > 0 ? std::tanh(xv / options_.kink_eps)
                                       : sgn(xv);
        });
      case Function::sign:
        if constexpr (std::is_same_v<T, DualScalar>) {
          if (options_.kink_eps > 0) {
            const double t = std::tanh(xv / options_.kink_eps);
            return x.chain(t, (1.0 - t * t) / options_.kink_eps);
          }
        }
        return apply(x, sgn(xv), [] { return 0.0; });
      case Function::tanh: {
        const double t = std::tanh(xv);
        return apply(x, t, [&] { return 1.0 - t * t; });
      }
      case Function::pow:
        return power(x, (*this)(*c.args[1]), n);
    }
    return T(0.0);
  }

  template <class Slope>
  static T apply(const T& x, double value, Slope slope) {
    if constexpr (std::is_same_v<T, double>) {
      return value;
    } else {
      return x.chain(value, slope());
    }
  }

  template <class Slope>
  static T apply_guarded(const T& x, double value, Slope slope) {
    if constexpr (std::is_same_v<T, double>) {
      return value;
    } else {
      return x.chain_guarded(value, slope());
    }
  }

  // Integer exponents accept any base. Other exponents need base > 0, or
  // base == 0 with a positive exponent.
  T power(const T& base, const T& exponent, const Node& n) const {
    const double x = value_of(base);
    const double y = value_of(exponent);
    const bool integral = is_integral(y);
    if (x < 0.0 && !integral)
      throw DomainError("non-integer power of a negative base", to_string(n));
    if (x == 0.0 && y < 0.0)
      throw DomainError("negative power of zero", to_string(n));
    const double value = std::pow(x, y);
    if constexpr (std::is_same_v<T, double>) {
      return value;
    } else {
      const double slope = y == 0.0 ? 0.0 : y * std::pow(x, y - 1.0);
      T result = base.chain_guarded(value, slope);
      if (exponent.has_tangent()) {
        if (x < 0.0)
          throw DomainError(
              "power with a varying exponent needs a positive base",
              to_string(n));
        const double log_slope = x > 0.0 ? value * std::log(x) : 0.0;
        result = result + exponent.chain(0.0, log_slope);
      }
      return result;
    }
  }

  std::span<const T> q_;
  std::span<const T> v_;
  const ParamTable& params_;
  const EvalOptions& options_;
};

std::size_t variable_count(const EvalContext& ctx, Wrt wrt) {
  return wrt == Wrt::velocities ? ctx.v.size() : ctx.q.size();
}

const ParamTable& params_of(const EvalContext& ctx) {
  if (ctx.params == nullptr) throw std::invalid_argument("EvalContext without parameters");
  return *ctx.params;
}

}  // namespace

double eval(const Expr& e, const EvalContext& ctx) {
  const EvalOptions options;
  return Evaluator<double>(ctx.q, ctx.v, params_of(ctx), options)(e.root());
}

DualScalar eval_dual(const Expr& e, std::span<const DualScalar> q,
                     std::span<const DualScalar> v, const ParamTable& params,
                     const EvalOptions& options) {
  return Evaluator<DualScalar>(q, v, params, options)(e.root());
}

double value_and_gradient(const Expr& e, const EvalContext& ctx, Wrt wrt,
                          Eigen::Ref<Eigen::VectorXd> gradient,
                          const EvalOptions& options) {
  const std::size_t n = variable_count(ctx, wrt);
  if (static_cast<std::size_t>(gradient.size()) != n)
    throw std::invalid_argument("gradient size does not match the context");

  std::vector<DualScalar> q(ctx.q.begin(), ctx.q.end());
  std::vector<DualScalar> v(ctx.v.begin(), ctx.v.end());
  std::vector<DualScalar>& active = wrt == Wrt::velocities ? v : q;
  const ParamTable& params = params_of(ctx);

  if (n == 0) return eval_dual(e, q, v, params, options).value();

  double value = 0.0;
  constexpr std::size_t chunk = DualScalar::kMaxDirections;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t width = std::min(chunk, n - start);
    for (std::size_t i = 0; i < width; ++i)
      active[start + i] =
          DualScalar::variable(active[start + i].value(), width, i);
    const DualScalar r = eval_dual(e, q, v, params, options);
    value = r.value();
    for (std::size_t i = 0; i < width; ++i) {
      gradient[static_cast<Eigen::Index>(start + i)] = r.tangent(i);
      active[start + i] = DualScalar(active[start + i].value());
    }
  }
  return value;
}

Eigen::VectorXd grad_q(const Expr& e, const EvalContext& ctx,
                       const EvalOptions& options) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(ctx.q.size()));
  value_and_gradient(e, ctx, Wrt::coordinates, g, options);
  return g;
}

Eigen::VectorXd grad_v(const Expr& e, const EvalContext& ctx,
                       const EvalOptions& options) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(ctx.v.size()));
  value_and_gradient(e, ctx, Wrt::velocities, g, options);
  return g;
}

Eigen::VectorXd fd_gradient(const Expr& e, const EvalContext& ctx, Wrt wrt,
                            double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("fd_gradient: step must be positive and finite");
  std::vector<double> q(ctx.q.begin(), ctx.q.end());
  std::vector<double> v(ctx.v.begin(), ctx.v.end());
  std::vector<double>& x = wrt == Wrt::velocities ? v : q;
  const ParamTable& params = params_of(ctx);

  Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double saved = x[j];
    x[j] = saved + step;
    const double plus = eval(e, EvalContext(q, v, params));
    x[j] = saved - step;
    const double minus = eval(e, EvalContext(q, v, params));
    x[j] = saved;
    g[static_cast<Eigen::Index>(j)] = (plus - minus) / (2.0 * step);
  }
  return g;
}

}  // namespace rayleigh
