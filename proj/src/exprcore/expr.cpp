#include "rayleigh/expr.hpp"

#include <algorithm>
#include <array>
#include <functional>

#include "rayleigh/errors.hpp"
#include "overloaded.hpp"

namespace rayleigh {

namespace {

using detail::overloaded;

constexpr std::array<std::pair<std::string_view, Function>, 9> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"exp", Function::exp},
    {"ln", Function::ln},
    {"sqrt", Function::sqrt},
    {"abs", Function::abs},
    {"sign", Function::sign},
    {"tanh", Function::tanh},
    {"pow", Function::pow},
}};

// Pre-order walk; stops early when `f` returns true.
bool any_node(const Node& node, const std::function<bool(const Node&)>& f) {
  if (f(node)) return true;
  return std::visit(
      overloaded{
          [&](const Negate& n) { return any_node(*n.operand, f); },
          [&](const Binary& b) {
            return any_node(*b.lhs, f) || any_node(*b.rhs, f);
          },
          [&](const Call& c) {
            return std::any_of(c.args.begin(), c.args.end(),
                               [&](const NodePtr& a) { return any_node(*a, f); });
          },
          [](const auto&) { return false; },
      },
      node.data);
}

NodePtr bind_node(const NodePtr& node, std::size_t dof,
                  const ParamTable& params) {
  auto check_index = [&](int index, char prefix) {
    if (index < 1 || static_cast<std::size_t>(index) > dof) {
      throw BindError(std::string(1, prefix) + std::to_string(index) +
                      " at offset " + std::to_string(node->offset) +
                      " is out of range for a system with " +
                      std::to_string(dof) + " degrees of freedom");
    }
  };
  auto rebuilt = [&](auto&& data) {
    return std::make_shared<const Node>(Node{std::move(data), node->offset});
  };
  return std::visit(
      overloaded{
          [&](const Constant&) { return node; },
          [&](const CoordinateRef& c) {
            check_index(c.index, 'q');
            return node;
          },
          [&](const VelocityRef& v) {
            check_index(v.index, 'v');
            return node;
          },
          [&](const ParameterRef& p) -> NodePtr {
            auto slot = params.find(p.name);
            if (!slot) {
              throw BindError("unknown parameter '" + p.name + "' at offset " +
                              std::to_string(node->offset));
            }
            return rebuilt(ParameterRef{p.name, static_cast<int>(*slot)});
          },
          [&](const Negate& n) -> NodePtr {
            return rebuilt(Negate{bind_node(n.operand, dof, params)});
          },
          [&](const Binary& b) -> NodePtr {
            return rebuilt(Binary{b.op, bind_node(b.lhs, dof, params),
                                  bind_node(b.rhs, dof, params)});
          },
          [&](const Call& c) -> NodePtr {
            Call bound{c.fn, {}};
            bound.args.reserve(c.args.size());
            for (const auto& a : c.args)
              bound.args.push_back(bind_node(a, dof, params));
            return rebuilt(std::move(bound));
          },
      },
      node->data);
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset,
                       std::vector<std::string> expected)
    : Error(std::move(message)),
      offset_(offset),
      expected_(std::move(expected)) {}

DomainError::DomainError(const std::string& what, std::string subexpression)
    : Error(what + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

std::string_view function_name(Function f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  for (const auto& [n, fn] : kFunctions)
    if (n == name) return fn;
  return std::nullopt;
}

std::size_t function_arity(Function f) { return f == Function::pow ? 2 : 1; }

void ParamTable::set(std::string name, double value) {
  if (auto slot = find(name)) {
    values_[*slot] = value;
    return;
  }
  names_.push_back(std::move(name));
  values_.push_back(value);
}

std::optional<std::size_t> ParamTable::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

double ParamTable::at(std::string_view name) const {
  auto slot = find(name);
  if (!slot) throw BindError("unknown parameter '" + std::string(name) + "'");
  return values_[*slot];
}

Expr::Expr() : root_(std::make_shared<const Node>(Node{Constant{0.0}, 1})) {}

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{Constant{value}, 1}));
}

Expr Expr::bind(std::size_t dof, const ParamTable& params) const {
  return Expr(bind_node(root_, dof, params));
}

bool Expr::is_bound() const {
  return !any_node(*root_, [](const Node& n) {
    auto* p = std::get_if<ParameterRef>(&n.data);
    return p != nullptr && p->slot < 0;
  });
}

bool Expr::uses_velocity() const {
  return any_node(*root_, [](const Node& n) {
    return std::holds_alternative<VelocityRef>(n.data);
  });
}

bool Expr::uses_coordinate() const {
  return any_node(*root_, [](const Node& n) {
    return std::holds_alternative<CoordinateRef>(n.data);
  });
}

bool Expr::has_kink() const {
  return any_node(*root_, [](const Node& n) {
    auto* c = std::get_if<Call>(&n.data);
    return c != nullptr && (c->fn == Function::abs || c->fn == Function::sign);
  });
}

std::vector<std::string> Expr::parameter_names() const {
  std::vector<std::string> names;
  any_node(*root_, [&](const Node& n) {
    if (auto* p = std::get_if<ParameterRef>(&n.data)) {
      if (std::find(names.begin(), names.end(), p->name) == names.end())
        names.push_back(p->name);
    }
    return false;
  });
  return names;
}

std::string Expr::to_string() const { return rayleigh::to_string(*root_); }

}  // namespace rayleigh
