#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rayleigh {

enum class Function { sin, cos, exp, ln, sqrt, abs, sign, tanh, pow };

enum class BinaryOp { add, sub, mul, div, pow };

std::string_view function_name(Function f);
std::optional<Function> function_from_name(std::string_view name);
std::size_t function_arity(Function f);

// Ordered name -> value table. Bound expressions refer to parameters by slot,
// so any table with the same names in the same order can be swapped in.
class ParamTable {
 public:
  ParamTable() = default;

  // Inserts or overwrites.
  void set(std::string name, double value);
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  double at(std::string_view name) const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const ParamTable&, const ParamTable&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct CoordinateRef {
  int index;  // 1-based, as written: q1 -> 1
};
struct VelocityRef {
  int index;
};
struct ParameterRef {
  std::string name;
  int slot = -1;  // resolved by bind()
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function fn;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Constant, CoordinateRef, VelocityRef, ParameterRef, Negate,
               Binary, Call>
      data;
  std::size_t offset = 0;  // 1-based source position of the node's token
};

// Immutable scalar field over (q, v, parameters). Copies share the tree.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr constant(double value);

  const Node& root() const noexcept { return *root_; }
  const NodePtr& root_ptr() const noexcept { return root_; }

  // Validates indices against `dof` and resolves parameter names to slots of
  // `params`. Throws BindError.
  Expr bind(std::size_t dof, const ParamTable& params) const;
  bool is_bound() const;

  bool uses_velocity() const;
  bool uses_coordinate() const;
  // True when the tree contains abs() or sign(), i.e. it may have a kink.
  bool has_kink() const;
  std::vector<std::string> parameter_names() const;

  // Shortest text that parses back to the same tree.
  std::string to_string() const;

 private:
  NodePtr root_;
};

Expr parse(std::string_view source);

std::string to_string(const Node& node);

}  // namespace rayleigh
