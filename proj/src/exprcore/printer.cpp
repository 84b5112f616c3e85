#include <charconv>
#include <string>

#include "overloaded.hpp"
#include "rayleigh/expr.hpp"

namespace rayleigh {

namespace {

using detail::overloaded;

// Binding strength, loosest first. Mirrors the parser's grammar levels.
enum Level { additive = 1, multiplicative = 2, prefix = 3, power = 4, atom = 5 };

int level(const Node& n) {
  return std::visit(
      overloaded{
          [](const Constant& c) { return c.value < 0 ? int(prefix) : int(atom); },
          [](const Negate&) { return int(prefix); },
          [](const Binary& b) {
            switch (b.op) {
              case BinaryOp::add:
              case BinaryOp::sub:
                return int(additive);
              case BinaryOp::mul:
              case BinaryOp::div:
                return int(multiplicative);
              case BinaryOp::pow:
                return int(power);
            }
            return int(atom);
          },
          [](const auto&) { return int(atom); },
      },
      n.data);
}

void format_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

void print(std::string& out, const Node& n);

void print_wrapped(std::string& out, const Node& n, bool parens) {
  if (parens) out += '(';
  print(out, n);
  if (parens) out += ')';
}

void print(std::string& out, const Node& n) {
  std::visit(
      overloaded{
          [&](const Constant& c) { format_number(out, c.value); },
          [&](const CoordinateRef& r) { out += 'q' + std::to_string(r.index); },
          [&](const VelocityRef& r) { out += 'v' + std::to_string(r.index); },
          [&](const ParameterRef& p) { out += p.name; },
          [&](const Negate& neg) {
            out += '-';
            print_wrapped(out, *neg.operand, level(*neg.operand) < prefix);
          },
          [&](const Binary& b) {
            const int lhs = level(*b.lhs);
            const int rhs = level(*b.rhs);
            switch (b.op) {
              case BinaryOp::add:
              case BinaryOp::sub:
                print_wrapped(out, *b.lhs, lhs < additive);
                out += b.op == BinaryOp::add ? " + " : " - ";
                print_wrapped(out, *b.rhs, rhs <= additive);
                break;
              case BinaryOp::mul:
              case BinaryOp::div:
                print_wrapped(out, *b.lhs, lhs < multiplicative);
                out += b.op == BinaryOp::mul ? "*" : "/";
                print_wrapped(out, *b.rhs, rhs <= multiplicative);
                break;
              case BinaryOp::pow:
                print_wrapped(out, *b.lhs, lhs < atom);
                out += '^';
                print_wrapped(out, *b.rhs, rhs < prefix);
                break;
            }
          },
          [&](const Call& c) {
            out += function_name(c.fn);
            out += '(';
            for (std::size_t i = 0; i < c.args.size(); ++i) {
              if (i) out += ", ";
              print(out, *c.args[i]);
            }
            out += ')';
          },
      },
      n.data);
}

}  // namespace

std::string to_string(const Node& node) {
  std::string out;
  print(out, node);
  return out;
}

}  // namespace rayleigh
