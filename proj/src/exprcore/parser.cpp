// Recursive-descent parser for the expression language.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := number | ident | func '(' expr (',' expr)* ')' | '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus, so -x^2 is
// -(x^2) and x^-y^2 is x^(-(y^2)).

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "rayleigh/errors.hpp"
#include "rayleigh/expr.hpp"

namespace rayleigh {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr run() {
    NodePtr root = expr();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected input", {"operator", "end of input"});
    return Expr(std::move(root));
  }

 private:
  [[noreturn]] void fail(const std::string& what,
                         std::vector<std::string> expected) const {
    std::string msg = what + " at offset " + std::to_string(pos_ + 1);
    if (!expected.empty()) {
      msg += ", expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += i + 1 == expected.size() ? " or " : ", ";
        msg += expected[i];
      }
    }
    throw ParseError(msg, pos_ + 1, std::move(expected));
  }

  void skip_space() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr make(auto data, std::size_t offset) {
    return std::make_shared<const Node>(Node{std::move(data), offset});
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_space();
      const std::size_t at = pos_ + 1;
      if (accept('+')) {
        lhs = make(Binary{BinaryOp::add, lhs, term()}, at);
      } else if (accept('-')) {
        lhs = make(Binary{BinaryOp::sub, lhs, term()}, at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      const std::size_t at = pos_ + 1;
      if (accept('*')) {
        lhs = make(Binary{BinaryOp::mul, lhs, unary()}, at);
      } else if (accept('/')) {
        lhs = make(Binary{BinaryOp::div, lhs, unary()}, at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (++depth_ > kMaxDepth) fail("expression nested too deeply", {});
    struct Leave {
      int& d;
      ~Leave() { --d; }
    } leave{depth_};
    skip_space();
    const std::size_t at = pos_ + 1;
    if (accept('-')) return make(Negate{unary()}, at);
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    skip_space();
    const std::size_t at = pos_ + 1;
    if (accept('^')) return make(Binary{BinaryOp::pow, base, unary()}, at);
    return base;
  }

  NodePtr atom() {
    skip_space();
    const std::size_t at = pos_ + 1;
    if (pos_ >= src_.size()) fail("unexpected end of input", {"expression"});
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("unbalanced parenthesis", {"')'", "operator"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return make(Constant{number()}, at);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return identifier(at);
    fail(std::string("unexpected character '") + printable(c) + "'",
         {"expression"});
  }

  static std::string printable(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string(1, c);
    static const char* hex = "0123456789abcdef";
    return std::string("\\x") + hex[u >> 4] + hex[u & 0xf];
  }

  double number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("malformed number", {"digit"});
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent", {"digit"});
    }
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail("number out of range", {});
    }
    return value;
  }

  NodePtr identifier(std::size_t at) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    skip_space();
    const bool is_call = pos_ < src_.size() && src_[pos_] == '(';
    if (auto fn = function_from_name(name)) {
      if (!is_call) fail("function '" + std::string(name) + "' needs arguments", {"'('"});
      return call(*fn, at);
    }
    if (is_call) {
      pos_ = start;
      fail("unknown function '" + std::string(name) + "'", {});
    }
    if (name.size() > 1 && (name[0] == 'q' || name[0] == 'v')) {
      const std::string_view tail = name.substr(1);
      bool all_digits = true;
      for (char c : tail) all_digits &= std::isdigit(static_cast<unsigned char>(c)) != 0;
      if (all_digits) {
        int index = 0;
        auto [ptr, ec] =
            std::from_chars(tail.data(), tail.data() + tail.size(), index);
        if (ec != std::errc() || ptr != tail.data() + tail.size()) {
          pos_ = start;
          fail("index out of range in '" + std::string(name) + "'", {});
        }
        if (name[0] == 'q') return make(CoordinateRef{index}, at);
        return make(VelocityRef{index}, at);
      }
    }
    return make(ParameterRef{std::string(name), -1}, at);
  }

  NodePtr call(Function fn, std::size_t at) {
    accept('(');
    Call node{fn, {}};
    node.args.push_back(expr());
    while (accept(',')) node.args.push_back(expr());
    if (!accept(')')) fail("unterminated argument list", {"','", "')'"});
    const std::size_t arity = function_arity(fn);
    if (node.args.size() != arity) {
      pos_ = at - 1;
      fail("function '" + std::string(function_name(fn)) + "' takes " +
               std::to_string(arity) + " argument(s), got " +
               std::to_string(node.args.size()),
           {});
    }
    return make(std::move(node), at);
  }

  static constexpr int kMaxDepth = 512;

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).run(); }

}  // namespace rayleigh
