#pragma once

// Recursive-descent parser and MPFR evaluator for the sequence expression
// mini-language: arithmetic in the index variable n with + - * / ^ and the
// functions floor, sqrt, cbrt, log, cos. '^' binds tightest and associates
// right; unary minus sits between '^' and '*'.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cantor/numeric.hpp"

namespace cantor::expr {

enum class NodeKind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Floor, Sqrt, Cbrt, Log, Cos };

struct Node {
  NodeKind kind;
  std::string literal;   // Number: decimal text
  Func func{};           // Call
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

using Ast = std::shared_ptr<const Node>;

namespace detail {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t base_offset = 0;  // for error positions within a larger string

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, base_offset + pos);
  }

  std::unique_ptr<Node> parse_expression() {
    auto lhs = parse_term();
    for (;;) {
      skip_ws();
      if (eat('+')) {
        auto n = std::make_unique<Node>();
        n->kind = NodeKind::Add;
        n->lhs = std::move(lhs);
        n->rhs = parse_term();
        lhs = std::move(n);
      } else if (eat('-')) {
        auto n = std::make_unique<Node>();
        n->kind = NodeKind::Sub;
        n->lhs = std::move(lhs);
        n->rhs = parse_term();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (eat('*')) {
        auto n = std::make_unique<Node>();
        n->kind = NodeKind::Mul;
        n->lhs = std::move(lhs);
        n->rhs = parse_unary();
        lhs = std::move(n);
      } else if (eat('/')) {
        auto n = std::make_unique<Node>();
        n->kind = NodeKind::Div;
        n->lhs = std::move(lhs);
        n->rhs = parse_unary();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> parse_unary() {
    skip_ws();
    if (eat('-')) {
      auto n = std::make_unique<Node>();
      n->kind = NodeKind::Neg;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  std::unique_ptr<Node> parse_power() {
    auto base = parse_atom();
    skip_ws();
    if (eat('^')) {
      auto n = std::make_unique<Node>();
      n->kind = NodeKind::Pow;
      n->lhs = std::move(base);
      n->rhs = parse_unary();  // right-associative, allows 2^-3
      return n;
    }
    return base;
  }

  std::unique_ptr<Node> parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      auto inner = parse_expression();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  std::unique_ptr<Node> parse_number() {
    std::size_t start = pos;
    bool saw_digit = false, saw_dot = false;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        saw_digit = true;
        ++pos;
      } else if (c == '.' && !saw_dot) {
        saw_dot = true;
        ++pos;
      } else {
        break;
      }
    }
    if (!saw_digit) fail("malformed number");
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Number;
    n->literal = std::string(text.substr(start, pos - start));
    return n;
  }

  std::unique_ptr<Node> parse_ident() {
    std::size_t start = pos;
    while (pos < text.size() &&
           std::isalpha(static_cast<unsigned char>(text[pos])))
      ++pos;
    std::string name(text.substr(start, pos - start));
    if (name == "n") {
      auto n = std::make_unique<Node>();
      n->kind = NodeKind::Var;
      return n;
    }
    Func f;
    if (name == "floor") f = Func::Floor;
    else if (name == "sqrt") f = Func::Sqrt;
    else if (name == "cbrt") f = Func::Cbrt;
    else if (name == "log") f = Func::Log;
    else if (name == "cos") f = Func::Cos;
    else fail("unknown identifier '" + name + "'");
    if (!eat('(')) fail("expected '(' after function name");
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Call;
    n->func = f;
    n->lhs = parse_expression();
    if (!eat(')')) fail("expected ')'");
    return n;
  }
};

}  // namespace detail

inline Ast parse(std::string_view text, std::size_t base_offset = 0) {
  detail::Parser p{text, 0, base_offset};
  auto root = p.parse_expression();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters in expression");
  return Ast(root.release());
}

inline Real evaluate(const Node& node, long n, mpfr_prec_t prec) {
  switch (node.kind) {
    case NodeKind::Number:
      return Real::of_str(node.literal, prec);
    case NodeKind::Var:
      return Real::of(n, prec);
    case NodeKind::Add:
      return add(evaluate(*node.lhs, n, prec), evaluate(*node.rhs, n, prec), prec);
    case NodeKind::Sub:
      return sub(evaluate(*node.lhs, n, prec), evaluate(*node.rhs, n, prec), prec);
    case NodeKind::Mul:
      return mul(evaluate(*node.lhs, n, prec), evaluate(*node.rhs, n, prec), prec);
    case NodeKind::Div:
      return div(evaluate(*node.lhs, n, prec), evaluate(*node.rhs, n, prec), prec);
    case NodeKind::Pow:
      return pow(evaluate(*node.lhs, n, prec), evaluate(*node.rhs, n, prec), prec);
    case NodeKind::Neg:
      return neg(evaluate(*node.lhs, n, prec));
    case NodeKind::Call: {
      Real a = evaluate(*node.lhs, n, prec);
      switch (node.func) {
        case Func::Floor: return floor(a);
        case Func::Sqrt: return sqrt(a, prec);
        case Func::Cbrt: return cbrt(a, prec);
        case Func::Log: return log(a, prec);
        case Func::Cos: return cos(a, prec);
      }
      break;
    }
  }
  throw Error("unreachable expression node");
}

inline Real evaluate(const Ast& ast, long n, mpfr_prec_t prec) {
  return evaluate(*ast, n, prec);
}

}  // namespace cantor::expr
