#pragma once

// Symbolic real-valued expressions in one variable x. They evaluate on
// doubles and on jets, so every expression becomes a RealFunction with exact
// derivatives.

#include <charconv>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdelta/real_function.hpp"

namespace vdelta {

enum class Op { Num, X, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Atan, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::Num;
  double value = 0.0;
  std::vector<ExprPtr> args;
};

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Atan: return "atan";
    case Op::Abs: return "abs";
    default: return nullptr;
  }
}

inline bool is_function(Op op) { return function_name(op) != nullptr; }

namespace detail {

inline ExprPtr make(Op op, double v, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->value = v;
  e->args = std::move(args);
  return e;
}

inline double apply_function(Op op, double v) {
  switch (op) {
    case Op::Sin: return std::sin(v);
    case Op::Cos: return std::cos(v);
    case Op::Exp: return std::exp(v);
    case Op::Atan: return std::atan(v);
    case Op::Abs: return std::abs(v);
    default: throw std::logic_error("not a function");
  }
}

}  // namespace detail

inline ExprPtr num(double v) { return detail::make(Op::Num, v, {}); }
inline ExprPtr var_x() { return detail::make(Op::X, 0.0, {}); }

inline bool is_num(const ExprPtr& e) { return e->op == Op::Num; }

/// Builders fold operations on numeric literals.
inline ExprPtr neg(ExprPtr a) {
  if (is_num(a)) return num(-a->value);
  return detail::make(Op::Neg, 0.0, {std::move(a)});
}

inline ExprPtr binary(Op op, ExprPtr a, ExprPtr b) {
  if (is_num(a) && is_num(b)) {
    const double x = a->value, y = b->value;
    double r = 0.0;
    switch (op) {
      case Op::Add: r = x + y; break;
      case Op::Sub: r = x - y; break;
      case Op::Mul: r = x * y; break;
      case Op::Div: r = x / y; break;
      case Op::Pow: r = std::pow(x, y); break;
      default: throw std::logic_error("not a binary operator");
    }
    if (std::isfinite(r)) return num(r);
  }
  return detail::make(op, 0.0, {std::move(a), std::move(b)});
}

inline ExprPtr call(Op fn, ExprPtr a) {
  if (is_num(a)) {
    const double r = detail::apply_function(fn, a->value);
    if (std::isfinite(r)) return num(r);
  }
  return detail::make(fn, 0.0, {std::move(a)});
}

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op || a->args.size() != b->args.size()) return false;
  if (a->op == Op::Num && !(a->value == b->value && std::signbit(a->value) == std::signbit(b->value)))
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!structurally_equal(a->args[i], b->args[i])) return false;
  return true;
}

/// Evaluates on double or JetN.
template <class T>
T evaluate(const Expr& e, const T& x) {
  using std::abs, std::atan, std::cos, std::exp, std::sin;
  switch (e.op) {
    case Op::Num: return T(e.value);
    case Op::X: return x;
    case Op::Neg: return -evaluate(*e.args[0], x);
    case Op::Add: return evaluate(*e.args[0], x) + evaluate(*e.args[1], x);
    case Op::Sub: return evaluate(*e.args[0], x) - evaluate(*e.args[1], x);
    case Op::Mul: return evaluate(*e.args[0], x) * evaluate(*e.args[1], x);
    case Op::Div: return evaluate(*e.args[0], x) / evaluate(*e.args[1], x);
    case Op::Pow: {
      const auto& ex = *e.args[1];
      if (ex.op == Op::Num && ex.value == std::round(ex.value) && std::abs(ex.value) <= 64) {
        if constexpr (std::is_same_v<T, double>)
          return std::pow(evaluate(*e.args[0], x), ex.value);
        else
          return pow(evaluate(*e.args[0], x), static_cast<int>(ex.value));
      }
      if constexpr (std::is_same_v<T, double>)
        return std::pow(evaluate(*e.args[0], x), evaluate(ex, x));
      else
        return pow(evaluate(*e.args[0], x), evaluate(ex, x));
    }
    case Op::Sin: return sin(evaluate(*e.args[0], x));
    case Op::Cos: return cos(evaluate(*e.args[0], x));
    case Op::Exp: return exp(evaluate(*e.args[0], x));
    case Op::Atan: return atan(evaluate(*e.args[0], x));
    case Op::Abs: return abs(evaluate(*e.args[0], x));
  }
  return T(0.0);
}

/// C-infinity unless abs appears, which makes the expression only C0.
inline Smoothness smoothness_of(const Expr& e) {
  if (e.op == Op::Abs) return Smoothness::continuous();
  Smoothness s = Smoothness::infinite();
  for (const auto& a : e.args) s = weakest(s, smoothness_of(*a));
  return s;
}

inline bool depends_on_x(const Expr& e) {
  if (e.op == Op::X) return true;
  for (const auto& a : e.args)
    if (depends_on_x(*a)) return true;
  return false;
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Num: return e.value < 0 ? 3 : 5;
    default: return 5;
  }
}

inline std::string render_rec(const Expr& e);

inline std::string wrap_if(const Expr& e, bool cond) {
  return cond ? "(" + render_rec(e) + ")" : render_rec(e);
}

inline std::string render_rec(const Expr& e) {
  switch (e.op) {
    case Op::Num: return format_number(e.value);
    case Op::X: return "x";
    case Op::Neg: return "-" + wrap_if(*e.args[0], precedence(*e.args[0]) < 3);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      const char* sym = e.op == Op::Add ? " + " : e.op == Op::Sub ? " - " : e.op == Op::Mul ? "*" : "/";
      // Left-associative: the right operand needs parentheses at equal precedence.
      return wrap_if(*e.args[0], precedence(*e.args[0]) < p) + sym +
             wrap_if(*e.args[1], precedence(*e.args[1]) <= p && precedence(*e.args[1]) != 3);
    }
    case Op::Pow:
      return wrap_if(*e.args[0], precedence(*e.args[0]) <= 4) + "^" +
             wrap_if(*e.args[1], precedence(*e.args[1]) < 3);
    default: return std::string(function_name(e.op)) + "(" + render_rec(*e.args[0]) + ")";
  }
}

}  // namespace detail

/// ASCII rendering that parses back to a structurally identical tree.
inline std::string render(const ExprPtr& e) { return detail::render_rec(*e); }

/// RealFunction backed by the expression, with jet derivatives.
inline RealFunction to_real_function(const ExprPtr& e) {
  if (is_num(e)) return RealFunction::constant(e->value);
  return RealFunction::generic(render(e), smoothness_of(*e),
                               [e](const auto& x) { return evaluate(*e, x); });
}

}  // namespace vdelta
