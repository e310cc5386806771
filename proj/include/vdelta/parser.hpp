#pragma once

// Expression language:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | fn '(' expr ')' | 'delta' '(' expr ')'
//            | 'ddelta' '(' expr ',' integer ')' | '(' expr ')'
//   fn      := sin | cos | exp | atan | abs
// Text without delta terms parses to a plain expression; anything else to a
// DeltaExpr. Products of two delta terms and deltas inside powers, function
// calls or other deltas are rejected.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vdelta/deltacalc.hpp"
#include "vdelta/expr.hpp"

namespace vdelta {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message, std::set<std::string> expected = {})
      : std::runtime_error(compose(position, message, expected)),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::set<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string compose(std::size_t pos, const std::string& msg, const std::set<std::string>& exp) {
    std::string s = "parse error at position " + std::to_string(pos) + ": " + msg;
    if (!exp.empty()) {
      s += " (expected one of:";
      for (const auto& e : exp) s += " " + e;
      s += ")";
    }
    return s;
  }

  std::size_t position_;
  std::set<std::string> expected_;
};

using Parsed = std::variant<ExprPtr, DeltaExpr>;

namespace parser_detail {

inline DeltaExpr lift(const Parsed& p) {
  if (const auto* d = std::get_if<DeltaExpr>(&p)) return *d;
  return build::smooth(SmoothFn::from_expr(std::get<ExprPtr>(p)));
}

inline bool is_smooth(const Parsed& p) { return std::holds_alternative<ExprPtr>(p); }

// x - a or x + b (or b + x, or just x): returns the shift a.
inline std::optional<double> unit_shift(const ExprPtr& e) {
  if (e->op == Op::X) return 0.0;
  if (e->args.size() != 2) return std::nullopt;
  const auto &l = e->args[0], &r = e->args[1];
  if (e->op == Op::Sub && l->op == Op::X && is_num(r)) return r->value;
  if (e->op == Op::Add && l->op == Op::X && is_num(r)) return -r->value;
  if (e->op == Op::Add && is_num(l) && r->op == Op::X) return -l->value;
  return std::nullopt;
}

inline std::vector<DeltaExpr> flatten_sum(const DeltaExpr& e) {
  if (const auto* s = std::get_if<Sum>(&e->node)) return s->terms;
  return {e};
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Parsed parse() {
    skip();
    if (pos_ >= s_.size()) throw ParseError(pos_, "empty expression", {"expression"});
    auto e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(pos_, "unexpected '" + std::string(1, s_[pos_]) + "'", {"+", "-", "*", "/", "^", "end of input"});
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      const std::string got = pos_ < s_.size() ? "'" + std::string(1, s_[pos_]) + "'" : "end of input";
      throw ParseError(pos_, "unexpected " + got, {std::string(1, c)});
    }
  }

  Parsed expr() {
    auto lhs = term();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (accept('+')) lhs = add(std::move(lhs), term(), false, at);
      else if (accept('-')) lhs = add(std::move(lhs), term(), true, at);
      else return lhs;
    }
  }

  Parsed term() {
    auto lhs = unary();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (accept('*')) lhs = mul(std::move(lhs), unary(), at);
      else if (accept('/')) lhs = div(std::move(lhs), unary(), at);
      else return lhs;
    }
  }

  Parsed unary() {
    if (accept('-')) {
      auto v = unary();
      if (is_smooth(v)) return neg(std::get<ExprPtr>(v));
      return build::scale(-1.0, std::get<DeltaExpr>(v));
    }
    return power();
  }

  Parsed power() {
    auto base = primary();
    skip();
    const std::size_t at = pos_;
    if (accept('^')) {
      auto ex = unary();
      if (!is_smooth(base) || !is_smooth(ex)) throw ParseError(at, "delta cannot appear inside '^'");
      return binary(Op::Pow, std::get<ExprPtr>(base), std::get<ExprPtr>(ex));
    }
    return base;
  }

  Parsed primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError(pos_, "unexpected end of input", {"number", "x", "(", "function"});
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    if (accept('(')) {
      auto e = expr();
      expect(')');
      return e;
    }
    throw ParseError(pos_, "unexpected '" + std::string(1, c) + "'", {"number", "x", "(", "function"});
  }

  Parsed number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_ || !std::isfinite(v))
      throw ParseError(start, "malformed number '" + std::string(s_.substr(start, pos_ - start)) + "'");
    return num(v);
  }

  Parsed word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string w(s_.substr(start, pos_ - start));
    if (w == "x") return var_x();
    if (w == "delta") return delta_call(start);
    if (w == "ddelta") return ddelta_call(start);
    static const std::pair<const char*, Op> fns[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"atan", Op::Atan}, {"abs", Op::Abs}};
    for (const auto& [name, op] : fns) {
      if (w == name) {
        expect('(');
        auto arg = expr();
        expect(')');
        if (!is_smooth(arg)) throw ParseError(start, "delta cannot appear inside " + w + "()");
        return call(op, std::get<ExprPtr>(arg));
      }
    }
    throw ParseError(start, "unknown identifier '" + w + "'",
                     {"x", "sin", "cos", "exp", "atan", "abs", "delta", "ddelta"});
  }

  ExprPtr delta_argument(const char* name) {
    expect('(');
    skip();
    const std::size_t inner = pos_;
    auto arg = expr();
    if (!is_smooth(arg)) throw ParseError(inner, std::string("nested delta inside ") + name + "()");
    return std::get<ExprPtr>(arg);
  }

  Parsed delta_call(std::size_t at) {
    auto g = delta_argument("delta");
    expect(')');
    if (auto a = unit_shift(g)) return build::delta(0, *a);
    if (!depends_on_x(*g)) throw ParseError(at, "delta argument must depend on x");
    return build::delta_of(SmoothFn::from_expr(g));
  }

  Parsed ddelta_call(std::size_t at) {
    auto g = delta_argument("ddelta");
    expect(',');
    skip();
    const std::size_t kpos = pos_;
    std::size_t end = pos_;
    while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    int k = -1;
    if (end == pos_ || std::from_chars(s_.data() + pos_, s_.data() + end, k).ec != std::errc())
      throw ParseError(kpos, "derivative order must be a nonnegative integer", {"integer"});
    pos_ = end;
    expect(')');
    auto a = unit_shift(g);
    if (!a) throw ParseError(at, "ddelta argument must have the form x - a");
    return build::delta(k, *a);
  }

  static Parsed add(Parsed l, Parsed r, bool minus, std::size_t) {
    if (is_smooth(l) && is_smooth(r))
      return binary(minus ? Op::Sub : Op::Add, std::get<ExprPtr>(l), std::get<ExprPtr>(r));
    auto terms = flatten_sum(lift(l));
    if (minus && is_smooth(r)) terms.push_back(lift(neg(std::get<ExprPtr>(r))));
    else if (minus) terms.push_back(build::scale(-1.0, std::get<DeltaExpr>(r)));
    else terms.push_back(lift(r));
    return build::sum(std::move(terms));
  }

  static Parsed mul(Parsed l, Parsed r, std::size_t at) {
    if (is_smooth(l) && is_smooth(r)) return binary(Op::Mul, std::get<ExprPtr>(l), std::get<ExprPtr>(r));
    if (!is_smooth(l) && !is_smooth(r)) throw ParseError(at, "product of two delta terms is undefined");
    const auto& f = std::get<ExprPtr>(is_smooth(l) ? l : r);
    const auto& d = std::get<DeltaExpr>(is_smooth(l) ? r : l);
    if (is_num(f)) return build::scale(f->value, d);
    return build::product(SmoothFn::from_expr(f), d);
  }

  static Parsed div(Parsed l, Parsed r, std::size_t at) {
    if (is_smooth(l) && is_smooth(r)) return binary(Op::Div, std::get<ExprPtr>(l), std::get<ExprPtr>(r));
    if (!is_smooth(r)) throw ParseError(at, "cannot divide by a delta term");
    const auto& f = std::get<ExprPtr>(r);
    const auto& d = std::get<DeltaExpr>(l);
    if (is_num(f)) {
      if (f->value == 0.0) throw ParseError(at, "division by zero");
      return build::scale(1.0 / f->value, d);
    }
    return build::product(SmoothFn::from_expr(binary(Op::Div, num(1.0), f)), d);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace parser_detail

inline Parsed parse_expression(std::string_view text) { return parser_detail::Parser(text).parse(); }

/// Parses and lifts a plain expression to a Smooth node.
inline DeltaExpr parse_delta_expression(std::string_view text) {
  return parser_detail::lift(parse_expression(text));
}

/// Parses text that must not contain delta terms.
inline ExprPtr parse_function(std::string_view text) {
  auto p = parse_expression(text);
  if (!std::holds_alternative<ExprPtr>(p)) throw ParseError(0, "expected a function of x without delta terms");
  return std::get<ExprPtr>(p);
}

// ------------------------------------------------------------------ render

namespace render_detail {

inline std::string shift_text(double a, bool unicode) {
  if (a == 0.0) return "x";
  const std::string minus = unicode ? "−" : " - ";
  const std::string plus = unicode ? "+" : " + ";
  return a > 0 ? "x" + minus + format_number(a) : "x" + plus + format_number(-a);
}

inline std::string smooth_factor(const SmoothFn& f) {
  if (!f.expr) return "(" + f.text() + ")";
  const auto op = f.expr->op;
  const bool wrap = op == Op::Add || op == Op::Sub || op == Op::Neg || (op == Op::Num && f.expr->value < 0);
  return wrap ? "(" + render(f.expr) + ")" : render(f.expr);
}

}  // namespace render_detail

/// ASCII rendering that reparses to the same tree.
inline std::string render(const DeltaExpr& e) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DeltaDeriv>) {
          const auto arg = render_detail::shift_text(n.a, false);
          return n.k == 0 ? "delta(" + arg + ")" : "ddelta(" + arg + ", " + std::to_string(n.k) + ")";
        } else if constexpr (std::is_same_v<T, DeltaComp>) {
          return "delta(" + n.g.text() + ")";
        } else if constexpr (std::is_same_v<T, Smooth>) {
          return n.f.text();
        } else if constexpr (std::is_same_v<T, Sum>) {
          std::string s;
          for (std::size_t i = 0; i < n.terms.size(); ++i) {
            if (i) s += " + ";
            const bool wrap = std::holds_alternative<Sum>(n.terms[i]->node) ||
                              (std::holds_alternative<Smooth>(n.terms[i]->node) && i > 0);
            s += wrap ? "(" + render(n.terms[i]) + ")" : render(n.terms[i]);
          }
          return s;
        } else if constexpr (std::is_same_v<T, Scale>) {
          const bool wrap = !std::holds_alternative<DeltaDeriv>(n.e->node) &&
                            !std::holds_alternative<DeltaComp>(n.e->node);
          return format_number(n.c) + "*" + (wrap ? "(" + render(n.e) + ")" : render(n.e));
        } else if constexpr (std::is_same_v<T, Product>) {
          const bool wrap = !std::holds_alternative<DeltaDeriv>(n.e->node) &&
                            !std::holds_alternative<DeltaComp>(n.e->node);
          return render_detail::smooth_factor(n.f) + "*" + (wrap ? "(" + render(n.e) + ")" : render(n.e));
        } else {
          return "contract(" + (n.d1 ? n.d1->name() : std::string("delta")) + ", " +
                 (n.d2 ? n.d2->name() : std::string("delta")) + ", " + format_number(n.a) + ")";
        }
      },
      e->node);
}

/// Structural equality of delta expressions (kernels compared by name).
inline bool structurally_equal(const DeltaExpr& a, const DeltaExpr& b) {
  if (a->node.index() != b->node.index()) return false;
  auto same_fn = [](const SmoothFn& f, const SmoothFn& g) {
    if (f.expr && g.expr) return structurally_equal(f.expr, g.expr);
    return !f.expr && !g.expr && f.fn.descriptor() == g.fn.descriptor();
  };
  auto same_kernel = [](const std::optional<DiracKernel>& x, const std::optional<DiracKernel>& y) {
    return x.has_value() == y.has_value() && (!x || x->name() == y->name());
  };
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, DeltaDeriv>)
          return x.k == y.k && x.a == y.a && same_kernel(x.kernel, y.kernel);
        else if constexpr (std::is_same_v<T, DeltaComp>)
          return same_fn(x.g, y.g) && same_kernel(x.kernel, y.kernel);
        else if constexpr (std::is_same_v<T, Smooth>)
          return same_fn(x.f, y.f);
        else if constexpr (std::is_same_v<T, Sum>) {
          if (x.terms.size() != y.terms.size()) return false;
          for (std::size_t i = 0; i < x.terms.size(); ++i)
            if (!structurally_equal(x.terms[i], y.terms[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Scale>)
          return x.c == y.c && structurally_equal(x.e, y.e);
        else if constexpr (std::is_same_v<T, Product>)
          return same_fn(x.f, y.f) && structurally_equal(x.e, y.e);
        else
          return x.a == y.a && same_kernel(x.d1, y.d1) && same_kernel(x.d2, y.d2);
      },
      a->node);
}

inline bool structurally_equal(const Parsed& a, const Parsed& b) {
  if (a.index() != b.index()) return false;
  if (const auto* e = std::get_if<ExprPtr>(&a)) return structurally_equal(*e, std::get<ExprPtr>(b));
  return structurally_equal(std::get<DeltaExpr>(a), std::get<DeltaExpr>(b));
}

inline std::string render(const Parsed& p) {
  if (const auto* e = std::get_if<ExprPtr>(&p)) return render(*e);
  return render(std::get<DeltaExpr>(p));
}

/// Human rendering: 0.25·δ(x−2) + 0.25·δ(x+2). Terms are listed by
/// decreasing shift, then increasing order.
inline std::string render_human(const NormalForm& nf) {
  if (nf.residual.kind == ResidualKind::NotReducible) return "not reducible: " + nf.residual.reason;
  if (nf.terms.empty()) return "0";
  std::vector<const Term*> order;
  for (const auto& t : nf.terms) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Term* x, const Term* y) {
    if (x->a != y->a) return x->a > y->a;
    return x->k < y->k;
  });
  static const char* const superscripts[] = {"⁰", "¹", "²", "³", "⁴",
                                             "⁵", "⁶", "⁷", "⁸", "⁹"};
  auto delta_symbol = [](const Term& t) {
    std::string d = "δ";
    if (t.kernel) d += "[" + t.kernel->name() + "]";
    if (t.k == 1) d += "′";
    else if (t.k == 2) d += "″";
    else if (t.k > 2) {
      std::string digits = std::to_string(t.k), sup;
      for (char c : digits) sup += superscripts[c - '0'];
      d += "⁽" + sup + "⁾";
    }
    return d;
  };
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Term& t = *order[i];
    const bool negative = t.c < 0;
    if (i == 0) s += negative ? "−" : "";
    else s += negative ? " − " : " + ";
    const double mag = std::abs(t.c);
    if (mag != 1.0) s += format_number(mag) + "·";
    s += delta_symbol(t) + "(" + render_detail::shift_text(t.a, true) + ")";
  }
  return s;
}

}  // namespace vdelta
