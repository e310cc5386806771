#pragma once

// Delta expressions, their rewriting to normal forms
//   sum_i c_i delta^(k_i)(x - a_i)
// and the numerical equivalence check that integrates both sides of a
// claimed identity against a battery of test functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vdelta/dirac.hpp"
#include "vdelta/expr.hpp"
#include "vdelta/roots.hpp"
#include "vdelta/vfun.hpp"
#include "vdelta/vintegral.hpp"

namespace vdelta {

/// A real function with its symbolic form when one is known.
struct SmoothFn {
  RealFunction fn;
  ExprPtr expr;

  static SmoothFn from_expr(ExprPtr e) { return {to_real_function(e), std::move(e)}; }
  static SmoothFn opaque(RealFunction f) { return {std::move(f), nullptr}; }
  std::string text() const { return expr ? render(expr) : fn.descriptor(); }
};

struct DeltaNode;
using DeltaExpr = std::shared_ptr<const DeltaNode>;

/// delta(g(x)) with an arbitrary inner function.
struct DeltaComp {
  SmoothFn g;
  std::optional<DiracKernel> kernel;
};

/// delta^(k)(x - a).
struct DeltaDeriv {
  int k = 0;
  double a = 0.0;
  std::optional<DiracKernel> kernel;
};

struct Smooth {
  SmoothFn f;
};

struct Sum {
  std::vector<DeltaExpr> terms;
};

struct Scale {
  double c = 1.0;
  DeltaExpr e;
};

/// f(x) times an expression with exactly one delta-bearing factor.
struct Product {
  SmoothFn f;
  DeltaExpr e;
};

/// integral of d1(x - b) d2(b - a) db.
struct ContractionIntegral {
  std::optional<DiracKernel> d1, d2;
  double a = 0.0;
};

struct DeltaNode {
  std::variant<DeltaComp, DeltaDeriv, Smooth, Sum, Scale, Product, ContractionIntegral> node;
};

class DeltaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace build {

inline DeltaExpr node(auto v) { return std::make_shared<const DeltaNode>(DeltaNode{std::move(v)}); }

inline DeltaExpr delta_of(SmoothFn g, std::optional<DiracKernel> k = std::nullopt) {
  return node(DeltaComp{std::move(g), std::move(k)});
}
inline DeltaExpr delta(int k = 0, double a = 0.0, std::optional<DiracKernel> kern = std::nullopt) {
  if (k < 0) throw DeltaError("negative derivative order");
  return node(DeltaDeriv{k, a, std::move(kern)});
}
inline DeltaExpr smooth(SmoothFn f) { return node(Smooth{std::move(f)}); }
inline DeltaExpr sum(std::vector<DeltaExpr> terms) { return node(Sum{std::move(terms)}); }
inline DeltaExpr scale(double c, DeltaExpr e) { return node(Scale{c, std::move(e)}); }
inline DeltaExpr contraction(std::optional<DiracKernel> d1, std::optional<DiracKernel> d2, double a) {
  return node(ContractionIntegral{std::move(d1), std::move(d2), a});
}
inline DeltaExpr zero() { return smooth(SmoothFn::from_expr(num(0.0))); }

}  // namespace build

/// True when the expression contains a delta term.
inline bool has_delta(const DeltaExpr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Smooth>) return false;
        else if constexpr (std::is_same_v<T, Sum>)
          return std::any_of(n.terms.begin(), n.terms.end(), [](const auto& t) { return has_delta(t); });
        else if constexpr (std::is_same_v<T, Scale> || std::is_same_v<T, Product>) return has_delta(n.e);
        else return true;
      },
      e->node);
}

namespace build {

inline DeltaExpr product(SmoothFn f, DeltaExpr e) {
  if (!has_delta(e)) throw DeltaError("product needs a delta-bearing factor");
  return node(Product{std::move(f), std::move(e)});
}

}  // namespace build

// ------------------------------------------------------------- normal forms

/// Strong equivalence holds against all continuous test functions; OrderN(n)
/// only against n-times differentiable ones.
struct Strength {
  int order = 0;  // 0 means strong

  static Strength strong() { return {0}; }
  static Strength order_n(int n) { return {n}; }
  bool is_strong() const { return order == 0; }
  std::string to_string() const { return is_strong() ? "strong" : "order " + std::to_string(order); }
  bool operator==(const Strength&) const = default;
};

/// The weaker of two strengths.
inline Strength combine(Strength a, Strength b) { return {std::max(a.order, b.order)}; }

struct Term {
  double c = 0.0;
  int k = 0;
  double a = 0.0;
  std::optional<DiracKernel> kernel;

  std::string kernel_name() const { return kernel ? kernel->name() : std::string(); }
};

enum class ResidualKind { None, Zero, NotReducible };

struct Residual {
  ResidualKind kind = ResidualKind::None;
  std::string reason;
};

struct NormalForm {
  std::vector<Term> terms;
  Strength strength;
  Residual residual;

  bool is_zero() const { return residual.kind == ResidualKind::Zero; }
};

inline constexpr double kDropCoefficient = 1e-14;

/// Merges terms with equal (k, a, kernel), drops |c| < 1e-14 and sorts by
/// (a, k). An empty reducible result becomes the Zero residual.
inline NormalForm canonicalize(NormalForm nf) {
  std::vector<Term> merged;
  for (auto& t : nf.terms) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) {
      return m.k == t.k && m.a == t.a && m.kernel_name() == t.kernel_name();
    });
    if (it == merged.end()) merged.push_back(std::move(t));
    else it->c += t.c;
  }
  std::erase_if(merged, [](const Term& t) { return std::abs(t.c) < kDropCoefficient; });
  for (auto& t : merged)
    if (t.a == 0.0) t.a = 0.0;
  std::sort(merged.begin(), merged.end(), [](const Term& x, const Term& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.k != y.k) return x.k < y.k;
    return x.kernel_name() < y.kernel_name();
  });
  nf.terms = std::move(merged);
  if (nf.residual.kind != ResidualKind::NotReducible)
    nf.residual.kind = nf.terms.empty() ? ResidualKind::Zero : ResidualKind::None;
  return nf;
}

/// Exact equality of canonical forms.
inline bool same_normal_form(const NormalForm& x, const NormalForm& y) {
  if (x.residual.kind != y.residual.kind || !(x.strength == y.strength) ||
      x.terms.size() != y.terms.size())
    return false;
  for (std::size_t i = 0; i < x.terms.size(); ++i) {
    const auto &s = x.terms[i], &t = y.terms[i];
    if (s.c != t.c || s.k != t.k || s.a != t.a || s.kernel_name() != t.kernel_name()) return false;
  }
  return true;
}

class RewriteError : public std::invalid_argument {
 public:
  explicit RewriteError(const std::string& what) : std::invalid_argument(what) {}
  RewriteError(const std::string& what, HypothesisCertificate cert)
      : std::invalid_argument(what), certificate_(std::move(cert)) {}
  const std::optional<HypothesisCertificate>& certificate() const noexcept { return certificate_; }

 private:
  std::optional<HypothesisCertificate> certificate_;
};

/// delta(g(x)) = sum over simple roots of delta(x - a_i)/|g'(a_i)|.
inline NormalForm rewrite_composition(const HypothesisCertificate& cert,
                                      std::optional<DiracKernel> kernel = std::nullopt) {
  if (!cert.certified())
    throw RewriteError(std::string("composition rule does not apply (") + to_string(cert.verdict) +
                           "): " + cert.reason,
                       cert);
  NormalForm nf;
  for (const auto& r : cert.roots) nf.terms.push_back({1.0 / std::abs(r.g_prime), 0, r.a, kernel});
  return canonicalize(std::move(nf));
}

inline NormalForm rewrite_composition(const RealFunction& g, const CompositionOptions& opt = {},
                                      std::optional<DiracKernel> kernel = std::nullopt) {
  const auto scan = find_simple_roots(g, opt.window, opt.grid);
  return rewrite_composition(certify_hypotheses(g, scan), std::move(kernel));
}

/// f(x) delta(x - a) = f(a) delta(x - a).
inline NormalForm rewrite_product(const RealFunction& f, double a,
                                  std::optional<DiracKernel> kernel = std::nullopt) {
  if (!f.smoothness().at_least(0))
    throw RewriteError(f.descriptor() + " is not continuous around " + format_number(a));
  const double v = f(a);
  if (!std::isfinite(v)) throw RewriteError(f.descriptor() + " is undefined at " + format_number(a));
  NormalForm nf;
  nf.terms.push_back({v, 0, a, std::move(kernel)});
  return canonicalize(std::move(nf));
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// g(x) delta^(n)(x - a) = (-1)^n sum_i (-1)^i C(n,i) g^(n-i)(a) delta^(i)(x - a),
/// valid against n-times differentiable test functions.
inline NormalForm rewrite_deriv_product(const RealFunction& g, int n, double a,
                                        std::optional<DiracKernel> kernel = std::nullopt) {
  if (n < 0) throw RewriteError("negative derivative order");
  if (n == 0) return rewrite_product(g, a, std::move(kernel));
  if (!g.smoothness().at_least(n))
    throw RewriteError(g.descriptor() + " is " + g.smoothness().to_string() + ", not " +
                       std::to_string(n) + " times differentiable around " + format_number(a));
  NormalForm nf;
  for (int i = 0; i <= n; ++i) {
    const double sign = ((n + i) % 2 == 0) ? 1.0 : -1.0;
    nf.terms.push_back({sign * binomial(n, i) * g.derivative(n - i, a), i, a, kernel});
  }
  nf.strength = Strength::order_n(n);
  return canonicalize(std::move(nf));
}

/// integral of d1(x - b) d2(b - a) db = d3(x - a) with d3 = d1 * d2.
inline NormalForm rewrite_convolution(const DiracKernel& d1, const DiracKernel& d2, double a) {
  NormalForm nf;
  try {
    nf.terms.push_back({1.0, 0, a, convolve(d1, d2)});
  } catch (const NotDiracError& e) {
    throw RewriteError(e.what());
  } catch (const std::invalid_argument& e) {
    throw RewriteError(e.what());
  }
  return canonicalize(std::move(nf));
}

struct SimplifyOptions {
  CompositionOptions composition{};
  /// Kernel used for contractions whose factors are unbound.
  std::optional<DiracKernel> default_kernel;
};

namespace detail {

inline NormalForm merge(NormalForm x, const NormalForm& y) {
  x.terms.insert(x.terms.end(), y.terms.begin(), y.terms.end());
  x.strength = combine(x.strength, y.strength);
  if (y.residual.kind == ResidualKind::NotReducible && x.residual.kind != ResidualKind::NotReducible)
    x.residual = y.residual;
  return x;
}

inline NormalForm not_reducible(std::string why) {
  NormalForm nf;
  nf.residual = {ResidualKind::NotReducible, std::move(why)};
  return nf;
}

}  // namespace detail

/// Applies the rewrite rules bottom-up. Smooth summands have no delta normal
/// form and mark the result NotReducible.
inline NormalForm simplify(const DeltaExpr& e, const SimplifyOptions& opt = {}) {
  NormalForm out = std::visit(
      [&](const auto& n) -> NormalForm {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DeltaDeriv>) {
          NormalForm nf;
          nf.terms.push_back({1.0, n.k, n.a, n.kernel});
          return nf;
        } else if constexpr (std::is_same_v<T, DeltaComp>) {
          return rewrite_composition(n.g.fn, opt.composition, n.kernel);
        } else if constexpr (std::is_same_v<T, Smooth>) {
          if (auto c = n.f.fn.constant_value(); c && *c == 0.0) return NormalForm{};
          return detail::not_reducible("smooth term " + n.f.text() + " has no delta normal form");
        } else if constexpr (std::is_same_v<T, Sum>) {
          NormalForm acc;
          for (const auto& t : n.terms) acc = detail::merge(std::move(acc), simplify(t, opt));
          return acc;
        } else if constexpr (std::is_same_v<T, Scale>) {
          auto nf = simplify(n.e, opt);
          for (auto& t : nf.terms) t.c *= n.c;
          return nf;
        } else if constexpr (std::is_same_v<T, Product>) {
          auto inner = simplify(n.e, opt);
          NormalForm acc;
          acc.strength = inner.strength;
          acc.residual = inner.residual;
          for (const auto& t : inner.terms) {
            auto nf = rewrite_deriv_product(n.f.fn, t.k, t.a, t.kernel);
            for (auto& s : nf.terms) s.c *= t.c;
            acc = detail::merge(std::move(acc), nf);
          }
          return acc;
        } else {
          const auto d1 = n.d1 ? n.d1 : opt.default_kernel;
          const auto d2 = n.d2 ? n.d2 : opt.default_kernel;
          if (!d1 || !d2) throw RewriteError("contraction needs bound kernels");
          return rewrite_convolution(*d1, *d2, n.a);
        }
      },
      e->node);
  return canonicalize(std::move(out));
}

/// sum_i c_i (-1)^k_i f^(k_i)(a_i).
inline double evaluate_normal_form(const NormalForm& nf, const RealFunction& f) {
  if (nf.residual.kind == ResidualKind::NotReducible)
    throw RewriteError("normal form is not reducible: " + nf.residual.reason);
  double s = 0.0;
  for (const auto& t : nf.terms) {
    if (!f.smoothness().at_least(t.k))
      throw RewriteError(f.descriptor() + " is " + f.smoothness().to_string() +
                         ", too rough for the term of order " + std::to_string(t.k) + " at " +
                         format_number(t.a));
    s += t.c * ((t.k % 2) ? -1.0 : 1.0) * f.derivative(t.k, t.a);
  }
  return s;
}

// --------------------------------------------------------------- realization

/// One piece of a realized expression: the integral of phi_n(t) f(t + shift).
struct Piece {
  VirtualFunction phi;
  double shift = 0.0;
  int order = 0;  // derivative order of the kernel factor
};

struct Realization {
  std::vector<Piece> pieces;
};

namespace detail {

inline DiracKernel bound(const std::optional<DiracKernel>& k, const DiracKernel& fallback) {
  return k ? *k : fallback;
}

inline Realization realize_rec(const DeltaExpr& e, const DiracKernel& kernel,
                               const CompositionOptions& copt) {
  return std::visit(
      [&](const auto& n) -> Realization {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DeltaDeriv>) {
          const auto k = bound(n.kernel, kernel);
          if (n.k == 0) return {{{k.function(), n.a}}};
          if (!k.function().smoothness().at_least(n.k))
            throw DeltaError("kernel " + k.name() + " is " + k.function().smoothness().to_string() +
                             ", cannot take derivative of order " + std::to_string(n.k));
          return {{{derivative(k.function(), n.k), n.a, n.k}}};
        } else if constexpr (std::is_same_v<T, DeltaComp>) {
          return {{{compose(bound(n.kernel, kernel).function(), n.g.fn, copt), 0.0}}};
        } else if constexpr (std::is_same_v<T, Smooth>) {
          return {{{smooth_function(n.f.fn), 0.0}}};
        } else if constexpr (std::is_same_v<T, Sum>) {
          Realization r;
          for (const auto& t : n.terms) {
            auto sub = realize_rec(t, kernel, copt);
            r.pieces.insert(r.pieces.end(), sub.pieces.begin(), sub.pieces.end());
          }
          return r;
        } else if constexpr (std::is_same_v<T, Scale>) {
          auto r = realize_rec(n.e, kernel, copt);
          for (auto& p : r.pieces) p.phi = scale_value(p.phi, n.c);
          return r;
        } else if constexpr (std::is_same_v<T, Product>) {
          auto r = realize_rec(n.e, kernel, copt);
          for (auto& p : r.pieces) p.phi = multiply(p.phi, n.f.fn.shifted(p.shift));
          return r;
        } else {
          const auto d1 = bound(n.d1, kernel), d2 = bound(n.d2, kernel);
          return {{{convolve_family(d1.function(), d2.function()), n.a}}};
        }
      },
      e->node);
}

}  // namespace detail

/// Rank families whose integrals against a test function give the
/// expression's virtual integral. Unbound delta terms use `kernel`.
inline Realization realize(const DeltaExpr& e, const DiracKernel& kernel,
                           const CompositionOptions& copt = {}) {
  return detail::realize_rec(e, kernel, copt);
}

/// Per-rank integral of the realized expression times f.
inline double integrate_rank(const Realization& r, const RealFunction& f, Rank n,
                             const QuadratureOptions& opt = {}) {
  double s = 0.0;
  for (const auto& p : r.pieces)
    s += integrate_rank(multiply(p.phi, f.shifted(p.shift)), VirtualBound::neg_infinity(),
                        VirtualBound::pos_infinity(), n, opt);
  return s;
}

inline IntegralResult integrate_against(const Realization& r, const RealFunction& f,
                                        const ProbeSchedule& schedule = default_schedule(),
                                        const ReduceOptions& opt = {}) {
  validate_schedule(schedule, 2);
  std::vector<std::pair<std::uint64_t, double>> values;
  std::vector<VirtualFunction> integrands;
  int order = 0;
  for (const auto& p : r.pieces) {
    integrands.push_back(multiply(p.phi, f.shifted(p.shift)));
    order = std::max(order, p.order);
  }
  const auto copt = conditioned_options(opt, order);
  for (auto n : conditioned_schedule(schedule, order)) {
    double s = 0.0;
    try {
      for (const auto& g : integrands)
        s += integrate_rank(g, VirtualBound::neg_infinity(), VirtualBound::pos_infinity(), n,
                            copt.quadrature);
    } catch (const RankQuadratureError& e) {
      IntegralResult out;
      out.rank_values = std::move(values);
      out.outcome = Undetermined{e.what()};
      return out;
    }
    values.emplace_back(n.value(), s);
  }
  return classify_rank_values(std::move(values), copt);
}

inline IntegralResult integrate_against(const DeltaExpr& e, const DiracKernel& kernel,
                                        const RealFunction& f,
                                        const ProbeSchedule& schedule = default_schedule(),
                                        const ReduceOptions& opt = {},
                                        const CompositionOptions& copt = {}) {
  return integrate_against(realize(e, kernel, copt), f, schedule, opt);
}

// -------------------------------------------------------------- equivalence

struct Distinct {
  std::string witness;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ConsistentEquivalent {
  std::size_t battery_size = 0;
  double max_deviation = 0.0;
};

struct IrreducibleSide {
  std::string side;  // "lhs", "rhs" or "both"
  std::string witness;
  IntegralResult lhs, rhs;
};

using EquivalenceVerdict = std::variant<Distinct, ConsistentEquivalent, IrreducibleSide>;

struct EquivalenceOptions {
  double tol = 1e-7;
  std::optional<int> order;
  ProbeSchedule schedule = default_schedule();
  ReduceOptions reduce{};
  CompositionOptions composition{};
};

/// Integrates both sides against every battery member. A side that does not
/// reduce (diverges or stays undetermined) decides the verdict at once;
/// otherwise any deviation above 10*tol makes the sides Distinct.
inline EquivalenceVerdict check_equivalence(const DeltaExpr& lhs, const DeltaExpr& rhs,
                                            const DiracKernel& kernel,
                                            const std::vector<RealFunction>& battery,
                                            const EquivalenceOptions& opt = {}) {
  if (battery.empty()) throw std::invalid_argument("battery must not be empty");
  if (opt.order)
    for (const auto& f : battery)
      if (!f.smoothness().at_least(*opt.order))
        throw std::invalid_argument(f.descriptor() + " is not C" + std::to_string(*opt.order));
  const auto L = realize(lhs, kernel, opt.composition);
  const auto R = realize(rhs, kernel, opt.composition);
  std::optional<Distinct> first_distinct;
  double max_dev = 0.0;
  for (const auto& f : battery) {
    auto l = integrate_against(L, f, opt.schedule, opt.reduce);
    auto r = integrate_against(R, f, opt.schedule, opt.reduce);
    if (!l.reduced() || !r.reduced()) {
      const char* side = !l.reduced() && !r.reduced() ? "both" : !l.reduced() ? "lhs" : "rhs";
      return IrreducibleSide{side, f.descriptor(), std::move(l), std::move(r)};
    }
    const double dev = std::abs(l.value() - r.value());
    max_dev = std::max(max_dev, dev);
    if (dev > 10.0 * opt.tol && !first_distinct) first_distinct = Distinct{f.descriptor(), l.value(), r.value()};
  }
  if (first_distinct) return *first_distinct;
  return ConsistentEquivalent{battery.size(), max_dev};
}

// ------------------------------------------------------- kernel dependence

enum class ProbeOutcome { Zero, Finite, Divergent, Undetermined };

inline const char* to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::Zero: return "zero";
    case ProbeOutcome::Finite: return "finite";
    case ProbeOutcome::Divergent: return "divergent";
    case ProbeOutcome::Undetermined: return "undetermined";
  }
  return "?";
}

struct ProbeEntry {
  std::string kernel;
  ProbeOutcome outcome = ProbeOutcome::Undetermined;
  IntegralResult result;
};

struct KernelDependenceReport {
  std::string g;
  std::vector<ProbeEntry> entries;
  bool flagged = false;
  std::string reason;
};

struct ProbeOptions {
  double tol = 1e-6;
  ProbeSchedule schedule = default_schedule();
  ReduceOptions reduce{};
  CompositionOptions composition{};
};

/// Integrates delta_k(g(x)) for each kernel. When the kernels disagree, g
/// has no kernel-independent operational rule and is flagged.
inline KernelDependenceReport kernel_dependence_probe(const RealFunction& g,
                                                      const std::vector<DiracKernel>& kernels,
                                                      const ProbeOptions& opt = {}) {
  if (kernels.size() < 2) throw std::invalid_argument("need at least two kernels to compare");
  KernelDependenceReport rep;
  rep.g = g.descriptor();
  for (const auto& k : kernels) {
    ProbeEntry e;
    e.kernel = k.name();
    e.result = reduce_integral(compose(k.function(), g, opt.composition), opt.schedule, opt.reduce);
    if (const auto* r = std::get_if<Reduced>(&e.result.outcome))
      e.outcome = std::abs(r->value) <= opt.tol ? ProbeOutcome::Zero : ProbeOutcome::Finite;
    else if (e.result.irreducible())
      e.outcome = ProbeOutcome::Divergent;
    rep.entries.push_back(std::move(e));
  }
  const auto& first = rep.entries.front();
  for (std::size_t i = 1; i < rep.entries.size() && !rep.flagged; ++i) {
    const auto& e = rep.entries[i];
    if (e.outcome != first.outcome) {
      rep.flagged = true;
      rep.reason = first.kernel + " gives " + to_string(first.outcome) + " but " + e.kernel +
                   " gives " + to_string(e.outcome);
    } else if (e.outcome == ProbeOutcome::Finite &&
               std::abs(e.result.value() - first.result.value()) > opt.tol) {
      rep.flagged = true;
      rep.reason = first.kernel + " and " + e.kernel + " give different finite values";
    }
  }
  if (!rep.flagged) rep.reason = "all kernels agree";
  return rep;
}

}  // namespace vdelta
