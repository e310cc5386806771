#pragma once

// Virtual functions: rank-indexed families x -> f_n(x) together with the
// metadata the integrator needs (support, breakpoints, smoothness) and an
// optional analytic derivative family.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdelta/quadrature.hpp"
#include "vdelta/real_function.hpp"
#include "vdelta/roots.hpp"
#include "vdelta/vnum.hpp"

namespace vdelta {

class NotDifferentiableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class VirtualFunction {
 public:
  using RankRule = std::function<double(Rank, double)>;
  using RadiusRule = std::function<double(Rank)>;
  using SupportRule = std::function<std::vector<Interval>(Rank)>;
  using PointsRule = std::function<std::vector<double>(Rank)>;
  using DerivativeRule = std::function<VirtualFunction()>;

  struct Parts {
    RankRule eval;
    /// f_n(x) = 0 whenever |x| >= radius(n).
    RadiusRule radius;
    /// f_n vanishes outside the union of these intervals.
    SupportRule support;
    /// Points where f_n has kinks, jumps or sharp features.
    PointsRule breakpoints;
    Smoothness smoothness = Smoothness::infinite();
    DerivativeRule derivative;
    std::string descriptor;
    bool zero = false;
  };

  explicit VirtualFunction(Parts parts) : p_(std::make_shared<const Parts>(std::move(parts))) {
    if (!p_->eval) throw std::invalid_argument("virtual function needs a rank rule");
  }

  double operator()(Rank n, double x) const { return p_->eval(n, x); }
  double rank_eval(Rank n, double x) const { return p_->eval(n, x); }

  bool has_support_radius() const { return static_cast<bool>(p_->radius); }
  std::optional<double> support_radius(Rank n) const {
    if (!p_->radius) return std::nullopt;
    return p_->radius(n);
  }

  /// Radius sequence as a virtual number; throws when none is declared.
  VirtualNumber radius_sequence() const {
    if (!p_->radius) throw std::logic_error(p_->descriptor + " declares no support radius");
    auto r = p_->radius;
    return VirtualNumber::from_rule([r](Rank n) { return r(n); });
  }

  bool has_support() const {
    return p_->zero || static_cast<bool>(p_->support) || static_cast<bool>(p_->radius);
  }

  /// Support as a union of closed intervals, when known.
  std::optional<std::vector<Interval>> support(Rank n) const {
    if (p_->zero) return std::vector<Interval>{};
    if (p_->support) return p_->support(n);
    if (p_->radius) {
      const double r = p_->radius(n);
      return std::vector<Interval>{{-r, r}};
    }
    return std::nullopt;
  }

  std::vector<double> breakpoints(Rank n) const {
    if (!p_->breakpoints) return {};
    return p_->breakpoints(n);
  }

  Smoothness smoothness() const { return p_->smoothness; }
  bool has_analytic_derivative() const { return static_cast<bool>(p_->derivative); }
  std::optional<VirtualFunction> analytic_derivative() const {
    if (!p_->derivative) return std::nullopt;
    return p_->derivative();
  }
  const std::string& descriptor() const { return p_->descriptor; }
  bool is_zero() const { return p_->zero; }

  const Parts& parts() const { return *p_; }

 private:
  std::shared_ptr<const Parts> p_;
};

/// Breakpoints of f plus the edges of its declared support.
inline std::vector<double> structural_points(const VirtualFunction& f, Rank n) {
  auto pts = f.breakpoints(n);
  if (auto s = f.support(n))
    for (const auto& i : *s) {
      pts.push_back(i.lo);
      pts.push_back(i.hi);
    }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// ---------------------------------------------------------------- profiles

/// Profile K of a scale family n*K(n x): derivatives K^(k)(u), an optional
/// compact support in u and the points where K is not smooth.
struct Profile {
  std::string name;
  std::function<double(int, double)> eval;  // (k, u) -> K^(k)(u)
  int max_derivative = 0;                   // highest order eval supports
  std::optional<Interval> support;
  std::vector<double> breakpoints;
  Smoothness smoothness = Smoothness::infinite();
};

namespace detail {

inline constexpr int kMaxBumpDerivative = 16;

// Q_k with  d^k/du^k exp(-1/(1-u^2)) = exp(-1/(1-u^2)) Q_k(u) / (1-u^2)^(2k),
// from Q_{k+1} = -2u Q_k + (1-u^2)^2 Q_k' + 4k u (1-u^2) Q_k.
inline const std::vector<std::vector<double>>& bump_polynomials() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> qs{{1.0}};
    for (int j = 0; j < kMaxBumpDerivative; ++j) {
      const auto& q = qs.back();
      std::vector<double> next(q.size() + 4, 0.0);
      for (std::size_t i = 0; i < q.size(); ++i) next[i + 1] += -2.0 * q[i];
      for (std::size_t i = 1; i < q.size(); ++i) {
        const double d = static_cast<double>(i) * q[i];
        next[i - 1] += d;
        next[i + 1] += -2.0 * d;
        next[i + 3] += d;
      }
      for (std::size_t i = 0; i < q.size(); ++i) {
        next[i + 1] += 4.0 * j * q[i];
        next[i + 3] += -4.0 * j * q[i];
      }
      while (next.size() > 1 && next.back() == 0.0) next.pop_back();
      qs.push_back(std::move(next));
    }
    return qs;
  }();
  return table;
}

inline double horner(const std::vector<double>& p, double u) {
  double s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * u + *it;
  return s;
}

// k-th derivative of exp(-1/(1-u^2)) (unnormalized).
inline double raw_bump(int k, double u) {
  if (!(u > -1.0 && u < 1.0)) return 0.0;
  const double s = (1.0 - u) * (1.0 + u);
  const double e = std::exp(-1.0 / s - 2.0 * k * std::log(s));
  if (k == 0) return e;
  return e * horner(bump_polynomials()[static_cast<std::size_t>(k)], u);
}

}  // namespace detail

/// Normalization constant c with  c * integral of exp(-1/(1-u^2)) over (-1,1) = 1.
inline double bump_constant() {
  static const double c = [] {
    QuadratureOptions opt;
    opt.abs_tol = 1e-17;
    opt.rel_tol = 5e-14;
    const double pts[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    auto r = integrate_adaptive([](double u) { return detail::raw_bump(0, u); },
                                std::span<const double>(pts), opt);
    return 1.0 / r.value;
  }();
  return c;
}

/// K^(k)(u) of the normalized bump.
inline double bump_profile_derivative(int k, double u) {
  return bump_constant() * detail::raw_bump(k, u);
}

inline Profile bump_profile() {
  Profile p;
  p.name = "bump";
  p.eval = [](int k, double u) { return bump_profile_derivative(k, u); };
  p.max_derivative = detail::kMaxBumpDerivative;
  p.support = Interval{-1.0, 1.0};
  return p;
}

inline Profile square_profile() {
  Profile p;
  p.name = "square";
  p.eval = [](int, double u) { return std::abs(u) < 1.0 ? 0.5 : 0.0; };
  p.max_derivative = 0;
  p.support = Interval{-1.0, 1.0};
  p.breakpoints = {-1.0, 1.0};
  p.smoothness = Smoothness::discontinuous();
  return p;
}

/// Bump moved by `offset` in unit coordinates: K(u - offset).
inline Profile shifted_bump_profile(double offset) {
  Profile p = bump_profile();
  p.name = offset > 0 ? "plus" : "minus";
  p.eval = [offset](int k, double u) { return bump_profile_derivative(k, u - offset); };
  p.support = Interval{offset - 1.0, offset + 1.0};
  return p;
}

inline Profile cauchy_profile() {
  Profile p;
  p.name = "psi";
  p.eval = [](int k, double u) {
    if (k == 0) return 1.0 / (1.0 + u * u);
    const auto j = JetN::variable(u);
    return (1.0 / (1.0 + j * j)).derivative(static_cast<std::size_t>(k));
  };
  p.max_derivative = static_cast<int>(kJetOrder);
  // Sharp peak of width ~1 with slow tails: split the real line
  // logarithmically so the integrator resolves both.
  p.breakpoints = {0.0};
  for (double d = 1.0; d <= 1e6; d *= 10.0) {
    p.breakpoints.push_back(d);
    p.breakpoints.push_back(-d);
  }
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  return p;
}

/// Family n^(k+1) K^(k)(n x), the k-th x-derivative of n K(n x).
inline VirtualFunction scale_family(const Profile& profile, int k = 0) {
  if (k > profile.max_derivative)
    throw NotDifferentiableError("profile " + profile.name + " has no derivative of order " +
                                 std::to_string(k));
  VirtualFunction::Parts parts;
  auto eval = profile.eval;
  parts.eval = [eval, k](Rank n, double x) {
    const double nd = n.as_double();
    return std::pow(nd, k + 1) * eval(k, nd * x);
  };
  if (profile.support) {
    const Interval s = *profile.support;
    const double reach = std::max(std::abs(s.lo), std::abs(s.hi));
    parts.radius = [reach](Rank n) { return reach / n.as_double(); };
    parts.support = [s](Rank n) {
      const double nd = n.as_double();
      return std::vector<Interval>{{s.lo / nd, s.hi / nd}};
    };
  }
  if (!profile.breakpoints.empty()) {
    auto bps = profile.breakpoints;
    parts.breakpoints = [bps](Rank n) {
      std::vector<double> out;
      out.reserve(bps.size());
      for (double b : bps) out.push_back(b / n.as_double());
      return out;
    };
  }
  Smoothness s = profile.smoothness;
  for (int i = 0; i < k; ++i) s = differentiated(s);
  parts.smoothness = s;
  if (k < profile.max_derivative && s.at_least(1))
    parts.derivative = [profile, k] { return scale_family(profile, k + 1); };
  parts.descriptor = profile.name;
  if (k == 1) parts.descriptor += "'";
  else if (k > 1) parts.descriptor += "^(" + std::to_string(k) + ")";
  return VirtualFunction(std::move(parts));
}

// ------------------------------------------------------------- combinators

inline VirtualFunction zero_function() {
  VirtualFunction::Parts parts;
  parts.eval = [](Rank, double) { return 0.0; };
  parts.zero = true;
  parts.descriptor = "0";
  parts.derivative = [] { return zero_function(); };
  return VirtualFunction(std::move(parts));
}

/// Rank-independent family x -> f(x).
inline VirtualFunction smooth_function(const RealFunction& f) {
  if (auto c = f.constant_value(); c && *c == 0.0) return zero_function();
  VirtualFunction::Parts parts;
  parts.eval = [f](Rank, double x) { return f(x); };
  parts.smoothness = f.smoothness();
  parts.descriptor = f.descriptor();
  if (f.smoothness().at_least(1)) {
    parts.derivative = [f] {
      std::vector<RealFunction::Rule> higher;
      for (std::size_t k = 2; k <= kJetOrder; ++k)
        higher.push_back([f, k](double x) { return f.derivative(static_cast<int>(k), x); });
      return smooth_function(RealFunction::from_rules(
          "(" + f.descriptor() + ")'", differentiated(f.smoothness()),
          [f](double x) { return f.derivative(1, x); }, std::move(higher)));
    };
  }
  return VirtualFunction(std::move(parts));
}

inline VirtualFunction constant_function(double c) {
  return smooth_function(RealFunction::constant(c));
}

/// The real function x -> f^(k)(x), exact where f's derivatives are.
inline RealFunction derivative_function(const RealFunction& f, int k) {
  if (k == 0) return f;
  std::vector<RealFunction::Rule> higher;
  for (int j = k + 1; j <= static_cast<int>(kJetOrder); ++j)
    higher.push_back([f, j](double x) { return f.derivative(j, x); });
  Smoothness s = f.smoothness();
  for (int i = 0; i < k; ++i) s = differentiated(s);
  return RealFunction::from_rules("d" + std::to_string(k) + "(" + f.descriptor() + ")", s,
                                  [f, k](double x) { return f.derivative(k, x); },
                                  std::move(higher));
}

/// x -> f_n(x - b).
inline VirtualFunction translate(const VirtualFunction& f, double b) {
  if (!std::isfinite(b)) throw std::invalid_argument("translation must be finite");
  if (b == 0.0 || f.is_zero()) return f;
  VirtualFunction::Parts parts;
  parts.eval = [f, b](Rank n, double x) { return f(n, x - b); };
  if (f.has_support_radius())
    parts.radius = [f, b](Rank n) { return *f.support_radius(n) + std::abs(b); };
  if (f.has_support())
    parts.support = [f, b](Rank n) {
      auto s = *f.support(n);
      for (auto& i : s) {
        i.lo += b;
        i.hi += b;
      }
      return s;
    };
  parts.breakpoints = [f, b](Rank n) {
    auto pts = f.breakpoints(n);
    for (auto& p : pts) p += b;
    return pts;
  };
  parts.smoothness = f.smoothness();
  if (f.has_analytic_derivative())
    parts.derivative = [f, b] { return translate(*f.analytic_derivative(), b); };
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", b);
  parts.descriptor = f.descriptor() + "(x-" + buf + ")";
  return VirtualFunction(std::move(parts));
}

/// c * f_n(x).
inline VirtualFunction scale_value(const VirtualFunction& f, double c) {
  if (c == 0.0 || f.is_zero()) return zero_function();
  if (c == 1.0) return f;
  VirtualFunction::Parts parts = f.parts();
  parts.eval = [f, c](Rank n, double x) { return c * f(n, x); };
  if (f.has_analytic_derivative())
    parts.derivative = [f, c] { return scale_value(*f.analytic_derivative(), c); };
  else
    parts.derivative = nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  parts.descriptor = std::string(buf) + "*" + f.descriptor();
  return VirtualFunction(std::move(parts));
}

/// x -> f_n(c x).
inline VirtualFunction scale_argument(const VirtualFunction& f, double c) {
  if (!(std::isfinite(c) && c != 0.0)) throw std::invalid_argument("argument scale must be nonzero");
  if (c == 1.0 || f.is_zero()) return f;
  VirtualFunction::Parts parts;
  parts.eval = [f, c](Rank n, double x) { return f(n, c * x); };
  if (f.has_support_radius())
    parts.radius = [f, c](Rank n) { return *f.support_radius(n) / std::abs(c); };
  if (f.has_support())
    parts.support = [f, c](Rank n) {
      auto s = *f.support(n);
      for (auto& i : s) {
        const double a = i.lo / c, b = i.hi / c;
        i = {std::min(a, b), std::max(a, b)};
      }
      return s;
    };
  parts.breakpoints = [f, c](Rank n) {
    auto pts = f.breakpoints(n);
    for (auto& p : pts) p /= c;
    return pts;
  };
  parts.smoothness = f.smoothness();
  if (f.has_analytic_derivative())
    parts.derivative = [f, c] {
      return scale_value(scale_argument(*f.analytic_derivative(), c), c);
    };
  parts.descriptor = f.descriptor() + "(c*x)";
  return VirtualFunction(std::move(parts));
}

/// Pointwise f_n + g_n.
inline VirtualFunction add(const VirtualFunction& f, const VirtualFunction& g) {
  if (f.is_zero()) return g;
  if (g.is_zero()) return f;
  VirtualFunction::Parts parts;
  parts.eval = [f, g](Rank n, double x) { return f(n, x) + g(n, x); };
  if (f.has_support_radius() && g.has_support_radius())
    parts.radius = [f, g](Rank n) { return std::max(*f.support_radius(n), *g.support_radius(n)); };
  if (f.has_support() && g.has_support())
    parts.support = [f, g](Rank n) {
      auto s = *f.support(n);
      auto t = *g.support(n);
      s.insert(s.end(), t.begin(), t.end());
      return merge_intervals(std::move(s));
    };
  parts.breakpoints = [f, g](Rank n) {
    auto pts = structural_points(f, n);
    auto more = structural_points(g, n);
    pts.insert(pts.end(), more.begin(), more.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  };
  parts.smoothness = weakest(f.smoothness(), g.smoothness());
  if (f.has_analytic_derivative() && g.has_analytic_derivative())
    parts.derivative = [f, g] { return add(*f.analytic_derivative(), *g.analytic_derivative()); };
  parts.descriptor = f.descriptor() + " + " + g.descriptor();
  return VirtualFunction(std::move(parts));
}

/// Pointwise average (f_n + g_n) / 2.
inline VirtualFunction average(const VirtualFunction& f, const VirtualFunction& g) {
  auto sum = add(f, g);
  VirtualFunction::Parts parts = scale_value(sum, 0.5).parts();
  parts.descriptor = "mix(" + f.descriptor() + ", " + g.descriptor() + ")";
  return VirtualFunction(std::move(parts));
}

/// Pointwise f_n(x) * h(x) with h an ordinary function. Where f_n vanishes
/// the product is 0 even if h is not finite there.
inline VirtualFunction multiply(const VirtualFunction& f, const RealFunction& h) {
  if (f.is_zero()) return f;
  if (auto c = h.constant_value()) return scale_value(f, *c);
  VirtualFunction::Parts parts;
  parts.eval = [f, h](Rank n, double x) {
    const double v = f(n, x);
    return v == 0.0 ? 0.0 : v * h(x);
  };
  if (f.has_support_radius()) parts.radius = [f](Rank n) { return *f.support_radius(n); };
  if (f.has_support()) parts.support = [f](Rank n) { return *f.support(n); };
  parts.breakpoints = [f](Rank n) { return f.breakpoints(n); };
  parts.smoothness = weakest(f.smoothness(), h.smoothness());
  if (f.has_analytic_derivative() && h.smoothness().at_least(1))
    parts.derivative = [f, h] {
      return add(multiply(*f.analytic_derivative(), h),
                 multiply(f, derivative_function(h, 1)));
    };
  parts.descriptor = f.descriptor() + "*(" + h.descriptor() + ")";
  return VirtualFunction(std::move(parts));
}

struct CompositionOptions {
  Window window{};
  std::size_t grid = 4096;
};

/// x -> f_n(g(x)). When f declares its support, the support of the
/// composition is the preimage under g restricted to the scan window; g is
/// split once into monotone pieces so each rank only solves g = edge.
inline VirtualFunction compose(const VirtualFunction& f, const RealFunction& g,
                               const CompositionOptions& opt = {}) {
  if (f.is_zero()) return f;
  VirtualFunction::Parts parts;
  parts.eval = [f, g](Rank n, double x) { return f(n, g(x)); };
  if (f.has_support()) {
    auto pieces = std::make_shared<const MonotonePieces>(monotone_pieces(g, opt.window, opt.grid));
    parts.support = [f, g, pieces](Rank n) {
      std::vector<Interval> out;
      const auto supp = *f.support(n);
      for (const auto& s : supp) {
        auto pre = preimage(g, *pieces, s);
        out.insert(out.end(), pre.begin(), pre.end());
      }
      return merge_intervals(std::move(out));
    };
  }
  parts.smoothness = weakest(f.smoothness(), g.smoothness());
  if (f.has_analytic_derivative() && g.smoothness().at_least(1))
    parts.derivative = [f, g, opt] {
      return multiply(compose(*f.analytic_derivative(), g, opt), derivative_function(g, 1));
    };
  parts.descriptor = f.descriptor() + "(" + g.descriptor() + ")";
  return VirtualFunction(std::move(parts));
}

/// f with its value at x0 replaced by `value` at every rank. The metadata of
/// f is kept as is, so a support claim may no longer be true.
inline VirtualFunction point_modified(const VirtualFunction& f, double x0, double value) {
  VirtualFunction::Parts parts = f.parts();
  parts.eval = [f, x0, value](Rank n, double x) { return x == x0 ? value : f(n, x); };
  parts.breakpoints = [f, x0](Rank n) {
    auto pts = f.breakpoints(n);
    pts.push_back(x0);
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  parts.smoothness = Smoothness::discontinuous();
  parts.derivative = nullptr;
  parts.zero = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s with value %.17g at %.17g", f.descriptor().c_str(), value, x0);
  parts.descriptor = buf;
  return VirtualFunction(std::move(parts));
}

/// Rank-wise derivative. Uses the analytic family when present, otherwise a
/// central difference with step radius(n)/64 (or 1/(64 n) without radius).
inline VirtualFunction derivative(const VirtualFunction& f) {
  if (!f.smoothness().at_least(1))
    throw NotDifferentiableError(f.descriptor() + " is " + f.smoothness().to_string() +
                                 ", not differentiable");
  if (auto d = f.analytic_derivative()) return *d;
  VirtualFunction::Parts parts = f.parts();
  parts.eval = [f](Rank n, double x) {
    const double r = f.support_radius(n).value_or(1.0 / n.as_double());
    const double h = r / 64.0;
    return (f(n, x + h) - f(n, x - h)) / (2.0 * h);
  };
  parts.smoothness = differentiated(f.smoothness());
  parts.derivative = nullptr;
  parts.descriptor = f.descriptor() + "'";
  return VirtualFunction(std::move(parts));
}

inline VirtualFunction derivative(const VirtualFunction& f, int k) {
  if (k < 0) throw std::invalid_argument("negative derivative order");
  VirtualFunction out = f;
  for (int i = 0; i < k; ++i) out = derivative(out);
  return out;
}

/// Diagonal evaluation n -> f_n(xi_n).
inline VirtualNumber eval_at(const VirtualFunction& f, const VirtualNumber& xi) {
  if (auto c = xi.constant_value()) {
    const double x = *c;
    return VirtualNumber::from_rule([f, x](Rank n) { return f(n, x); });
  }
  return VirtualNumber::from_rule([f, xi](Rank n) { return f(n, xi.value_at(n)); });
}

// ----------------------------------------------------------------- families

inline VirtualFunction bump_family() { return scale_family(bump_profile()); }
inline VirtualFunction square_family() { return scale_family(square_profile()); }

enum class Shift { Plus, Minus };

/// Bump centred at +2/n (Plus) or -2/n (Minus); support (1/n, 3/n) or its mirror.
inline VirtualFunction shifted_family(Shift dir) {
  return scale_family(shifted_bump_profile(dir == Shift::Plus ? 2.0 : -2.0));
}

/// n / (1 + n^2 x^2): positive everywhere, so it has no support radius.
inline VirtualFunction cauchy_psi() { return scale_family(cauchy_profile()); }

}  // namespace vdelta
