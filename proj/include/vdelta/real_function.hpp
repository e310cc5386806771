#pragma once

// Ordinary real functions f: R -> R used as test functions, inner functions
// of compositions and smooth factors.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdelta/jet.hpp"

namespace vdelta {

/// Declared differentiability class: -1 discontinuous, k for C^k.
struct Smoothness {
  static constexpr int kInfinite = INT_MAX;

  int order = kInfinite;

  static constexpr Smoothness discontinuous() { return {-1}; }
  static constexpr Smoothness continuous() { return {0}; }
  static constexpr Smoothness c(int k) { return {k}; }
  static constexpr Smoothness infinite() { return {kInfinite}; }

  constexpr bool at_least(int k) const { return order >= k; }

  std::string to_string() const {
    if (order < 0) return "discontinuous";
    if (order == kInfinite) return "Cinf";
    return "C" + std::to_string(order);
  }

  constexpr auto operator<=>(const Smoothness&) const = default;
};

inline Smoothness weakest(Smoothness a, Smoothness b) { return a.order < b.order ? a : b; }

/// One less order of smoothness (C^inf stays C^inf).
inline Smoothness differentiated(Smoothness s) {
  if (s.order == Smoothness::kInfinite || s.order < 0) return s;
  return {s.order - 1};
}

inline constexpr std::size_t kJetOrder = 6;
using JetN = Jet<kJetOrder>;

class RealFunction {
 public:
  using Rule = std::function<double(double)>;
  using JetRule = std::function<JetN(const JetN&)>;

  /// Wraps a callable usable with both double and JetN arguments; all
  /// derivatives up to kJetOrder come out exactly.
  template <class F>
  static RealFunction generic(std::string descriptor, Smoothness smoothness, F f) {
    Impl impl;
    impl.eval = [f](double x) { return static_cast<double>(f(x)); };
    impl.jet = [f](const JetN& x) { return JetN(f(x)); };
    impl.smoothness = smoothness;
    impl.descriptor = std::move(descriptor);
    return RealFunction(std::move(impl));
  }

  /// Plain rule with optional known derivative rules f', f'', ...
  static RealFunction from_rules(std::string descriptor, Smoothness smoothness, Rule eval,
                                 std::vector<Rule> known_derivatives = {}) {
    Impl impl;
    impl.eval = std::move(eval);
    impl.known = std::move(known_derivatives);
    impl.smoothness = smoothness;
    impl.descriptor = std::move(descriptor);
    return RealFunction(std::move(impl));
  }

  static RealFunction constant(double c) {
    if (!std::isfinite(c)) throw std::invalid_argument("constant must be finite");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    Impl impl;
    impl.eval = [c](double) { return c; };
    impl.jet = [c](const JetN&) { return JetN(c); };
    impl.smoothness = Smoothness::infinite();
    impl.descriptor = buf;
    impl.constant = c;
    return RealFunction(std::move(impl));
  }

  static RealFunction identity() {
    return generic("x", Smoothness::infinite(), [](const auto& x) { return x; });
  }

  double operator()(double x) const { return impl_->eval(x); }

  /// x -> f(x + a), keeping exact derivative rules.
  RealFunction shifted(double a) const {
    if (a == 0.0) return *this;
    Impl impl = *impl_;
    auto base = impl_;
    impl.eval = [base, a](double x) { return base->eval(x + a); };
    if (base->jet) impl.jet = [base, a](const JetN& x) { return base->jet(x + a); };
    for (std::size_t k = 0; k < impl.known.size(); ++k)
      impl.known[k] = [base, a, k](double x) { return base->known[k](x + a); };
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.17g", a);
    impl.descriptor = "(" + base->descriptor + ")(x" + buf + ")";
    return RealFunction(std::move(impl));
  }

  /// k-th derivative at x. Exact when a jet rule or known rule covers order
  /// k, central differences otherwise.
  double derivative(int k, double x) const {
    if (k < 0) throw std::invalid_argument("negative derivative order");
    if (k == 0) return (*this)(x);
    if (!impl_->smoothness.at_least(k))
      throw std::domain_error(impl_->descriptor + " is only " + impl_->smoothness.to_string() +
                              ", cannot take derivative of order " + std::to_string(k));
    if (impl_->constant) return 0.0;
    if (impl_->jet && static_cast<std::size_t>(k) <= kJetOrder)
      return impl_->jet(JetN::variable(x)).derivative(static_cast<std::size_t>(k));
    if (static_cast<std::size_t>(k) <= impl_->known.size()) return impl_->known[k - 1](x);
    return finite_difference(k, x);
  }

  JetN taylor(double x) const {
    if (impl_->jet) return impl_->jet(JetN::variable(x));
    JetN j;
    for (std::size_t k = 0; k <= kJetOrder; ++k) {
      if (!impl_->smoothness.at_least(static_cast<int>(k))) break;
      double fact = 1.0;
      for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
      j.c[k] = derivative(static_cast<int>(k), x) / fact;
    }
    return j;
  }

  bool has_exact_derivative(int k) const {
    return k == 0 || impl_->constant ||
           (impl_->jet && static_cast<std::size_t>(k) <= kJetOrder) ||
           static_cast<std::size_t>(k) <= impl_->known.size();
  }

  Smoothness smoothness() const { return impl_->smoothness; }
  const std::string& descriptor() const { return impl_->descriptor; }
  std::optional<double> constant_value() const { return impl_->constant; }

  /// Number of explicitly supplied derivative rules.
  std::size_t known_derivative_count() const { return impl_->known.size(); }

 private:
  struct Impl {
    Rule eval;
    JetRule jet;
    std::vector<Rule> known;
    Smoothness smoothness;
    std::string descriptor;
    std::optional<double> constant;
  };

  explicit RealFunction(Impl impl) : impl_(std::make_shared<const Impl>(std::move(impl))) {}

  double finite_difference(int k, double x) const {
    const double h = 1e-3 * std::max(1.0, std::abs(x));
    auto lower = [&](double t) { return derivative(k - 1, t); };
    return (-lower(x + 2 * h) + 8 * lower(x + h) - 8 * lower(x - h) + lower(x - 2 * h)) /
           (12 * h);
  }

  std::shared_ptr<const Impl> impl_;
};

/// Checks each supplied derivative rule against a central difference of the
/// previous order on `grid`, within `tol`.
inline bool verify_known_derivatives(const RealFunction& f, const std::vector<double>& grid,
                                     double tol = 1e-5) {
  const int count = static_cast<int>(f.known_derivative_count());
  for (int k = 1; k <= count; ++k) {
    for (double x : grid) {
      const double h = 1e-4 * std::max(1.0, std::abs(x));
      const double fd = (f.derivative(k - 1, x + h) - f.derivative(k - 1, x - h)) / (2 * h);
      if (std::abs(fd - f.derivative(k, x)) > tol * std::max(1.0, std::abs(fd))) return false;
    }
  }
  return true;
}

}  // namespace vdelta
