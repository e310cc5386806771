#pragma once

// Truncated Taylor arithmetic. A Jet<N> holds the Taylor coefficients
// f(x0), f'(x0), f''(x0)/2!, ..., f^(N)(x0)/N! of a function at a point;
// pushing a seeded jet through ordinary code yields all derivatives up to
// order N exactly (forward-mode differentiation of arbitrary order).

#include <array>
#include <cmath>
#include <cstddef>

namespace vdelta {

template <std::size_t N>
struct Jet {
  std::array<double, N + 1> c{};

  constexpr Jet() = default;
  constexpr Jet(double v) { c[0] = v; }  // NOLINT: implicit lift of constants

  static constexpr Jet variable(double x0) {
    Jet j(x0);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }

  constexpr double value() const { return c[0]; }

  /// k-th derivative (k <= N).
  constexpr double derivative(std::size_t k) const {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return c[k] * f;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
};

template <std::size_t N>
Jet<N> operator-(Jet<N> a) {
  for (auto& v : a.c) v = -v;
  return a;
}

template <std::size_t N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) {
  return a += b;
}
template <std::size_t N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) {
  return a -= b;
}

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k <= N; ++k) {
    double s = a.c[k];
    for (std::size_t j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  return r;
}

template <std::size_t N>
Jet<N> operator+(const Jet<N>& a, double b) { return a + Jet<N>(b); }
template <std::size_t N>
Jet<N> operator+(double a, const Jet<N>& b) { return Jet<N>(a) + b; }
template <std::size_t N>
Jet<N> operator-(const Jet<N>& a, double b) { return a - Jet<N>(b); }
template <std::size_t N>
Jet<N> operator-(double a, const Jet<N>& b) { return Jet<N>(a) - b; }
template <std::size_t N>
Jet<N> operator*(Jet<N> a, double b) {
  for (auto& v : a.c) v *= b;
  return a;
}
template <std::size_t N>
Jet<N> operator*(double a, const Jet<N>& b) { return b * a; }
template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, double b) { return a * (1.0 / b); }
template <std::size_t N>
Jet<N> operator/(double a, const Jet<N>& b) { return Jet<N>(a) / b; }

template <std::size_t N>
Jet<N> exp(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::exp(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c[j] * r.c[k - j];
    r.c[k] = s / static_cast<double>(k);
  }
  return r;
}

template <std::size_t N>
Jet<N> log(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::log(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += static_cast<double>(j) * r.c[j] * a.c[k - j];
    r.c[k] = (a.c[k] - s / static_cast<double>(k)) / a.c[0];
  }
  return r;
}

namespace detail {

template <std::size_t N>
void sin_cos(const Jet<N>& a, Jet<N>& s, Jet<N>& co) {
  s.c[0] = std::sin(a.c[0]);
  co.c[0] = std::cos(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double ss = 0.0, cc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      ss += static_cast<double>(j) * a.c[j] * co.c[k - j];
      cc += static_cast<double>(j) * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / static_cast<double>(k);
    co.c[k] = -cc / static_cast<double>(k);
  }
}

// Series of the formal derivative d/dx, truncated to the same order.
template <std::size_t N>
Jet<N> shift_derivative(const Jet<N>& a) {
  Jet<N> d;
  for (std::size_t k = 0; k < N; ++k) d.c[k] = static_cast<double>(k + 1) * a.c[k + 1];
  return d;
}

// Inverse of shift_derivative with the given constant term.
template <std::size_t N>
Jet<N> integrate_series(const Jet<N>& d, double c0) {
  Jet<N> r;
  r.c[0] = c0;
  for (std::size_t k = 1; k <= N; ++k) r.c[k] = d.c[k - 1] / static_cast<double>(k);
  return r;
}

}  // namespace detail

template <std::size_t N>
Jet<N> sin(const Jet<N>& a) {
  Jet<N> s, c;
  detail::sin_cos(a, s, c);
  return s;
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& a) {
  Jet<N> s, c;
  detail::sin_cos(a, s, c);
  return c;
}

template <std::size_t N>
Jet<N> atan(const Jet<N>& a) {
  const Jet<N> deriv = detail::shift_derivative(a) / (1.0 + a * a);
  return detail::integrate_series(deriv, std::atan(a.c[0]));
}

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& a) {
  return exp(Jet<N>(0.5) * log(a));
}

/// |a| with the branch chosen from the sign of the value; not differentiable
/// where the value is exactly zero.
template <std::size_t N>
Jet<N> abs(const Jet<N>& a) {
  return a.c[0] < 0.0 ? -a : a;
}

template <std::size_t N>
Jet<N> pow(const Jet<N>& a, int k) {
  Jet<N> base = k < 0 ? Jet<N>(1.0) / a : a;
  unsigned e = static_cast<unsigned>(k < 0 ? -k : k);
  Jet<N> r(1.0);
  while (e) {
    if (e & 1u) r = r * base;
    base = base * base;
    e >>= 1u;
  }
  return r;
}

template <std::size_t N>
Jet<N> pow(const Jet<N>& a, const Jet<N>& b) {
  return exp(b * log(a));
}

}  // namespace vdelta
