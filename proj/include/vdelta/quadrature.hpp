#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a list of
// breakpoints. Breakpoints are never straddled by a panel, so integrands
// with known discontinuities or narrow supports are handled exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace vdelta {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  /// Relative to the integral of |f|.
  double rel_tol = 1e-13;
  std::size_t max_panels = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  std::size_t panels = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double lo, double hi, double error, double tol, std::size_t panels)
      : std::runtime_error("quadrature did not converge on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]: error estimate " + std::to_string(error) +
                           " > tolerance " + std::to_string(tol) + " after " +
                           std::to_string(panels) + " panels"),
        lo_(lo),
        hi_(hi),
        error_(error),
        tol_(tol) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double error_estimate() const noexcept { return error_; }
  double tolerance() const noexcept { return tol_; }

 private:
  double lo_, hi_, error_, tol_;
};

namespace detail {

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One Kronrod-15 panel with the QUADPACK error heuristic.
template <class F>
Panel gk15(F& f, double a, double b) {
  using boost::math::quadrature::gauss;
  using boost::math::quadrature::gauss_kronrod;
  const auto& xk = gauss_kronrod<double, 15>::abscissa();
  const auto& wk = gauss_kronrod<double, 15>::weights();
  const auto& wg = gauss<double, 7>::weights();

  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> fv{};
  fv[0] = f(c);
  for (std::size_t i = 1; i < 8; ++i) {
    fv[2 * i - 1] = f(c - h * xk[i]);
    fv[2 * i] = f(c + h * xk[i]);
  }
  double kron = wk[0] * fv[0];
  double gs = wg[0] * fv[0];
  double abs_sum = wk[0] * std::abs(fv[0]);
  for (std::size_t i = 1; i < 8; ++i) {
    const double pair = fv[2 * i - 1] + fv[2 * i];
    kron += wk[i] * pair;
    abs_sum += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
    if (i % 2 == 0) gs += wg[i / 2] * pair;
  }
  const double mean = 0.5 * kron;
  double asc = wk[0] * std::abs(fv[0] - mean);
  for (std::size_t i = 1; i < 8; ++i)
    asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

  const double hh = std::abs(h);
  double err = std::abs((kron - gs) * h);
  const double resasc = asc * hh;
  const double resabs = abs_sum * hh;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps))
    err = std::max(50 * eps * resabs, err);
  return {a, b, kron * h, err, resabs};
}

}  // namespace detail

/// Integrates f over [points.front(), points.back()], splitting first at every
/// interior point. Throws QuadratureError when the tolerance cannot be met.
template <class F>
QuadratureResult integrate_adaptive(F&& f, std::span<const double> points,
                                    const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (points.size() < 2) return out;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] >= points[i - 1])) throw std::invalid_argument("breakpoints must be sorted");

  std::priority_queue<detail::Panel> queue;
  std::vector<detail::Panel> frozen;  // too narrow to split further
  double value = 0.0, error = 0.0, l1 = 0.0, frozen_error = 0.0;
  std::size_t panels = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] == points[i - 1]) continue;
    auto p = detail::gk15(f, points[i - 1], points[i]);
    value += p.value;
    error += p.error;
    l1 += p.l1;
    ++panels;
    queue.push(p);
  }
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * l1); };

  while (error > tolerance() && !queue.empty()) {
    if (panels >= opt.max_panels) break;
    auto worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      frozen_error += worst.error;
      if (frozen_error > tolerance()) break;
      continue;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    ++panels;
    queue.push(left);
    queue.push(right);
  }
  // Recompute the running sums to shed accumulated cancellation.
  value = 0.0;
  error = 0.0;
  l1 = 0.0;
  std::vector<detail::Panel> all = frozen;
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& p : all) {
    value += p.value;
    error += p.error;
    l1 += p.l1;
  }
  if (!std::isfinite(value) || error > tolerance())
    throw QuadratureError(points.front(), points.back(), error, tolerance(), panels);
  out.value = value;
  out.error = error;
  out.l1 = l1;
  out.panels = panels;
  return out;
}

template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  const double pts[2] = {a, b};
  return integrate_adaptive(std::forward<F>(f), std::span<const double>(pts, 2), opt);
}

}  // namespace vdelta
