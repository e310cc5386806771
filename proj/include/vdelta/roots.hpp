#pragma once

// Simple roots of real functions on a finite scan window, certification of
// the hypotheses the composition rule needs, and preimages of intervals
// under a real function (used to locate the support of delta(g(x))).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "vdelta/real_function.hpp"

namespace vdelta {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Sorts and merges overlapping or touching intervals; drops empty ones.
inline std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::erase_if(v, [](const Interval& i) { return !(i.hi > i.lo); });
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, i.hi);
    else
      out.push_back(i);
  }
  return out;
}

struct Window {
  double lo = -50.0;
  double hi = 50.0;

  void validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
      throw std::invalid_argument("scan window must be a finite interval with lo < hi");
  }
};

struct RootOptions {
  double deriv_floor = 1e-8;
  /// Bracket width at which bisection stops; 0 runs to adjacent floats.
  double bisection_tol = 0.0;
  /// |g(a)| <= zero_tol * scale(g) counts as a zero.
  double zero_tol = 1e-12;
};

struct RootRecord {
  double a = 0.0;
  double g_prime = 0.0;
  Interval bracket;
};

struct NonSimpleRoot {
  double location = 0.0;
  std::string reason;
};

struct RootScan {
  std::vector<RootRecord> roots;
  std::vector<NonSimpleRoot> non_simple;
  /// max |g| over the scan grid.
  double scale = 0.0;
  Window window;
  std::size_t grid_size = 0;
};

namespace detail {

inline std::vector<double> grid_points(const Window& w, std::size_t grid_size) {
  std::vector<double> xs(grid_size + 1);
  const double step = (w.hi - w.lo) / static_cast<double>(grid_size);
  for (std::size_t i = 0; i <= grid_size; ++i) xs[i] = w.lo + static_cast<double>(i) * step;
  xs.back() = w.hi;
  return xs;
}

inline int sign_of(double v) { return (v > 0) - (v < 0); }

// Bisection on a sign change of f in [a, b]; returns the end with smaller |f|.
template <class F>
double bisect(F&& f, double a, double b, double tol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  double fb = f(b);
  if (fb == 0.0) return b;
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (!(m > a && m < b)) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (sign_of(fm) == sign_of(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

inline bool monotone_on(const RealFunction& g, double a, double lo, double hi, int dir,
                        double floor) {
  constexpr int kSamples = 64;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = lo + (hi - lo) * i / kSamples;
    const double d = g.derivative(1, x);
    if (sign_of(d) != dir || std::abs(d) <= floor) return false;
  }
  (void)a;
  return true;
}

}  // namespace detail

/// Sign-change scan on a uniform grid, bisection of each sign change and a
/// derivative check at every root. Zeros with a vanishing derivative and
/// zero touches without a sign change are reported as non-simple.
inline RootScan find_simple_roots(const RealFunction& g, Window window = {},
                                  std::size_t grid_size = 4096, const RootOptions& opt = {}) {
  window.validate();
  if (grid_size < 64) throw std::invalid_argument("grid_size must be >= 64");
  const auto xs = detail::grid_points(window, grid_size);
  std::vector<double> gs(xs.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    gs[i] = g(xs[i]);
    if (!std::isfinite(gs[i]))
      throw std::domain_error(g.descriptor() + " is not finite at x = " + std::to_string(xs[i]) +
                              " inside the scan window");
    scale = std::max(scale, std::abs(gs[i]));
  }
  RootScan scan;
  scan.scale = scale;
  scan.window = window;
  scan.grid_size = grid_size;
  const double zero_level = opt.zero_tol * scale;

  std::vector<double> candidates;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (gs[i] == 0.0) {
      const int left = i > 0 ? detail::sign_of(gs[i - 1]) : 0;
      const int right = i + 1 < xs.size() ? detail::sign_of(gs[i + 1]) : 0;
      if (left != 0 && right != 0 && left == right)
        scan.non_simple.push_back({xs[i], "zero touch without sign change (tangency)"});
      else
        candidates.push_back(xs[i]);
      continue;
    }
    if (i + 1 < xs.size() && gs[i + 1] != 0.0 && detail::sign_of(gs[i]) != detail::sign_of(gs[i + 1]))
      candidates.push_back(detail::bisect(g, xs[i], xs[i + 1], opt.bisection_tol));

    // Local minimum of |g| with no sign change: possible tangency.
    if (i > 0 && i + 1 < xs.size() && detail::sign_of(gs[i - 1]) == detail::sign_of(gs[i]) &&
        detail::sign_of(gs[i + 1]) == detail::sign_of(gs[i]) &&
        std::abs(gs[i]) <= std::abs(gs[i - 1]) && std::abs(gs[i]) <= std::abs(gs[i + 1])) {
      auto [xm, fm] = boost::math::tools::brent_find_minima(
          [&](double x) { return std::abs(g(x)); }, xs[i - 1], xs[i + 1],
          std::numeric_limits<double>::digits);
      if (fm <= zero_level)
        scan.non_simple.push_back({xm, "zero touch without sign change (tangency)"});
    }
  }

  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (double a : candidates) {
    const double d = g.smoothness().at_least(1) ? g.derivative(1, a) : 0.0;
    if (std::abs(d) <= opt.deriv_floor) {
      scan.non_simple.push_back({a, "derivative vanishes at the root"});
      continue;
    }
    scan.roots.push_back({a, d, {a, a}});
  }

  // Provisional brackets: half the gap to neighbours, capped at 1, shrunk
  // until g is strictly monotone on them.
  for (std::size_t i = 0; i < scan.roots.size(); ++i) {
    auto& r = scan.roots[i];
    double rad = 1.0;
    if (i > 0) rad = std::min(rad, 0.5 * (r.a - scan.roots[i - 1].a));
    if (i + 1 < scan.roots.size()) rad = std::min(rad, 0.5 * (scan.roots[i + 1].a - r.a));
    const int dir = detail::sign_of(r.g_prime);
    while (rad > 1e-10 && !detail::monotone_on(g, r.a, r.a - rad, r.a + rad, dir, opt.deriv_floor))
      rad *= 0.5;
    if (!(rad > 1e-10)) {
      scan.non_simple.push_back({r.a, "clustered roots: no monotone bracket"});
      rad = 0.0;
    }
    r.bracket = {r.a - rad, r.a + rad};
  }
  std::erase_if(scan.roots, [](const RootRecord& r) { return r.bracket.width() == 0.0; });
  std::sort(scan.non_simple.begin(), scan.non_simple.end(),
            [](const auto& a, const auto& b) { return a.location < b.location; });
  return scan;
}

enum class HypothesisVerdict { Certified, Violated, OutsideScanRisk };

inline const char* to_string(HypothesisVerdict v) {
  switch (v) {
    case HypothesisVerdict::Certified: return "certified";
    case HypothesisVerdict::Violated: return "violated";
    case HypothesisVerdict::OutsideScanRisk: return "outside-scan-risk";
  }
  return "?";
}

struct HypothesisCertificate {
  std::vector<RootRecord> roots;
  /// Lower bound on |g| outside the brackets (half the sampled minimum).
  double r = 0.0;
  Window scan_window;
  HypothesisVerdict verdict = HypothesisVerdict::Violated;
  std::string reason;

  bool certified() const { return verdict == HypothesisVerdict::Certified; }
};

struct CertifyOptions {
  std::size_t outside_samples = 10000;
  double deriv_floor = 1e-8;
};

/// Certifies on the scan window: brackets pairwise disjoint, g strictly
/// monotone on each, and |g| > r > 0 elsewhere. A minimum of |g| sitting on
/// a window edge and still decreasing outward is reported as
/// OutsideScanRisk (the scan cannot see what happens beyond it).
inline HypothesisCertificate certify_hypotheses(const RealFunction& g, const RootScan& scan,
                                                const CertifyOptions& opt = {}) {
  HypothesisCertificate cert;
  cert.roots = scan.roots;
  cert.scan_window = scan.window;
  const Window& w = scan.window;

  if (!scan.non_simple.empty()) {
    const auto& bad = scan.non_simple.front();
    cert.reason = "non-simple root at " + std::to_string(bad.location) + ": " + bad.reason;
    return cert;
  }
  for (std::size_t i = 1; i < cert.roots.size(); ++i) {
    if (!(cert.roots[i - 1].bracket.hi < cert.roots[i].bracket.lo)) {
      cert.reason = "clustered roots: brackets overlap near " + std::to_string(cert.roots[i].a);
      return cert;
    }
  }

  auto outside = [&](double x) {
    return std::none_of(cert.roots.begin(), cert.roots.end(), [&](const RootRecord& r) {
      return x > r.bracket.lo && x < r.bracket.hi;
    });
  };
  double min_abs = std::numeric_limits<double>::infinity();
  double arg_min = w.lo;
  auto visit = [&](double x) {
    if (x < w.lo || x > w.hi || !outside(x)) return;
    const double v = std::abs(g(x));
    if (v < min_abs) {
      min_abs = v;
      arg_min = x;
    }
  };
  for (std::size_t i = 0; i <= opt.outside_samples; ++i)
    visit(w.lo + (w.hi - w.lo) * static_cast<double>(i) / static_cast<double>(opt.outside_samples));
  for (std::size_t i = 0; i <= scan.grid_size; ++i)
    visit(w.lo + (w.hi - w.lo) * static_cast<double>(i) / static_cast<double>(scan.grid_size));
  for (const auto& r : cert.roots) {
    visit(r.bracket.lo);
    visit(r.bracket.hi);
  }

  if (!std::isfinite(min_abs)) {
    // Brackets cover the whole window.
    min_abs = std::numeric_limits<double>::infinity();
    for (const auto& r : cert.roots)
      min_abs = std::min({min_abs, std::abs(g(r.bracket.lo)), std::abs(g(r.bracket.hi))});
  }
  cert.r = 0.5 * min_abs;
  if (!(cert.r > 0.0)) {
    cert.reason = "g vanishes outside the root brackets near x = " + std::to_string(arg_min);
    cert.r = 0.0;
    return cert;
  }

  const double probe = 1e-3 * (w.hi - w.lo);
  auto edge_risk = [&](double edge, double outward) {
    const double at_edge = std::abs(g(edge));
    const double beyond = std::abs(g(edge + outward * probe));
    return at_edge < 2.0 * cert.r * (1.0 + 1e-9) && (!std::isfinite(beyond) || beyond < at_edge);
  };
  if (edge_risk(w.lo, -1.0) || edge_risk(w.hi, 1.0)) {
    cert.verdict = HypothesisVerdict::OutsideScanRisk;
    cert.reason = "|g| approaches the axis at the edge of the scan window";
    return cert;
  }
  cert.verdict = HypothesisVerdict::Certified;
  return cert;
}

/// Monotone pieces of g on a window: split points are the window ends plus
/// every critical point located by sign changes of g' on the grid.
struct MonotonePieces {
  std::vector<double> points;
  std::vector<double> values;
};

inline MonotonePieces monotone_pieces(const RealFunction& g, Window window,
                                      std::size_t grid_size = 4096) {
  window.validate();
  const auto xs = detail::grid_points(window, grid_size);
  MonotonePieces mp;
  mp.points.push_back(window.lo);
  if (g.smoothness().at_least(1)) {
    std::vector<double> ds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ds[i] = g.derivative(1, xs[i]);
    auto dg = [&](double x) { return g.derivative(1, x); };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (ds[i] == 0.0 && i > 0) mp.points.push_back(xs[i]);
      else if (ds[i] != 0.0 && ds[i + 1] != 0.0 && detail::sign_of(ds[i]) != detail::sign_of(ds[i + 1]))
        mp.points.push_back(detail::bisect(dg, xs[i], xs[i + 1], 0.0));
    }
  } else {
    // No derivative information: every grid cell is treated as a piece.
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) mp.points.push_back(xs[i]);
  }
  mp.points.push_back(window.hi);
  std::sort(mp.points.begin(), mp.points.end());
  mp.points.erase(std::unique(mp.points.begin(), mp.points.end()), mp.points.end());
  mp.values.reserve(mp.points.size());
  for (double p : mp.points) mp.values.push_back(g(p));
  return mp;
}

/// {x in window : target.lo <= g(x) <= target.hi} as a union of intervals.
inline std::vector<Interval> preimage(const RealFunction& g, const MonotonePieces& mp,
                                      Interval target) {
  std::vector<Interval> out;
  for (std::size_t j = 0; j + 1 < mp.points.size(); ++j) {
    const double a = mp.points[j], b = mp.points[j + 1];
    const double va = mp.values[j], vb = mp.values[j + 1];
    if (va == vb) {
      if (target.contains(va)) out.push_back({a, b});
      continue;
    }
    const bool increasing = vb > va;
    const double vmin = std::min(va, vb), vmax = std::max(va, vb);
    if (target.hi < vmin || target.lo > vmax) continue;
    // Solve g = level on the monotone piece; clamp to the piece ends.
    auto solve = [&](double level) {
      if (level <= vmin) return increasing ? a : b;
      if (level >= vmax) return increasing ? b : a;
      return detail::bisect([&](double x) { return g(x) - level; }, a, b, 0.0);
    };
    const double x1 = solve(target.lo), x2 = solve(target.hi);
    out.push_back({std::min(x1, x2), std::max(x1, x2)});
  }
  return merge_intervals(std::move(out));
}

}  // namespace vdelta
