#pragma once

// Limit extraction and growth-rate estimation for sequences sampled on a
// probe schedule of ranks n_0 < n_1 < ... .

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vdelta {

struct LimitEstimate {
  double value = 0.0;
  double error = 0.0;
};

struct ExtrapolationOptions {
  /// Highest polynomial degree in 1/n used by the Neville table.
  std::size_t max_order = 6;
};

/// Richardson extrapolation to 1/n -> 0 of values sampled at the given
/// ranks. Every entry T[i][k] of the Neville table (points i-k..i) carries an
/// error estimate from its two parents; the entry with the smallest estimate
/// wins and is accepted when that estimate is within tol * max(1, |value|).
/// Picking the best window keeps rounding noise at the highest ranks from
/// spoiling limits that the lower ranks already pin down.
inline std::optional<LimitEstimate> extrapolate_limit(std::span<const double> ranks,
                                                      std::span<const double> values, double tol,
                                                      const ExtrapolationOptions& opt = {}) {
  if (ranks.size() != values.size()) throw std::invalid_argument("rank/value size mismatch");
  const std::size_t m = values.size();
  if (m < 2) return std::nullopt;
  for (double v : values)
    if (!std::isfinite(v)) return std::nullopt;

  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i) h[i] = 1.0 / ranks[i];

  const std::size_t orders = std::min(opt.max_order, m - 1) + 1;
  std::vector<std::vector<double>> table(m, std::vector<double>(orders, 0.0));
  std::optional<LimitEstimate> best;

  auto consider = [&](double value, double err) {
    if (!std::isfinite(value) || !std::isfinite(err)) return;
    if (!best || err < best->error || (err == best->error)) best = LimitEstimate{value, err};
  };

  for (std::size_t i = 0; i < m; ++i) {
    table[i][0] = values[i];
    if (i > 0) consider(values[i], std::abs(values[i] - values[i - 1]));
    for (std::size_t k = 1; k < orders && k <= i; ++k) {
      const double cur = table[i][k - 1];
      const double prev = table[i - 1][k - 1];
      table[i][k] = cur + (cur - prev) * h[i] / (h[i - k] - h[i]);
      const double err = std::max(std::abs(table[i][k] - cur), std::abs(table[i][k] - prev));
      consider(table[i][k], err);
    }
  }
  if (best && best->error <= tol * std::max(1.0, std::abs(best->value))) return best;
  return std::nullopt;
}

struct PowerLawFit {
  double exponent = 0.0;
  double log_coefficient = 0.0;
  double r_squared = 0.0;
  int sign = 0;
};

/// Least-squares fit of log|v| = log C + p log n over the last `window`
/// samples. Requires nonzero values of a single sign.
inline std::optional<PowerLawFit> fit_power_law(std::span<const double> ranks,
                                                std::span<const double> values,
                                                std::size_t window = 8) {
  if (ranks.size() != values.size()) throw std::invalid_argument("rank/value size mismatch");
  const std::size_t m = values.size();
  const std::size_t w = std::min(window, m);
  if (w < 3) return std::nullopt;
  const std::size_t first = m - w;
  const int sign = values[first] > 0 ? 1 : -1;
  std::vector<double> lx, ly;
  for (std::size_t i = first; i < m; ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v == 0.0 || (v > 0 ? 1 : -1) != sign) return std::nullopt;
    lx.push_back(std::log(ranks[i]));
    ly.push_back(std::log(std::abs(v)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < w; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(w);
  my /= static_cast<double>(w);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < w; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_coefficient = my - fit.exponent * mx;
  // A perfectly flat sequence has syy == 0; it is a perfect (p = 0) fit.
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.sign = sign;
  return fit;
}

struct GrowthCriteria {
  double min_exponent = 0.05;
  double min_r_squared = 0.99;
  std::size_t window = 8;
  /// Sequences whose last value stays below this are rounding noise.
  double min_magnitude = 1e-6;
};

inline std::optional<PowerLawFit> certify_growth(std::span<const double> ranks,
                                                 std::span<const double> values,
                                                 const GrowthCriteria& crit = {}) {
  auto fit = fit_power_law(ranks, values, crit.window);
  if (!fit || values.empty() || std::abs(values.back()) < crit.min_magnitude) return std::nullopt;
  if (fit->exponent > crit.min_exponent && fit->r_squared > crit.min_r_squared) return fit;
  return std::nullopt;
}

inline bool grows_without_bound(std::span<const double> ranks, std::span<const double> values) {
  return certify_growth(ranks, values).has_value();
}

}  // namespace vdelta
