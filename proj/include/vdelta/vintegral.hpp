#pragma once

// Virtual integrals: per-rank quadrature between virtual bounds and the
// reduction of the resulting rank sequence to a real limit, a certified
// power-law divergence, or an honest "undetermined".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vdelta/accel.hpp"
#include "vdelta/quadrature.hpp"
#include "vdelta/vfun.hpp"
#include "vdelta/vnum.hpp"

namespace vdelta {

class VirtualBound {
 public:
  enum class Kind { NegInfinity, PosInfinity, Const, Sequence };

  static VirtualBound neg_infinity() { return VirtualBound(Kind::NegInfinity, 0.0, std::nullopt); }
  static VirtualBound pos_infinity() { return VirtualBound(Kind::PosInfinity, 0.0, std::nullopt); }
  static VirtualBound constant(double r) {
    if (!std::isfinite(r)) throw std::invalid_argument("constant bound must be finite");
    return VirtualBound(Kind::Const, r, std::nullopt);
  }
  static VirtualBound sequence(VirtualNumber v) { return VirtualBound(Kind::Sequence, 0.0, std::move(v)); }

  double at(Rank n) const {
    switch (kind_) {
      case Kind::NegInfinity: return -n.as_double();
      case Kind::PosInfinity: return n.as_double();
      case Kind::Const: return c_;
      case Kind::Sequence: return seq_->value_at(n);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }

 private:
  VirtualBound(Kind k, double c, std::optional<VirtualNumber> s) : kind_(k), c_(c), seq_(std::move(s)) {}

  Kind kind_;
  double c_;
  std::optional<VirtualNumber> seq_;
};

class RankQuadratureError : public std::runtime_error {
 public:
  RankQuadratureError(Rank n, const QuadratureError& e)
      : std::runtime_error(std::string(e.what()) + " at rank " + std::to_string(n.value())),
        rank_(n),
        error_estimate_(e.error_estimate()),
        tolerance_(e.tolerance()) {}

  Rank rank() const noexcept { return rank_; }
  double error_estimate() const noexcept { return error_estimate_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  Rank rank_;
  double error_estimate_, tolerance_;
};

/// Integral of f_n over [lo(n), hi(n)], restricted to the declared support
/// and split at every breakpoint.
inline double integrate_rank(const VirtualFunction& f, const VirtualBound& lo, const VirtualBound& hi,
                             Rank n, const QuadratureOptions& opt = {}) {
  const double a = lo.at(n), b = hi.at(n);
  if (!(a <= b)) throw std::invalid_argument("integration bounds out of order at rank " +
                                             std::to_string(n.value()));
  if (f.is_zero() || a == b) return 0.0;
  std::vector<Interval> pieces;
  if (auto s = f.support(n)) {
    for (const auto& i : *s) {
      const double l = std::max(a, i.lo), h = std::min(b, i.hi);
      if (h > l) pieces.push_back({l, h});
    }
  } else {
    pieces.push_back({a, b});
  }
  if (pieces.empty()) return 0.0;
  const auto bps = f.breakpoints(n);
  QuadratureOptions piece_opt = opt;
  piece_opt.abs_tol = opt.abs_tol / static_cast<double>(pieces.size());
  auto rule = [&](double x) { return f(n, x); };
  double total = 0.0;
  for (const auto& p : pieces) {
    std::vector<double> pts{p.lo};
    for (double x : bps)
      if (x > p.lo && x < p.hi) pts.push_back(x);
    pts.push_back(p.hi);
    std::sort(pts.begin(), pts.end());
    try {
      total += integrate_adaptive(rule, std::span<const double>(pts), piece_opt).value;
    } catch (const QuadratureError& e) {
      throw RankQuadratureError(n, e);
    }
  }
  return total;
}

struct Reduced {
  double value = 0.0;
  double error = 0.0;
};

struct Irreducible {
  double exponent = 0.0;
  int sign = 1;
};

struct Undetermined {
  std::string reason;
};

struct IntegralResult {
  std::variant<Reduced, Irreducible, Undetermined> outcome;
  std::vector<std::pair<std::uint64_t, double>> rank_values;

  bool reduced() const { return std::holds_alternative<Reduced>(outcome); }
  bool irreducible() const { return std::holds_alternative<Irreducible>(outcome); }
  bool undetermined() const { return std::holds_alternative<Undetermined>(outcome); }
  /// Reduced value; throws when the integral did not reduce.
  double value() const {
    if (auto r = std::get_if<Reduced>(&outcome)) return r->value;
    throw std::logic_error("integral is not reduced");
  }
};

struct ReduceOptions {
  double tol = 1e-9;
  GrowthCriteria growth{};
  QuadratureOptions quadrature{};
};

/// Classifies a recorded rank sequence. Growth is tested before the limit so
/// that slowly diverging sequences are never mistaken for limits.
inline IntegralResult classify_rank_values(std::vector<std::pair<std::uint64_t, double>> values,
                                           const ReduceOptions& opt = {}) {
  IntegralResult out;
  out.rank_values = std::move(values);
  std::vector<double> ranks, vals;
  for (const auto& [n, v] : out.rank_values) {
    ranks.push_back(static_cast<double>(n));
    vals.push_back(v);
  }
  if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; })) {
    out.outcome = Reduced{0.0, 0.0};
    return out;
  }
  if (auto fit = certify_growth(ranks, vals, opt.growth)) {
    out.outcome = Irreducible{fit->exponent, fit->sign};
    return out;
  }
  if (auto lim = extrapolate_limit(ranks, vals, opt.tol)) {
    out.outcome = Reduced{lim->value, lim->error};
    return out;
  }
  out.outcome = Undetermined{"rank values neither settle nor follow a power law"};
  return out;
}

/// Per-rank integrals against a k-th derivative kernel cancel terms of size
/// n^k, so quadrature noise grows like n^k. Keeps the ranks with
/// n^k <= 2^20, and never fewer than the first two.
inline constexpr double kMaxDerivativeAmplification = 1048576.0;

inline ProbeSchedule conditioned_schedule(const ProbeSchedule& schedule, int k) {
  if (k <= 0) return schedule;
  ProbeSchedule out;
  for (auto n : schedule)
    if (out.size() < 2 || std::pow(n.as_double(), k) <= kMaxDerivativeAmplification) out.push_back(n);
  return out;
}

/// Options for k-th derivative kernels with k >= 2: quadrature close to its
/// rounding floor and a limit tolerance of 1e-7.
inline ReduceOptions conditioned_options(ReduceOptions opt, int k) {
  if (k < 2) return opt;
  opt.quadrature.rel_tol = std::min(opt.quadrature.rel_tol, 3e-14);
  opt.tol = std::max(opt.tol, 1e-7);
  return opt;
}

inline IntegralResult reduce_integral(const VirtualFunction& f, const VirtualBound& lo,
                                      const VirtualBound& hi,
                                      const ProbeSchedule& schedule = default_schedule(),
                                      const ReduceOptions& opt = {}) {
  validate_schedule(schedule, 2);
  std::vector<std::pair<std::uint64_t, double>> values;
  for (auto n : schedule) {
    try {
      values.emplace_back(n.value(), integrate_rank(f, lo, hi, n, opt.quadrature));
    } catch (const RankQuadratureError& e) {
      IntegralResult out;
      out.rank_values = std::move(values);
      out.outcome = Undetermined{e.what()};
      return out;
    }
  }
  return classify_rank_values(std::move(values), opt);
}

inline IntegralResult reduce_integral(const VirtualFunction& f,
                                      const ProbeSchedule& schedule = default_schedule(),
                                      const ReduceOptions& opt = {}) {
  return reduce_integral(f, VirtualBound::neg_infinity(), VirtualBound::pos_infinity(), schedule, opt);
}

namespace detail {

// Overlap of {b : x - b in s1} with s2 for every pair of support intervals.
inline std::vector<Interval> contraction_overlap(const std::vector<Interval>& s1,
                                                 const std::vector<Interval>& s2, double x) {
  std::vector<Interval> out;
  for (const auto& i2 : s2)
    for (const auto& i1 : s1) {
      const double lo = std::max(i2.lo, x - i1.hi), hi = std::min(i2.hi, x - i1.lo);
      if (hi > lo) out.push_back({lo, hi});
    }
  return merge_intervals(std::move(out));
}

inline QuadratureOptions inner_quadrature() {
  QuadratureOptions q;
  q.abs_tol = 1e-300;
  q.rel_tol = 1e-13;
  return q;
}

}  // namespace detail

/// Rank-n contraction  integral of f1_n(x - b) f2_n(b - a) db  over the
/// overlap of the two supports.
inline double contract_rank(const VirtualFunction& f1, const VirtualFunction& f2, double x, double a,
                            Rank n) {
  auto s1 = f1.support(n), s2 = f2.support(n);
  if (!s1 || !s2) throw std::invalid_argument("contraction needs kernels with declared support");
  for (auto& i : *s2) {
    i.lo += a;
    i.hi += a;
  }
  double total = 0.0;
  for (const auto& piece : detail::contraction_overlap(*s1, *s2, x)) {
    try {
      total += integrate_adaptive([&](double b) { return f1(n, x - b) * f2(n, b - a); }, piece.lo,
                                  piece.hi, detail::inner_quadrature())
                   .value;
    } catch (const QuadratureError& e) {
      throw RankQuadratureError(n, e);
    }
  }
  return total;
}

/// Rank-wise convolution (f1 * f2)_n(x) = integral of f1_n(x - b) f2_n(b) db.
/// Both families must be continuous with declared support; the result is
/// supported on the Minkowski sum with radius r1 + r2.
inline VirtualFunction convolve_family(const VirtualFunction& f1, const VirtualFunction& f2) {
  if (!f1.smoothness().at_least(0) || !f2.smoothness().at_least(0))
    throw std::invalid_argument("convolution needs continuous kernels; " +
                                (f1.smoothness().at_least(0) ? f2 : f1).descriptor() +
                                " is discontinuous");
  if (!f1.has_support_radius() || !f2.has_support_radius())
    throw std::invalid_argument("convolution needs kernels with a support radius");
  VirtualFunction::Parts parts;
  parts.eval = [f1, f2](Rank n, double x) { return contract_rank(f1, f2, x, 0.0, n); };
  parts.radius = [f1, f2](Rank n) { return *f1.support_radius(n) + *f2.support_radius(n); };
  parts.support = [f1, f2](Rank n) {
    std::vector<Interval> out;
    const auto s1 = *f1.support(n), s2 = *f2.support(n);
    for (const auto& i1 : s1)
      for (const auto& i2 : s2) out.push_back({i1.lo + i2.lo, i1.hi + i2.hi});
    return merge_intervals(std::move(out));
  };
  parts.smoothness = std::max(f1.smoothness(), f2.smoothness());
  if (f1.has_analytic_derivative() && f1.smoothness().at_least(1))
    parts.derivative = [f1, f2] { return convolve_family(*f1.analytic_derivative(), f2); };
  parts.descriptor = "conv(" + f1.descriptor() + ", " + f2.descriptor() + ")";
  return VirtualFunction(std::move(parts));
}

}  // namespace vdelta
