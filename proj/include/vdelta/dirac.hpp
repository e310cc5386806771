#pragma once

// Dirac kernels: virtual functions carrying a certificate that they are
// nonnegative, integrate to one, and vanish outside an infinitesimal
// neighbourhood of the origin. Sifting and convolution operate on them.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vdelta/vfun.hpp"
#include "vdelta/vintegral.hpp"
#include "vdelta/vnum.hpp"

namespace vdelta {

/// The three defining conditions, numbered as usual: (i) sign, (ii) unit
/// integral, (iii) infinitesimal support.
enum class DiracCondition { Nonnegative = 1, Normalized = 2, InfinitesimalSupport = 3 };

inline const char* to_string(DiracCondition c) {
  switch (c) {
    case DiracCondition::Nonnegative: return "(i) nonnegativity";
    case DiracCondition::Normalized: return "(ii) unit integral";
    case DiracCondition::InfinitesimalSupport: return "(iii) infinitesimal support";
  }
  return "?";
}

struct DiracCertificate {
  double min_sampled_value = 0.0;
  Reduced normalization;
  VirtualNumber support_radius = make_const(0.0);
  ProbeSchedule schedule;
};

struct DiracViolation {
  DiracCondition condition;
  std::string detail;
};

/// Violations in checking order; the first one is the headline.
struct DiracFailure {
  std::vector<DiracViolation> violations;

  DiracCondition condition() const { return violations.front().condition; }
  bool violates(DiracCondition c) const {
    return std::any_of(violations.begin(), violations.end(),
                       [c](const DiracViolation& v) { return v.condition == c; });
  }
};

using DiracCheck = std::variant<DiracCertificate, DiracFailure>;

inline bool passed(const DiracCheck& c) { return std::holds_alternative<DiracCertificate>(c); }

struct DiracCheckOptions {
  ProbeSchedule schedule = default_schedule();
  /// Allowed |limit - 1| for the normalization.
  double tol = 1e-8;
  std::size_t grid_points = 1000;
  /// Half-width of the dyadic outside grid k/8.
  double outside_span = 16.0;
  ReduceOptions reduce{};
};

namespace detail {

// Points at which a claimed support radius r is tested: the dyadic grid
// k/8 on [-span, span], a dense band just outside +-r and a geometric
// sweep outward from it.
inline std::vector<double> outside_probes(double r, double span) {
  std::vector<double> pts;
  for (double k = -8.0 * span; k <= 8.0 * span; k += 1.0) pts.push_back(k / 8.0);
  for (int j = 0; j <= 200; ++j) {
    const double t = r * (1.0 + 3.0 * j / 200.0);
    pts.push_back(t);
    pts.push_back(-t);
  }
  for (double t = r; t < span; t *= 1.5) {
    pts.push_back(t);
    pts.push_back(-t);
  }
  return pts;
}

inline std::string fmt_point(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Checks the three defining conditions on the probe schedule. Support is
/// checked first, then sign, then normalization; all three are always
/// evaluated so the failure lists every violated condition.
inline DiracCheck check_dirac(const VirtualFunction& f, const DiracCheckOptions& opt = {}) {
  validate_schedule(opt.schedule, 2);
  std::vector<DiracViolation> violations;

  // (iii) declared radius: zero outside and infinitesimal. Without a
  // declaration, use the empirical radius of the sampled nonzero set.
  std::optional<std::string> support_issue;
  VirtualNumber radius = make_const(0.0);
  if (f.has_support_radius()) {
    for (auto n : opt.schedule) {
      const double r = *f.support_radius(n);
      for (double x : detail::outside_probes(r, opt.outside_span)) {
        if (std::abs(x) < r) continue;
        const double v = f(n, x);
        if (v != 0.0) {
          support_issue = "value " + detail::fmt_point(v) + " at x = " + detail::fmt_point(x) +
                          " outside declared support radius " + detail::fmt_point(r) +
                          " at rank " + std::to_string(n.value());
          break;
        }
      }
      if (support_issue) break;
    }
    radius = f.radius_sequence();
  } else {
    const double span = opt.outside_span;
    radius = VirtualNumber::from_rule([f, span](Rank n) {
      double r = 0.0;
      for (double x : detail::outside_probes(1.0 / n.as_double(), span))
        if (f(n, x) != 0.0) r = std::max(r, std::abs(x));
      return r;
    });
  }
  if (!support_issue) {
    const auto cls = classify(radius, opt.schedule);
    if (cls != NumberClass::Infinitesimal)
      support_issue = std::string("support radius sequence is ") + to_string(cls) +
                      ", not infinitesimal";
  }
  if (support_issue) violations.push_back({DiracCondition::InfinitesimalSupport, *support_issue});

  // (i) sign on a grid over the support (or [-1, 1] without one).
  double min_value = 0.0;
  bool have_min = false;
  std::optional<std::string> sign_issue;
  for (auto n : opt.schedule) {
    const double r = f.support_radius(n).value_or(1.0);
    const auto m = static_cast<double>(opt.grid_points - 1);
    for (std::size_t i = 0; i < opt.grid_points; ++i) {
      const double x = -r + 2.0 * r * static_cast<double>(i) / m;
      const double v = f(n, x);
      if (!have_min || v < min_value) min_value = v;
      have_min = true;
      if (v < 0.0 && !sign_issue)
        sign_issue = "negative value " + detail::fmt_point(v) + " at x = " + detail::fmt_point(x) +
                     " at rank " + std::to_string(n.value());
    }
  }
  if (sign_issue) violations.push_back({DiracCondition::Nonnegative, *sign_issue});

  // (ii) unit integral.
  Reduced norm;
  const auto integral = reduce_integral(f, opt.schedule, opt.reduce);
  if (const auto* r = std::get_if<Reduced>(&integral.outcome); r && std::abs(r->value - 1.0) <= opt.tol) {
    norm = *r;
  } else {
    std::string why;
    if (r) why = "integral reduces to " + detail::fmt_point(r->value) + ", not 1";
    else if (const auto* g = std::get_if<Irreducible>(&integral.outcome))
      why = "integral diverges like n^" + detail::fmt_point(g->exponent);
    else why = "integral does not reduce: " + std::get<Undetermined>(integral.outcome).reason;
    violations.push_back({DiracCondition::Normalized, why});
  }

  if (!violations.empty()) return DiracFailure{std::move(violations)};
  return DiracCertificate{min_value, norm, radius, opt.schedule};
}

class NotDiracError : public std::invalid_argument {
 public:
  NotDiracError(const std::string& what, DiracFailure failure)
      : std::invalid_argument(what), failure_(std::move(failure)) {}
  const DiracFailure& failure() const noexcept { return failure_; }

 private:
  DiracFailure failure_;
};

/// Serializable summary of how a kernel was built.
struct KernelDescriptor {
  std::string name;
  std::map<std::string, std::string> params;
  Smoothness smoothness;
  std::string support_rule;
};

class DiracKernel {
 public:
  /// Runs check_dirac and throws NotDiracError on failure.
  static DiracKernel certify(VirtualFunction base, KernelDescriptor descriptor,
                             const DiracCheckOptions& opt = {}) {
    auto check = check_dirac(base, opt);
    if (auto* fail = std::get_if<DiracFailure>(&check)) {
      const auto& v = fail->violations.front();
      throw NotDiracError(base.descriptor() + " is not a Dirac function: " + to_string(v.condition) +
                              ": " + v.detail,
                          *fail);
    }
    return DiracKernel(std::move(base), std::get<DiracCertificate>(std::move(check)),
                       std::move(descriptor));
  }

  double operator()(Rank n, double x) const { return base_(n, x); }
  double rank_eval(Rank n, double x) const { return base_(n, x); }
  const VirtualFunction& function() const { return base_; }
  const DiracCertificate& certificate() const { return cert_; }
  const KernelDescriptor& descriptor() const { return desc_; }
  const std::string& name() const { return desc_.name; }

 private:
  DiracKernel(VirtualFunction f, DiracCertificate c, KernelDescriptor d)
      : base_(std::move(f)), cert_(std::move(c)), desc_(std::move(d)) {}

  VirtualFunction base_;
  DiracCertificate cert_;
  KernelDescriptor desc_;
};

/// n f(n x) with the normalized C-infinity bump f.
inline const DiracKernel& bump_delta() {
  static const DiracKernel k = DiracKernel::certify(
      bump_family(), {"bump", {}, Smoothness::infinite(), "|x| < 1/n"});
  return k;
}

/// n/2 on |x| < 1/n.
inline const DiracKernel& square_delta() {
  static const DiracKernel k = DiracKernel::certify(
      square_family(), {"square", {}, Smoothness::discontinuous(), "|x| < 1/n"});
  return k;
}

/// Bump moved to +2/n (support (1/n, 3/n)) or -2/n.
inline const DiracKernel& shifted_delta(Shift dir) {
  static const DiracKernel plus = DiracKernel::certify(
      shifted_family(Shift::Plus), {"plus", {{"shift", "2/n"}}, Smoothness::infinite(), "1/n < x < 3/n"});
  static const DiracKernel minus = DiracKernel::certify(
      shifted_family(Shift::Minus), {"minus", {{"shift", "-2/n"}}, Smoothness::infinite(), "-3/n < x < -1/n"});
  return dir == Shift::Plus ? plus : minus;
}

inline DiracKernel mixture(const DiracKernel& d1, const DiracKernel& d2) {
  KernelDescriptor desc{"mix",
                        {{"first", d1.name()}, {"second", d2.name()}},
                        weakest(d1.function().smoothness(), d2.function().smoothness()),
                        "max of the two radii"};
  return DiracKernel::certify(average(d1.function(), d2.function()), std::move(desc));
}

/// Rank-wise convolution of two continuous kernels.
inline DiracKernel convolve(const DiracKernel& d1, const DiracKernel& d2) {
  KernelDescriptor desc{"conv",
                        {{"first", d1.name()}, {"second", d2.name()}},
                        std::max(d1.function().smoothness(), d2.function().smoothness()),
                        "sum of the two radii"};
  return DiracKernel::certify(convolve_family(d1.function(), d2.function()), std::move(desc));
}

/// Kernels by CLI name: bump, square, plus, minus, mix (plus/minus), conv (bump*bump).
inline DiracKernel kernel_by_name(const std::string& name) {
  if (name == "bump") return bump_delta();
  if (name == "square") return square_delta();
  if (name == "plus") return shifted_delta(Shift::Plus);
  if (name == "minus") return shifted_delta(Shift::Minus);
  if (name == "mix") {
    static const DiracKernel k = mixture(shifted_delta(Shift::Plus), shifted_delta(Shift::Minus));
    return k;
  }
  if (name == "conv") {
    static const DiracKernel k = convolve(bump_delta(), bump_delta());
    return k;
  }
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

/// The bump kernel with its value at x0 replaced at every rank. It still
/// sifts every test function but is not a Dirac function.
inline VirtualFunction point_modified_delta(double x0 = 7.0, double value = 3.0) {
  return point_modified(bump_family(), x0, value);
}

class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// integral of d_n(x - a) f(x) dx reduced over the schedule, computed as
/// integral of d_n(t) f(t + a) dt so the kernel is sampled without the
/// rounding of x - a.
inline IntegralResult sift(const VirtualFunction& d, const RealFunction& f, double a,
                           const ProbeSchedule& schedule = default_schedule(),
                           const ReduceOptions& opt = {}) {
  if (!f.smoothness().at_least(0))
    throw HypothesisError(f.descriptor() + " is not continuous around " + detail::fmt_point(a));
  return reduce_integral(multiply(d, f.shifted(a)), schedule, opt);
}

inline IntegralResult sift(const DiracKernel& d, const RealFunction& f, double a,
                           const ProbeSchedule& schedule = default_schedule(),
                           const ReduceOptions& opt = {}) {
  return sift(d.function(), f, a, schedule, opt);
}

/// integral of d_n^(k)(x - a) f(x) dx; the limit is (-1)^k f^(k)(a). Ranks
/// and tolerances follow conditioned_schedule and conditioned_options.
inline IntegralResult sift_derivative(const DiracKernel& d, int k, const RealFunction& f, double a,
                                      const ProbeSchedule& schedule = default_schedule(),
                                      const ReduceOptions& opt = {}) {
  if (k < 0) throw std::invalid_argument("negative derivative order");
  if (!d.function().smoothness().at_least(k))
    throw HypothesisError("kernel " + d.name() + " is " + d.function().smoothness().to_string() +
                          ", not " + std::to_string(k) + " times differentiable");
  if (!f.smoothness().at_least(k))
    throw HypothesisError(f.descriptor() + " is " + f.smoothness().to_string() + ", not " +
                          std::to_string(k) + " times differentiable around " +
                          detail::fmt_point(a));
  return reduce_integral(multiply(derivative(d.function(), k), f.shifted(a)),
                         conditioned_schedule(schedule, k), conditioned_options(opt, k));
}

}  // namespace vdelta
