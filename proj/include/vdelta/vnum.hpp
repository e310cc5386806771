#pragma once

// Virtual numbers: rank-indexed real sequences standing in for elements of
// the extended real line. Every relation on them is decided by probing the
// sequence on a finite, strictly increasing schedule of ranks.

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdelta/accel.hpp"

namespace vdelta {

/// Index of an element of a representative sequence; always >= 1.
class Rank {
 public:
  constexpr explicit Rank(std::uint64_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("rank must be >= 1");
  }

  constexpr std::uint64_t value() const noexcept { return n_; }
  constexpr double as_double() const noexcept { return static_cast<double>(n_); }

  constexpr auto operator<=>(const Rank&) const = default;

 private:
  std::uint64_t n_;
};

using ProbeSchedule = std::vector<Rank>;

inline void validate_schedule(const ProbeSchedule& schedule, std::size_t min_size = 1) {
  if (schedule.size() < min_size)
    throw std::invalid_argument("probe schedule needs at least " + std::to_string(min_size) +
                                " ranks");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i - 1] < schedule[i]))
      throw std::invalid_argument("probe schedule must be strictly increasing");
}

/// Ranks 2^min_exp ... 2^max_exp.
inline ProbeSchedule geometric_schedule(int min_exp, int max_exp) {
  if (min_exp < 0 || max_exp > 62 || min_exp > max_exp)
    throw std::invalid_argument("geometric schedule exponents out of range");
  ProbeSchedule s;
  for (int k = min_exp; k <= max_exp; ++k) s.emplace_back(std::uint64_t{1} << k);
  return s;
}

inline ProbeSchedule default_schedule() { return geometric_schedule(4, 20); }

inline ProbeSchedule consecutive_schedule(std::uint64_t first, std::uint64_t last) {
  if (first == 0 || first > last) throw std::invalid_argument("bad consecutive schedule");
  ProbeSchedule s;
  for (auto n = first; n <= last; ++n) s.emplace_back(n);
  return s;
}

inline std::vector<double> schedule_values(const ProbeSchedule& schedule) {
  std::vector<double> out;
  out.reserve(schedule.size());
  for (auto r : schedule) out.push_back(r.as_double());
  return out;
}

/// Raised when a sequence has no finite real value at some rank.
class RankEvaluationError : public std::runtime_error {
 public:
  RankEvaluationError(Rank rank, const std::string& what)
      : std::runtime_error(what + " at rank " + std::to_string(rank.value())), rank_(rank) {}

  Rank rank() const noexcept { return rank_; }

 private:
  Rank rank_;
};

enum class NumberTag { Const, Omega, Partial, Composite };

class VirtualNumber {
 public:
  using Rule = std::function<double(Rank)>;

  static VirtualNumber constant(double r) {
    if (!std::isfinite(r)) throw std::invalid_argument("constant must be finite");
    return VirtualNumber([r](Rank) { return r; }, NumberTag::Const, r);
  }

  /// The canonical infinite number, represented by (1, 2, 3, ...).
  static VirtualNumber omega() {
    return VirtualNumber([](Rank n) { return n.as_double(); }, NumberTag::Omega, 0.0);
  }

  /// The canonical infinitesimal 1/omega.
  static VirtualNumber partial() {
    return VirtualNumber([](Rank n) { return 1.0 / n.as_double(); }, NumberTag::Partial, 0.0);
  }

  static VirtualNumber from_rule(Rule rule) {
    return VirtualNumber(std::move(rule), NumberTag::Composite, 0.0);
  }

  double value_at(Rank n) const {
    const double v = (*rule_)(n);
    if (!std::isfinite(v)) throw RankEvaluationError(n, "non-finite sequence value");
    return v;
  }

  std::vector<double> sample(const ProbeSchedule& schedule) const {
    std::vector<double> out;
    out.reserve(schedule.size());
    for (auto n : schedule) out.push_back(value_at(n));
    return out;
  }

  NumberTag tag() const noexcept { return tag_; }

  std::optional<double> constant_value() const {
    if (tag_ == NumberTag::Const) return const_;
    return std::nullopt;
  }

 private:
  VirtualNumber(Rule rule, NumberTag tag, double c)
      : rule_(std::make_shared<const Rule>(std::move(rule))), tag_(tag), const_(c) {}

  std::shared_ptr<const Rule> rule_;
  NumberTag tag_;
  double const_;
};

inline VirtualNumber make_const(double r) { return VirtualNumber::constant(r); }
inline VirtualNumber omega() { return VirtualNumber::omega(); }
inline VirtualNumber partial() { return VirtualNumber::partial(); }

namespace detail {

template <class Op>
VirtualNumber pointwise(const VirtualNumber& a, const VirtualNumber& b, Op op) {
  if (auto ca = a.constant_value(), cb = b.constant_value(); ca && cb) {
    const double r = op(*ca, *cb);
    if (std::isfinite(r)) return VirtualNumber::constant(r);
  }
  return VirtualNumber::from_rule([a, b, op](Rank n) { return op(a.value_at(n), b.value_at(n)); });
}

}  // namespace detail

inline VirtualNumber add(const VirtualNumber& a, const VirtualNumber& b) {
  return detail::pointwise(a, b, std::plus<>{});
}
inline VirtualNumber sub(const VirtualNumber& a, const VirtualNumber& b) {
  return detail::pointwise(a, b, std::minus<>{});
}
inline VirtualNumber mul(const VirtualNumber& a, const VirtualNumber& b) {
  return detail::pointwise(a, b, std::multiplies<>{});
}

/// Pointwise quotient; a zero divisor at some rank raises RankEvaluationError
/// for that rank when it is evaluated.
inline VirtualNumber div(const VirtualNumber& a, const VirtualNumber& b) {
  if (auto cb = b.constant_value(); cb && *cb == 0.0)
    throw std::invalid_argument("division by the constant zero");
  return VirtualNumber::from_rule([a, b](Rank n) {
    const double d = b.value_at(n);
    if (d == 0.0) throw RankEvaluationError(n, "division by zero");
    return a.value_at(n) / d;
  });
}

inline VirtualNumber operator+(const VirtualNumber& a, const VirtualNumber& b) { return add(a, b); }
inline VirtualNumber operator-(const VirtualNumber& a, const VirtualNumber& b) { return sub(a, b); }
inline VirtualNumber operator*(const VirtualNumber& a, const VirtualNumber& b) { return mul(a, b); }
inline VirtualNumber operator/(const VirtualNumber& a, const VirtualNumber& b) { return div(a, b); }
inline VirtualNumber operator*(double c, const VirtualNumber& b) { return mul(make_const(c), b); }

inline VirtualNumber pow(const VirtualNumber& a, int k) {
  return VirtualNumber::from_rule([a, k](Rank n) { return std::pow(a.value_at(n), k); });
}

inline VirtualNumber abs(const VirtualNumber& a) {
  return VirtualNumber::from_rule([a](Rank n) { return std::abs(a.value_at(n)); });
}

enum class NumberClass { Infinitesimal, FiniteAppreciable, Infinite, Indeterminate };

inline const char* to_string(NumberClass c) {
  switch (c) {
    case NumberClass::Infinitesimal: return "infinitesimal";
    case NumberClass::FiniteAppreciable: return "finite";
    case NumberClass::Infinite: return "infinite";
    case NumberClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct ClassifyOptions {
  double tol_small = 1e-6;
  /// Minimum local power-law exponent between consecutive probes for growth
  /// to count as unbounded.
  double growth_floor = 0.25;
  std::size_t trend_probes = 4;
  double limit_tol = 1e-9;
};

/// Standard part of a convergent sequence, or nullopt when the accelerated
/// estimates do not settle within tol (relative, absolute near zero).
inline std::optional<double> shadow(const VirtualNumber& v,
                                    const ProbeSchedule& schedule = default_schedule(),
                                    double tol = 1e-9) {
  if (auto c = v.constant_value()) return *c;
  validate_schedule(schedule, 2);
  std::vector<double> values;
  try {
    values = v.sample(schedule);
  } catch (const RankEvaluationError&) {
    return std::nullopt;
  }
  const auto ranks = schedule_values(schedule);
  if (grows_without_bound(ranks, values)) return std::nullopt;
  if (auto est = extrapolate_limit(ranks, values, tol)) return est->value;
  return std::nullopt;
}

inline NumberClass classify(const VirtualNumber& v,
                            const ProbeSchedule& schedule = default_schedule(),
                            const ClassifyOptions& opt = {}) {
  validate_schedule(schedule, std::max<std::size_t>(4, opt.trend_probes));
  std::vector<double> values;
  try {
    values = v.sample(schedule);
  } catch (const RankEvaluationError&) {
    return NumberClass::Indeterminate;
  }
  const auto ranks = schedule_values(schedule);
  const std::size_t m = values.size();
  const std::size_t first = m - opt.trend_probes;

  // Infinitesimal: a monotone tail that is already tiny, decays like a
  // power law, or extrapolates to zero.
  bool monotone = true;
  bool power_decay = true;
  for (std::size_t i = first + 1; monotone && i < m; ++i) {
    const double lo = std::abs(values[i]);
    const double hi = std::abs(values[i - 1]);
    monotone = lo <= hi;
    power_decay = power_decay && lo > 0.0 &&
                  std::log(lo / hi) / std::log(ranks[i] / ranks[i - 1]) <= -opt.growth_floor;
  }
  if (monotone) {
    if (std::abs(values.back()) < opt.tol_small || power_decay) return NumberClass::Infinitesimal;
    if (auto est = extrapolate_limit(ranks, values, opt.limit_tol);
        est && std::abs(est->value) <= opt.tol_small)
      return NumberClass::Infinitesimal;
  }

  bool growing = true;
  for (std::size_t i = first + 1; growing && i < m; ++i) {
    const double lo = std::abs(values[i - 1]);
    const double hi = std::abs(values[i]);
    growing = lo > 0.0 && std::log(hi / lo) / std::log(ranks[i] / ranks[i - 1]) >= opt.growth_floor;
  }
  if (growing) return NumberClass::Infinite;

  if (auto est = extrapolate_limit(ranks, values, opt.limit_tol);
      est && std::abs(est->value) > opt.tol_small)
    return NumberClass::FiniteAppreciable;
  return NumberClass::Indeterminate;
}

enum class Relation { Less, LessEqual, Equal, GreaterEqual, Greater };

enum class Verdict { Holds, Fails, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

struct OrderVerdict {
  Verdict verdict = Verdict::Undetermined;
  /// First rank of the stable tail (absent when Undetermined).
  std::optional<Rank> cutoff;
};

inline bool relation_holds(double a, double b, Relation rel) {
  switch (rel) {
    case Relation::Less: return a < b;
    case Relation::LessEqual: return a <= b;
    case Relation::Equal: return a == b;
    case Relation::GreaterEqual: return a >= b;
    case Relation::Greater: return a > b;
  }
  return false;
}

/// Decides `a rel b` eventually: Holds when the relation is true on a tail of
/// the schedule at least `min_tail` probes long, Fails when its negation is.
inline OrderVerdict eventually_compare(const VirtualNumber& a, const VirtualNumber& b, Relation rel,
                                       const ProbeSchedule& schedule = default_schedule(),
                                       std::size_t min_tail = 4) {
  validate_schedule(schedule, min_tail);
  std::vector<bool> holds;
  holds.reserve(schedule.size());
  try {
    for (auto n : schedule) holds.push_back(relation_holds(a.value_at(n), b.value_at(n), rel));
  } catch (const RankEvaluationError&) {
    return {};
  }
  auto tail_start = [&](bool want) {
    std::size_t c = holds.size();
    while (c > 0 && holds[c - 1] == want) --c;
    return c;
  };
  if (auto c = tail_start(true); holds.size() - c >= min_tail)
    return {Verdict::Holds, schedule[c]};
  if (auto c = tail_start(false); holds.size() - c >= min_tail)
    return {Verdict::Fails, schedule[c]};
  return {};
}

}  // namespace vdelta
