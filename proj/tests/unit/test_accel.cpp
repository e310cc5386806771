#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "vdelta/accel.hpp"
#include "vdelta/jet.hpp"
#include "vdelta/real_function.hpp"
#include "vdelta/vnum.hpp"

using namespace vdelta;

namespace {

struct Samples {
  std::vector<double> ranks, values;
};

template <class F>
Samples sample(F f, const ProbeSchedule& s = default_schedule()) {
  Samples out;
  for (auto n : s) {
    out.ranks.push_back(n.as_double());
    out.values.push_back(f(n.as_double()));
  }
  return out;
}

}  // namespace

TEST(Extrapolate, RecoversPolynomialTailLimits) {
  const auto s = sample([](double n) { return 2.0 + 3.0 / n - 7.0 / (n * n); });
  const auto est = extrapolate_limit(s.ranks, s.values, 1e-12);
  ASSERT_TRUE(est);
  EXPECT_NEAR(est->value, 2.0, 1e-13);
}

TEST(Extrapolate, LowRanksOnly) {
  const auto s = sample([](double n) { return std::numbers::e + 1.0 / n; }, geometric_schedule(1, 6));
  const auto est = extrapolate_limit(s.ranks, s.values, 1e-10);
  ASSERT_TRUE(est);
  EXPECT_NEAR(est->value, std::numbers::e, 1e-12);
}

TEST(Extrapolate, NoisyTailStillSettles) {
  // Rounding-sized noise at the top ranks.
  auto s = sample([](double n) { return 1.0 + 1.0 / n; });
  for (std::size_t i = 10; i < s.values.size(); ++i) s.values[i] += (i % 2 ? 1e-13 : -1e-13);
  const auto est = extrapolate_limit(s.ranks, s.values, 1e-9);
  ASSERT_TRUE(est);
  EXPECT_NEAR(est->value, 1.0, 1e-9);
}

TEST(Extrapolate, RejectsOscillation) {
  const auto s = sample([](double n) { return std::sin(n); }, consecutive_schedule(1, 20));
  EXPECT_FALSE(extrapolate_limit(s.ranks, s.values, 1e-9));
}

TEST(Extrapolate, RejectsNonFinite) {
  std::vector<double> r{1, 2, 3}, v{1, NAN, 1};
  EXPECT_FALSE(extrapolate_limit(r, v, 1e-9));
  std::vector<double> short_r{1, 2};
  EXPECT_THROW(extrapolate_limit(short_r, v, 1e-9), std::invalid_argument);
}

TEST(PowerLaw, Exponents) {
  for (double p : {0.5, 1.0, 2.0}) {
    const auto s = sample([p](double n) { return 4.0 * std::pow(n, p); });
    const auto fit = fit_power_law(s.ranks, s.values);
    ASSERT_TRUE(fit);
    EXPECT_NEAR(fit->exponent, p, 1e-12);
    EXPECT_NEAR(fit->log_coefficient, std::log(4.0), 1e-9);
    EXPECT_GT(fit->r_squared, 0.999999);
    EXPECT_EQ(fit->sign, 1);
  }
}

TEST(PowerLaw, NegativeSignAndAffineGrowth) {
  const auto s = sample([](double n) { return -(1.0 + 6.0 * n); });
  const auto fit = certify_growth(s.ranks, s.values);
  ASSERT_TRUE(fit);
  EXPECT_EQ(fit->sign, -1);
  EXPECT_NEAR(fit->exponent, 1.0, 1e-3);
}

TEST(PowerLaw, ConvergentSequencesAreNotGrowth) {
  EXPECT_FALSE(grows_without_bound(sample([](double n) { return 1.0 + 1.0 / n; }).ranks,
                                   sample([](double n) { return 1.0 + 1.0 / n; }).values));
  const auto flat = sample([](double) { return 5.0; });
  EXPECT_FALSE(grows_without_bound(flat.ranks, flat.values));
  auto mixed = sample([](double n) { return n; });
  for (std::size_t i = 0; i < mixed.values.size(); i += 3) mixed.values[i] = -mixed.values[i];
  EXPECT_FALSE(fit_power_law(mixed.ranks, mixed.values));
}

TEST(PowerLaw, RoundingNoiseIsNotGrowth) {
  const auto noise = sample([](double n) { return -5e-19 * n * n; });
  EXPECT_TRUE(fit_power_law(noise.ranks, noise.values));
  EXPECT_FALSE(grows_without_bound(noise.ranks, noise.values));
}

TEST(Jet, ArithmeticDerivatives) {
  using J = Jet<4>;
  const auto x = J::variable(0.7);
  const auto f = x * x * x;
  EXPECT_DOUBLE_EQ(f.derivative(0), 0.343);
  EXPECT_DOUBLE_EQ(f.derivative(1), 3 * 0.49);
  EXPECT_DOUBLE_EQ(f.derivative(2), 6 * 0.7);
  EXPECT_DOUBLE_EQ(f.derivative(3), 6.0);
  EXPECT_DOUBLE_EQ(f.derivative(4), 0.0);
  const auto q = 1.0 / (1.0 + x);
  EXPECT_NEAR(q.derivative(3), -6.0 / std::pow(1.7, 4), 1e-14);
}

TEST(Jet, ElementaryFunctions) {
  using J = Jet<6>;
  const double a = 0.3;
  const auto x = J::variable(a);
  const double sa = std::sin(a), ca = std::cos(a);
  const double sin_d[] = {sa, ca, -sa, -ca, sa, ca, -sa, -ca};
  const auto s = sin(x), c = cos(x), e = exp(x);
  for (std::size_t k = 0; k <= 6; ++k) {
    EXPECT_NEAR(s.derivative(k), sin_d[k], 1e-13) << k;
    EXPECT_NEAR(c.derivative(k), sin_d[k + 1], 1e-13) << k;
    EXPECT_NEAR(e.derivative(k), std::exp(a), 1e-13) << k;
  }
  EXPECT_NEAR(atan(x).derivative(1), 1.0 / (1.0 + a * a), 1e-15);
  EXPECT_NEAR(atan(x).derivative(2), -2 * a / std::pow(1 + a * a, 2), 1e-14);
  EXPECT_NEAR(log(x).derivative(3), 2.0 / (a * a * a), 1e-11);
  EXPECT_NEAR(sqrt(x).derivative(2), -0.25 * std::pow(a, -1.5), 1e-13);
  EXPECT_NEAR(pow(x, -2).derivative(1), -2.0 / (a * a * a), 1e-12);
}

TEST(RealFunction, ExactDerivativesAndShift) {
  const auto f = RealFunction::generic("x^2 sin x", Smoothness::infinite(),
                                       [](const auto& x) { using std::sin; return x * x * sin(x); });
  const double a = 1.1;
  EXPECT_NEAR(f.derivative(1, a), 2 * a * std::sin(a) + a * a * std::cos(a), 1e-14);
  const auto g = f.shifted(0.5);
  EXPECT_DOUBLE_EQ(g(a - 0.5), f(a));
  EXPECT_DOUBLE_EQ(g.derivative(2, a - 0.5), f.derivative(2, a));
  EXPECT_TRUE(g.smoothness().at_least(6));
}

TEST(RealFunction, SmoothnessGuards) {
  const auto k = RealFunction::generic("|x|", Smoothness::continuous(), [](const auto& x) {
    using std::abs;
    return abs(x);
  });
  EXPECT_THROW(k.derivative(1, 0.3), std::domain_error);
  EXPECT_EQ(RealFunction::constant(4).derivative(3, 9.0), 0.0);
  EXPECT_EQ(RealFunction::constant(4).constant_value(), 4.0);
  EXPECT_EQ(weakest(Smoothness::c(2), Smoothness::infinite()), Smoothness::c(2));
  EXPECT_EQ(differentiated(Smoothness::c(2)), Smoothness::c(1));
}

TEST(RealFunction, KnownRulesCheckedAgainstDifferences) {
  const auto f = RealFunction::from_rules("cosh", Smoothness::infinite(),
                                          [](double x) { return std::cosh(x); },
                                          {[](double x) { return std::sinh(x); }});
  EXPECT_TRUE(verify_known_derivatives(f, {-1.0, 0.0, 0.5, 2.0}, 1e-6));
  const auto wrong = RealFunction::from_rules("cosh", Smoothness::infinite(),
                                              [](double x) { return std::cosh(x); },
                                              {[](double x) { return std::cosh(x); }});
  EXPECT_FALSE(verify_known_derivatives(wrong, {-1.0, 0.5}, 1e-6));
}
