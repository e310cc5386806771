#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vdelta/vnum.hpp"

using namespace vdelta;

namespace {

VirtualNumber alternating() {
  return VirtualNumber::from_rule([](Rank n) { return n.value() % 2 ? -1.0 : 1.0; });
}

}  // namespace

TEST(Rank, RejectsZero) {
  EXPECT_THROW(Rank(0), std::invalid_argument);
  EXPECT_EQ(Rank(7).value(), 7u);
}

TEST(Schedule, DefaultIsPowersOfTwoFrom16) {
  const auto s = default_schedule();
  ASSERT_EQ(s.size(), 17u);
  EXPECT_EQ(s.front().value(), 16u);
  EXPECT_EQ(s.back().value(), 1u << 20);
  EXPECT_NO_THROW(validate_schedule(s, 4));
}

TEST(Schedule, RejectsNonIncreasing) {
  ProbeSchedule s{Rank(4), Rank(4), Rank(8)};
  EXPECT_THROW(validate_schedule(s), std::invalid_argument);
  EXPECT_THROW(validate_schedule({Rank(2)}, 2), std::invalid_argument);
  EXPECT_THROW(geometric_schedule(5, 3), std::invalid_argument);
}

TEST(Constant, ValueAtEveryRank) {
  EXPECT_EQ(make_const(0).value_at(Rank(17)), 0.0);
  EXPECT_EQ(make_const(2.5).value_at(Rank(1)), 2.5);
  EXPECT_EQ(classify(make_const(3)), NumberClass::FiniteAppreciable);
  EXPECT_EQ(classify(make_const(0)), NumberClass::Infinitesimal);
  EXPECT_EQ(make_const(2.5).constant_value(), 2.5);
}

TEST(Constant, RejectsNonFinite) {
  EXPECT_THROW(make_const(INFINITY), std::invalid_argument);
  EXPECT_THROW(make_const(NAN), std::invalid_argument);
}

TEST(OmegaPartial, Sequences) {
  EXPECT_EQ(omega().value_at(Rank(1000)), 1000.0);
  EXPECT_EQ(partial().value_at(Rank(4)), 0.25);
  EXPECT_EQ(omega().tag(), NumberTag::Omega);
  EXPECT_EQ(partial().tag(), NumberTag::Partial);
  for (std::uint64_t n = 1; n < 5000; n += 37)
    EXPECT_DOUBLE_EQ(mul(omega(), partial()).value_at(Rank(n)), 1.0) << n;
}

TEST(Arithmetic, Pointwise) {
  for (std::uint64_t n : {1u, 3u, 10u, 1024u}) {
    const Rank r(n);
    EXPECT_EQ(add(partial(), partial()).value_at(r), 2.0 / n);
    EXPECT_EQ(sub(omega(), omega()).value_at(r), 0.0);
  }
  EXPECT_EQ(div(make_const(1), add(make_const(1), omega())).value_at(Rank(3)), 0.25);
  EXPECT_EQ((3.0 * omega() + make_const(1)).value_at(Rank(5)), 16.0);
  EXPECT_EQ(pow(omega(), 3).value_at(Rank(4)), 64.0);
  EXPECT_EQ(abs(make_const(-2)).value_at(Rank(9)), 2.0);
}

TEST(Arithmetic, DivisionByZeroCarriesRank) {
  const auto zero_at_3 = VirtualNumber::from_rule([](Rank n) { return n.as_double() - 3.0; });
  const auto q = div(make_const(1), zero_at_3);
  EXPECT_EQ(q.value_at(Rank(4)), 1.0);
  try {
    q.value_at(Rank(3));
    FAIL() << "expected RankEvaluationError";
  } catch (const RankEvaluationError& e) {
    EXPECT_EQ(e.rank().value(), 3u);
  }
}

TEST(Classify, CanonicalNumbers) {
  EXPECT_EQ(classify(partial()), NumberClass::Infinitesimal);
  EXPECT_EQ(classify(omega()), NumberClass::Infinite);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_EQ(classify(pow(partial(), k)), NumberClass::Infinitesimal) << k;
    EXPECT_EQ(classify(pow(omega(), k)), NumberClass::Infinite) << k;
  }
}

TEST(Classify, AlternatingIsIndeterminate) {
  EXPECT_EQ(classify(alternating(), consecutive_schedule(1, 64)), NumberClass::Indeterminate);
}

TEST(Classify, SlowDecayAndConvergence) {
  const auto three_over_n = 3.0 * partial();
  EXPECT_EQ(classify(three_over_n), NumberClass::Infinitesimal);
  const auto inv_sqrt = VirtualNumber::from_rule([](Rank n) { return 1.0 / std::sqrt(n.as_double()); });
  EXPECT_EQ(classify(inv_sqrt), NumberClass::Infinitesimal);
  EXPECT_EQ(classify(make_const(2) + partial()), NumberClass::FiniteAppreciable);
  const auto sqrt_n = VirtualNumber::from_rule([](Rank n) { return std::sqrt(n.as_double()); });
  EXPECT_EQ(classify(sqrt_n), NumberClass::Infinite);
  const auto log_n = VirtualNumber::from_rule([](Rank n) { return std::log(n.as_double()); });
  EXPECT_NE(classify(log_n), NumberClass::FiniteAppreciable);
}

TEST(Classify, NonFiniteValueIsIndeterminate) {
  const auto bad = VirtualNumber::from_rule([](Rank n) { return n.value() == 64 ? NAN : 1.0; });
  EXPECT_EQ(classify(bad), NumberClass::Indeterminate);
}

TEST(Shadow, ConstantsExactly) {
  EXPECT_EQ(shadow(make_const(std::numbers::pi)), std::numbers::pi);
  EXPECT_EQ(shadow(make_const(-0.1)), -0.1);
}

TEST(Shadow, Limits) {
  const auto s0 = shadow(partial());
  ASSERT_TRUE(s0);
  EXPECT_NEAR(*s0, 0.0, 1e-9);
  const auto s1 = shadow(make_const(2) + 5.0 * partial());
  ASSERT_TRUE(s1);
  EXPECT_NEAR(*s1, 2.0, 2e-9);
  const auto s2 = shadow(div(omega(), omega() + make_const(1)));
  ASSERT_TRUE(s2);
  EXPECT_NEAR(*s2, 1.0, 1e-9);
}

TEST(Shadow, DivergentHasNone) {
  EXPECT_FALSE(shadow(make_const(1) + 6.0 * omega()));
  EXPECT_FALSE(shadow(omega()));
}

TEST(EventuallyCompare, PartialBelowTenth) {
  const auto v = eventually_compare(partial(), make_const(0.1), Relation::Less, consecutive_schedule(1, 64));
  EXPECT_EQ(v.verdict, Verdict::Holds);
  ASSERT_TRUE(v.cutoff);
  EXPECT_EQ(v.cutoff->value(), 11u);
}

TEST(EventuallyCompare, OmegaExceedsThousand) {
  EXPECT_EQ(eventually_compare(omega(), make_const(1e3), Relation::Greater).verdict, Verdict::Holds);
  EXPECT_EQ(eventually_compare(omega(), make_const(1e3), Relation::Less).verdict, Verdict::Fails);
}

TEST(EventuallyCompare, AlternatingSignUndetermined) {
  const auto v = mul(alternating(), partial());
  const auto r = eventually_compare(v, make_const(0), Relation::Greater, consecutive_schedule(1, 64));
  EXPECT_EQ(r.verdict, Verdict::Undetermined);
  EXPECT_FALSE(r.cutoff);
}

TEST(EventuallyCompare, Antisymmetric) {
  const auto sched = consecutive_schedule(1, 200);
  const auto a = partial();
  const auto b = make_const(0.02);
  const auto lt = eventually_compare(a, b, Relation::Less, sched);
  const auto gt = eventually_compare(b, a, Relation::Greater, sched);
  EXPECT_EQ(lt.verdict, Verdict::Holds);
  EXPECT_EQ(gt.verdict, Verdict::Holds);
  EXPECT_EQ(lt.cutoff, gt.cutoff);
}
