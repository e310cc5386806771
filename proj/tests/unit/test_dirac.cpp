#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vdelta/dirac.hpp"

using namespace vdelta;

namespace {

const DiracFailure& failure(const DiracCheck& c) { return std::get<DiracFailure>(c); }

}  // namespace

TEST(CheckDirac, ConstructorKernelsPass) {
  for (const char* name : {"bump", "square", "plus", "minus", "mix"}) {
    const auto k = kernel_by_name(name);
    const auto c = check_dirac(k.function());
    ASSERT_TRUE(passed(c)) << name;
    const auto& cert = std::get<DiracCertificate>(c);
    EXPECT_NEAR(cert.normalization.value, 1.0, 1e-8) << name;
    EXPECT_GE(cert.min_sampled_value, 0.0) << name;
    EXPECT_EQ(classify(cert.support_radius), NumberClass::Infinitesimal) << name;
  }
}

TEST(CheckDirac, ConvolutionPasses) {
  const auto& k = kernel_by_name("conv");
  EXPECT_EQ(k.name(), "conv");
  EXPECT_NEAR(k.certificate().normalization.value, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(k.certificate().support_radius.value_at(Rank(8)), 0.25);
}

TEST(CheckDirac, PsiFailsSupport) {
  const auto c = check_dirac(cauchy_psi());
  ASSERT_FALSE(passed(c));
  EXPECT_EQ(failure(c).condition(), DiracCondition::InfinitesimalSupport);
  // Its integral reduces to pi, so normalization fails too.
  EXPECT_TRUE(failure(c).violates(DiracCondition::Normalized));
  EXPECT_FALSE(failure(c).violates(DiracCondition::Nonnegative));
}

TEST(CheckDirac, PointModifiedFailsAtSeven) {
  const auto c = check_dirac(point_modified_delta());
  ASSERT_FALSE(passed(c));
  const auto& f = failure(c);
  EXPECT_EQ(f.condition(), DiracCondition::InfinitesimalSupport);
  EXPECT_NE(f.violations.front().detail.find("x = 7"), std::string::npos) << f.violations.front().detail;
  EXPECT_FALSE(f.violates(DiracCondition::Normalized));
}

TEST(CheckDirac, DerivativeFailsNonnegativity) {
  const auto c = check_dirac(derivative(bump_family()));
  ASSERT_FALSE(passed(c));
  EXPECT_EQ(failure(c).condition(), DiracCondition::Nonnegative);
  EXPECT_TRUE(failure(c).violates(DiracCondition::Normalized));
}

TEST(CheckDirac, ScaledKernelFailsNormalization) {
  const auto c = check_dirac(scale_value(bump_family(), 2.0));
  ASSERT_FALSE(passed(c));
  EXPECT_EQ(failure(c).condition(), DiracCondition::Normalized);
  EXPECT_EQ(failure(c).violations.size(), 1u);
}

TEST(CheckDirac, ConditionNames) {
  EXPECT_STREQ(to_string(DiracCondition::Nonnegative), "(i) nonnegativity");
  EXPECT_STREQ(to_string(DiracCondition::Normalized), "(ii) unit integral");
  EXPECT_STREQ(to_string(DiracCondition::InfinitesimalSupport), "(iii) infinitesimal support");
}

TEST(DiracKernel, CertifyRejects) {
  try {
    DiracKernel::certify(cauchy_psi(), {"psi", {}, Smoothness::infinite(), "none"});
    FAIL() << "expected NotDiracError";
  } catch (const NotDiracError& e) {
    EXPECT_EQ(e.failure().condition(), DiracCondition::InfinitesimalSupport);
  }
}

TEST(DiracKernel, Descriptors) {
  const auto& b = bump_delta();
  EXPECT_EQ(b.descriptor().name, "bump");
  EXPECT_EQ(b.descriptor().support_rule, "|x| < 1/n");
  EXPECT_TRUE(b.descriptor().smoothness.at_least(6));
  EXPECT_EQ(shifted_delta(Shift::Plus).descriptor().params.at("shift"), "2/n");
  const auto m = mixture(bump_delta(), square_delta());
  EXPECT_EQ(m.descriptor().params.at("second"), "square");
  EXPECT_FALSE(m.descriptor().smoothness.at_least(0));
  EXPECT_THROW(kernel_by_name("psi"), std::invalid_argument);
}

TEST(DiracKernel, MixtureOfEqualKernels) {
  const auto m = mixture(bump_delta(), bump_delta());
  for (double x : {-0.01, 0.0, 0.004}) EXPECT_DOUBLE_EQ(m(Rank(64), x), bump_delta()(Rank(64), x));
}

TEST(DiracKernel, ConvolveRejectsSquare) {
  EXPECT_THROW(convolve(square_delta(), bump_delta()), std::invalid_argument);
}

TEST(PointModified, StillSifts) {
  const auto d = point_modified_delta();
  const auto f = RealFunction::generic("exp(x)", Smoothness::infinite(), [](const auto& x) { using std::exp; return exp(x); });
  for (double a : {-1.0, 0.0, 3.0}) {
    const auto r = sift(d, f, a);
    ASSERT_TRUE(r.reduced());
    EXPECT_NEAR(r.value(), std::exp(a), 1e-6 * std::exp(a));
  }
}
