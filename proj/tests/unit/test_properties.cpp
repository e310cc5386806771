#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vdelta/battery.hpp"
#include "vdelta/deltacalc.hpp"
#include "vdelta/parser.hpp"

using namespace vdelta;

namespace {

const std::vector<std::string> kKernels{"bump", "square", "plus", "minus", "mix"};

RealFunction f_of(const char* text) { return to_real_function(parse_function(text)); }

VirtualBound at(double x) { return VirtualBound::constant(x); }

// Random expressions over the full grammar, seeded for reproducibility.
class ExprGen {
 public:
  explicit ExprGen(std::uint32_t seed) : rng_(seed) {}

  std::string smooth(int depth) {
    if (depth <= 0 || pick(4) == 0) return leaf();
    switch (pick(7)) {
      case 0: return smooth(depth - 1) + " + " + smooth(depth - 1);
      case 1: return smooth(depth - 1) + " - " + smooth(depth - 1);
      case 2: return "(" + smooth(depth - 1) + ")*" + smooth(depth - 1);
      case 3: return smooth(depth - 1) + "/(" + smooth(depth - 1) + ")";
      case 4: return "(" + smooth(depth - 1) + ")^" + leaf();
      case 5: return "-" + smooth(depth - 1);
      default: return fn() + "(" + smooth(depth - 1) + ")";
    }
  }

  std::string delta(int depth) {
    if (depth <= 0) return atom();
    switch (pick(6)) {
      case 0: return delta(depth - 1) + " + " + delta(depth - 1);
      case 1: return delta(depth - 1) + " - " + smooth(1);
      case 2: return number() + "*" + delta(depth - 1);
      case 3: return "(" + smooth(1) + ")*(" + delta(depth - 1) + ")";
      case 4: return "(" + delta(depth - 1) + ")/" + number();
      default: return atom();
    }
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string number() {
    static const char* const nums[] = {"0.5", "2", "3.25", "1e-3", "7", "0.1", "12", "2.5e2"};
    return nums[pick(8)];
  }

  std::string leaf() { return pick(2) ? "x" : number(); }

  std::string fn() {
    static const char* const fns[] = {"sin", "cos", "exp", "atan", "abs"};
    return fns[pick(5)];
  }

  std::string atom() {
    switch (pick(4)) {
      case 0: return "delta(x)";
      case 1: return "delta(x - " + number() + ")";
      case 2: return "ddelta(x + " + number() + ", " + std::to_string(pick(4)) + ")";
      default: return "delta(x*" + smooth(1) + " + " + number() + ")";
    }
  }

  std::mt19937 rng_;
};

}  // namespace

// ---------------------------------------------------------------- vnum

TEST(VnumProperty, ArithmeticExactPerRank) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = u(rng), q = u(rng);
    const auto a = add(make_const(p), mul(make_const(q), omega()));
    const auto b = add(make_const(q), mul(make_const(p), partial()));
    for (auto n : default_schedule()) {
      const double x = p + q * n.as_double(), y = q + p * (1.0 / n.as_double());
      EXPECT_EQ((a + b).value_at(n), x + y);
      EXPECT_EQ((a - b).value_at(n), x - y);
      EXPECT_EQ((a * b).value_at(n), x * y);
    }
  }
}

TEST(VnumProperty, PowersClassify) {
  for (int k = 1; k <= 3; ++k) {
    EXPECT_EQ(classify(pow(partial(), k)), NumberClass::Infinitesimal) << k;
    EXPECT_EQ(classify(pow(omega(), k)), NumberClass::Infinite) << k;
  }
}

TEST(VnumProperty, ShadowOfConstantIsExact) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 100; ++i) {
    const double r = u(rng);
    EXPECT_EQ(shadow(make_const(r)), r);
  }
}

TEST(VnumProperty, CompareAntisymmetry) {
  const std::vector<VirtualNumber> xs{omega(), partial(), make_const(3), make_const(-2) + partial(),
                                      pow(omega(), 2) - 50.0 * omega()};
  for (const auto& a : xs)
    for (const auto& b : xs) {
      const auto lt = eventually_compare(a, b, Relation::Less);
      if (lt.verdict != Verdict::Holds) continue;
      const auto gt = eventually_compare(b, a, Relation::Greater);
      EXPECT_EQ(gt.verdict, Verdict::Holds);
      EXPECT_EQ(gt.cutoff, lt.cutoff);
    }
}

// ---------------------------------------------------------------- vfun

TEST(VfunProperty, ConstructorKernelsPerRank) {
  for (const auto& name : kKernels) {
    const auto f = kernel_by_name(name).function();
    for (auto n : default_schedule()) {
      const double r = *f.support_radius(n);
      for (int i = 0; i <= 1000; ++i) EXPECT_GE(f(n, -r + 2 * r * i / 1000.0), 0.0);
      for (double x : {1.0001 * r, -1.0001 * r, 2 * r, -3 * r, r + 1, -r - 10}) EXPECT_EQ(f(n, x), 0.0);
      EXPECT_NEAR(integrate_rank(f, VirtualBound::neg_infinity(), VirtualBound::pos_infinity(), n), 1.0, 1e-8)
          << name << " " << n.value();
    }
    EXPECT_EQ(classify(kernel_by_name(name).certificate().support_radius), NumberClass::Infinitesimal);
  }
}

TEST(VfunProperty, EvalAtAndTranslateExact) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const auto& name : kKernels) {
    const auto f = kernel_by_name(name).function();
    for (int i = 0; i < 20; ++i) {
      const double x = u(rng) / 4, beta = 4 * u(rng);
      const auto t = translate(f, beta);
      for (auto n : geometric_schedule(2, 10)) {
        EXPECT_EQ(eval_at(f, make_const(x)).value_at(n), f(n, x));
        EXPECT_EQ(eval_at(t, make_const(x + beta)).value_at(n),
                  eval_at(f, make_const(x + beta) - make_const(beta)).value_at(n));
      }
    }
  }
}

TEST(VfunProperty, SecondDerivativeConsistent) {
  const auto f = bump_family();
  const auto dd = derivative(derivative(f));
  const auto d2 = derivative(f, 2);
  for (auto n : geometric_schedule(2, 8)) {
    const double r = *f.support_radius(n);
    for (int i = -99; i <= 99; ++i) {
      const double x = r * i / 100.0;
      EXPECT_NEAR(dd(n, x), d2(n, x), 1e-4 * std::max(1.0, std::abs(d2(n, x))));
    }
  }
}

// ---------------------------------------------------------------- vintegral

TEST(VintegralProperty, AdditivityOverSubintervals) {
  const auto cosine = f_of("cos(x)");
  for (const auto& name : kKernels) {
    const auto f = multiply(kernel_by_name(name).function(), cosine);
    for (auto n : geometric_schedule(2, 12)) {
      const double h = 1.0 / n.as_double();
      for (double b : {-0.7 * h, 0.0, 0.3 * h, 1.5 * h, 2.5}) {
        const double whole = integrate_rank(f, at(-3), at(3), n);
        const double split = integrate_rank(f, at(-3), at(b), n) + integrate_rank(f, at(b), at(3), n);
        EXPECT_NEAR(whole, split, 2e-10) << name << " " << n.value() << " " << b;
      }
    }
  }
}

TEST(VintegralProperty, TranslationInvariance) {
  const auto lo = VirtualBound::neg_infinity(), hi = VirtualBound::pos_infinity();
  for (const auto& name : kKernels) {
    const auto f = kernel_by_name(name).function();
    for (double b : {-3.5, -1.0, 0.25, 2.0, 7.0})
      for (auto n : default_schedule()) {
        if (1.0 / n.as_double() + std::abs(b) >= n.as_double()) continue;
        EXPECT_NEAR(integrate_rank(translate(f, b), lo, hi, n), integrate_rank(f, lo, hi, n), 1e-10)
            << name << " " << b << " " << n.value();
      }
  }
}

TEST(VintegralProperty, MeanValueBracketing) {
  const auto lo = VirtualBound::neg_infinity(), hi = VirtualBound::pos_infinity();
  for (const auto& name : kKernels) {
    const auto d = kernel_by_name(name).function();
    for (const auto& f : sifting_battery())
      for (auto n : geometric_schedule(2, 12)) {
        const double r = *d.support_radius(n);
        double fmin = INFINITY, fmax = -INFINITY;
        for (int i = 0; i <= 2000; ++i) {
          const double v = f(-r + 2 * r * i / 2000.0);
          fmin = std::min(fmin, v);
          fmax = std::max(fmax, v);
        }
        const double ratio = integrate_rank(multiply(d, f), lo, hi, n) / integrate_rank(d, lo, hi, n);
        const double slack = 1e-12 * std::max(1.0, std::abs(ratio));
        EXPECT_GE(ratio, fmin - slack) << name << " " << f.descriptor() << " " << n.value();
        EXPECT_LE(ratio, fmax + slack) << name << " " << f.descriptor() << " " << n.value();
      }
  }
}

// ---------------------------------------------------------------- roots

TEST(RootsProperty, NegationSymmetry) {
  for (const char* text : {"x^2 - 4", "sin(x)", "x^3 - x", "exp(x) - 3", "atan(x - 0.7)", "cos(3*x) + 0.5"}) {
    const auto g = f_of(text);
    const auto h = f_of(("-(" + std::string(text) + ")").c_str());
    const Window w{-10, 10};
    const auto a = find_simple_roots(g, w), b = find_simple_roots(h, w);
    ASSERT_EQ(a.roots.size(), b.roots.size()) << text;
    for (std::size_t i = 0; i < a.roots.size(); ++i) {
      EXPECT_EQ(a.roots[i].a, b.roots[i].a) << text;
      EXPECT_EQ(a.roots[i].g_prime, -b.roots[i].g_prime) << text;
      EXPECT_LE(std::abs(g(a.roots[i].a)), 1e-12 * a.scale) << text;
    }
  }
}

TEST(RootsProperty, CountStableUnderRefinement) {
  for (const char* text : {"x^2 - 4", "sin(x)", "x^3 - x", "cos(3*x) + 0.5", "x - 0.001"}) {
    const auto g = f_of(text);
    const Window w{-10, 10};
    const auto coarse = find_simple_roots(g, w, 4096);
    if (certify_hypotheses(g, coarse).verdict != HypothesisVerdict::Certified) continue;
    const auto fine = find_simple_roots(g, w, 8192);
    ASSERT_EQ(coarse.roots.size(), fine.roots.size()) << text;
    for (std::size_t i = 0; i < fine.roots.size(); ++i)
      EXPECT_NEAR(coarse.roots[i].a, fine.roots[i].a, 1e-13 * std::max(1.0, std::abs(fine.roots[i].a)));
  }
}

// ---------------------------------------------------------------- deltacalc

TEST(DeltacalcProperty, SymbolicMatchesNumeric) {
  struct Case {
    const char* g;
    Window w;
  };
  for (const Case& c : {Case{"x^2 - 4", {}}, Case{"3*x", {}}, Case{"sin(x)", {-1, 7}}, Case{"x^3 - x", {}}}) {
    const auto g = f_of(c.g);
    CompositionOptions opt;
    opt.window = c.w;
    const auto nf = rewrite_composition(g, opt);
    for (const char* kname : {"bump", "plus", "minus", "mix"}) {
      const auto comp = compose(kernel_by_name(kname).function(), g, opt);
      for (const auto& f : sifting_battery()) {
        const auto r = reduce_integral(multiply(comp, f));
        ASSERT_TRUE(r.reduced()) << c.g << " " << kname << " " << f.descriptor();
        EXPECT_NEAR(evaluate_normal_form(nf, f), r.value(), 1e-5) << c.g << " " << kname << " " << f.descriptor();
      }
    }
  }
}

TEST(DeltacalcProperty, NormalFormEqualityIsAnEquivalence) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> small(0, 2);
  std::vector<NormalForm> forms;
  for (int i = 0; i < 30; ++i) {
    NormalForm nf;
    const int terms = small(rng) + 1;
    for (int t = 0; t < terms; ++t) nf.terms.push_back({0.5 * small(rng) + 0.25, small(rng), 1.0 * small(rng), {}});
    forms.push_back(canonicalize(nf));
    std::shuffle(nf.terms.begin(), nf.terms.end(), rng);
    forms.push_back(canonicalize(nf));
  }
  for (std::size_t i = 0; i < forms.size(); i += 2) EXPECT_TRUE(same_normal_form(forms[i], forms[i + 1]));
  for (const auto& x : forms) {
    EXPECT_TRUE(same_normal_form(x, x));
    for (const auto& y : forms) {
      EXPECT_EQ(same_normal_form(x, y), same_normal_form(y, x));
      if (!same_normal_form(x, y)) continue;
      for (const auto& z : forms)
        if (same_normal_form(y, z)) {
          EXPECT_TRUE(same_normal_form(x, z));
        }
    }
  }
}

// ---------------------------------------------------------------- parser

TEST(ParserProperty, RoundTripCorpus) {
  ExprGen gen(20240917u);
  int delta_count = 0;
  for (int i = 0; i < 200; ++i) {
    const std::string text = i % 4 == 0 ? gen.smooth(4) : gen.delta(3);
    Parsed p;
    ASSERT_NO_THROW(p = parse_expression(text)) << text;
    const std::string once = render(p);
    Parsed q;
    ASSERT_NO_THROW(q = parse_expression(once)) << text << " -> " << once;
    EXPECT_TRUE(structurally_equal(p, q)) << text << " -> " << once;
    EXPECT_EQ(render(q), once) << text;
    delta_count += std::holds_alternative<DeltaExpr>(p);
  }
  EXPECT_GE(delta_count, 140);
}
