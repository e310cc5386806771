#pragma once

// Test-function batteries for sifting and equivalence checks.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdelta/real_function.hpp"

namespace vdelta {

namespace battery_detail {

template <class F>
RealFunction smooth(std::string name, F f) {
  return RealFunction::generic(std::move(name), Smoothness::infinite(), f);
}

// |x| (1 + sin(3x)/2): continuous with a kink at 0.
inline RealFunction modulated_abs() {
  return RealFunction::generic("abs(x)*(1 + 0.5*sin(3*x))", Smoothness::continuous(),
                               [](const auto& x) {
                                 using std::abs, std::sin;
                                 return abs(x) * (1.0 + 0.5 * sin(3.0 * x));
                               });
}

}  // namespace battery_detail

/// Twenty functions: polynomials up to degree 4, sines and cosines at three
/// frequencies, exp(+-x), a C0 kinked function, Runge-type rationals and a
/// few other shapes.
inline std::vector<RealFunction> standard_battery() {
  using battery_detail::smooth;
  using std::atan, std::cos, std::exp, std::sin;
  return {
      RealFunction::constant(1.0),
      smooth("x", [](const auto& x) { return x; }),
      smooth("x^2", [](const auto& x) { return x * x; }),
      smooth("x^3", [](const auto& x) { return x * x * x; }),
      smooth("x^4", [](const auto& x) { return x * x * x * x; }),
      smooth("sin(x)", [](const auto& x) { return sin(x); }),
      smooth("cos(x)", [](const auto& x) { return cos(x); }),
      smooth("sin(2*x)", [](const auto& x) { return sin(2.0 * x); }),
      smooth("cos(2*x)", [](const auto& x) { return cos(2.0 * x); }),
      smooth("sin(5*x)", [](const auto& x) { return sin(5.0 * x); }),
      smooth("cos(5*x)", [](const auto& x) { return cos(5.0 * x); }),
      smooth("exp(x)", [](const auto& x) { return exp(x); }),
      smooth("exp(-x)", [](const auto& x) { return exp(-x); }),
      battery_detail::modulated_abs(),
      smooth("1/(1 + 25*x^2)", [](const auto& x) { return 1.0 / (1.0 + 25.0 * x * x); }),
      smooth("1/(1 + x^2)", [](const auto& x) { return 1.0 / (1.0 + x * x); }),
      smooth("exp(-x^2)", [](const auto& x) { return exp(-(x * x)); }),
      smooth("atan(2*x)", [](const auto& x) { return atan(2.0 * x); }),
      smooth("x*cos(x)", [](const auto& x) { return x * cos(x); }),
      smooth("1/(2 + sin(x))", [](const auto& x) { return 1.0 / (2.0 + sin(x)); }),
  };
}

/// Ten functions used for sifting sweeps.
inline std::vector<RealFunction> sifting_battery() {
  using battery_detail::smooth;
  using std::cos, std::exp, std::sin;
  return {
      RealFunction::constant(1.0),
      smooth("x", [](const auto& x) { return x; }),
      smooth("x^3 - 2*x", [](const auto& x) { return x * x * x - 2.0 * x; }),
      smooth("x^4", [](const auto& x) { return x * x * x * x; }),
      smooth("sin(x)", [](const auto& x) { return sin(x); }),
      smooth("cos(3*x)", [](const auto& x) { return cos(3.0 * x); }),
      smooth("exp(x)", [](const auto& x) { return exp(x); }),
      smooth("exp(-x)", [](const auto& x) { return exp(-x); }),
      smooth("1/(1 + 25*x^2)", [](const auto& x) { return 1.0 / (1.0 + 25.0 * x * x); }),
      battery_detail::modulated_abs(),
  };
}

/// Members that are at least C^k.
inline std::vector<RealFunction> restrict_smoothness(const std::vector<RealFunction>& battery, int k) {
  std::vector<RealFunction> out;
  std::copy_if(battery.begin(), battery.end(), std::back_inserter(out),
               [k](const RealFunction& f) { return f.smoothness().at_least(k); });
  return out;
}

/// Battery presets by name: standard, sifting, c1, c2.
inline std::vector<RealFunction> battery_by_name(const std::string& name) {
  if (name == "standard") return standard_battery();
  if (name == "sifting") return sifting_battery();
  if (name == "c1") return restrict_smoothness(standard_battery(), 1);
  if (name == "c2") return restrict_smoothness(standard_battery(), 2);
  throw std::invalid_argument("unknown battery '" + name + "'");
}

}  // namespace vdelta
