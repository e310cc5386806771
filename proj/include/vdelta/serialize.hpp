#pragma once

// JSON records for engine results and CSV traces for plotting.

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vdelta/deltacalc.hpp"
#include "vdelta/dirac.hpp"
#include "vdelta/parser.hpp"
#include "vdelta/roots.hpp"
#include "vdelta/vintegral.hpp"

namespace vdelta {

using nlohmann::json;

inline json to_json(const IntegralResult& r) {
  json j;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Reduced>) {
          j["variant"] = "reduced";
          j["value"] = o.value;
          j["error"] = o.error;
        } else if constexpr (std::is_same_v<T, Irreducible>) {
          j["variant"] = "irreducible";
          j["exponent"] = o.exponent;
          j["sign"] = o.sign;
        } else {
          j["variant"] = "undetermined";
          j["reason"] = o.reason;
        }
      },
      r.outcome);
  json rv = json::array();
  for (const auto& [n, v] : r.rank_values) rv.push_back({n, v});
  j["rank_values"] = std::move(rv);
  return j;
}

inline json to_json(const Strength& s) {
  if (s.is_strong()) return {{"kind", "strong"}};
  return {{"kind", "order"}, {"n", s.order}};
}

inline json to_json(const NormalForm& nf) {
  json terms = json::array();
  for (const auto& t : nf.terms) {
    json jt{{"c", t.c}, {"k", t.k}, {"a", t.a}};
    if (t.kernel) jt["kernel"] = t.kernel->name();
    terms.push_back(std::move(jt));
  }
  json j{{"terms", std::move(terms)}, {"strength", to_json(nf.strength)}};
  switch (nf.residual.kind) {
    case ResidualKind::None: j["residual"] = "none"; break;
    case ResidualKind::Zero: j["residual"] = "zero"; break;
    case ResidualKind::NotReducible:
      j["residual"] = "not-reducible";
      j["reason"] = nf.residual.reason;
      break;
  }
  j["text"] = render_human(nf);
  return j;
}

inline json to_json(const RootRecord& r) {
  return {{"a", r.a}, {"g_prime", r.g_prime}, {"bracket", {r.bracket.lo, r.bracket.hi}}};
}

inline json to_json(const HypothesisCertificate& c) {
  json roots = json::array();
  for (const auto& r : c.roots) roots.push_back(to_json(r));
  json j{{"verdict", to_string(c.verdict)},
         {"roots", std::move(roots)},
         {"r", c.r},
         {"scan_window", {c.scan_window.lo, c.scan_window.hi}}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

inline json to_json(const KernelDescriptor& d) {
  json params = json::object();
  for (const auto& [k, v] : d.params) params[k] = v;
  return {{"name", d.name},
          {"params", std::move(params)},
          {"smoothness", d.smoothness.to_string()},
          {"support_rule", d.support_rule}};
}

inline json to_json(const DiracCheck& check) {
  if (const auto* c = std::get_if<DiracCertificate>(&check)) {
    json radius = json::array();
    for (auto n : c->schedule) radius.push_back({n.value(), c->support_radius.value_at(n)});
    return {{"verdict", "dirac"},
            {"min_sampled_value", c->min_sampled_value},
            {"normalization", {{"value", c->normalization.value}, {"error", c->normalization.error}}},
            {"support_radius", std::move(radius)}};
  }
  const auto& f = std::get<DiracFailure>(check);
  json violations = json::array();
  for (const auto& v : f.violations)
    violations.push_back({{"condition", static_cast<int>(v.condition)},
                          {"name", to_string(v.condition)},
                          {"detail", v.detail}});
  return {{"verdict", "not-dirac"},
          {"condition", static_cast<int>(f.condition())},
          {"violations", std::move(violations)}};
}

inline json to_json(const EquivalenceVerdict& v) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Distinct>)
          return {{"verdict", "distinct"}, {"witness", o.witness}, {"lhs", o.lhs}, {"rhs", o.rhs}};
        else if constexpr (std::is_same_v<T, ConsistentEquivalent>)
          return {{"verdict", "consistent-equivalent"},
                  {"battery_size", o.battery_size},
                  {"max_deviation", o.max_deviation}};
        else
          return {{"verdict", "irreducible-side"},
                  {"side", o.side},
                  {"witness", o.witness},
                  {"lhs", to_json(o.lhs)},
                  {"rhs", to_json(o.rhs)}};
      },
      v);
}

inline json to_json(const KernelDependenceReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"kernel", e.kernel}, {"outcome", to_string(e.outcome)}, {"result", to_json(e.result)}});
  return {{"g", r.g}, {"flagged", r.flagged}, {"reason", r.reason}, {"entries", std::move(entries)}};
}

namespace csv_detail {

inline std::string number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace csv_detail

/// "n,I_n" header followed by one record per rank.
inline void write_rank_csv(std::ostream& os, const std::vector<std::pair<std::uint64_t, double>>& values) {
  os << "n,I_n\n";
  for (const auto& [n, v] : values) os << n << ',' << csv_detail::number(v) << '\n';
}

/// "x,value" header followed by one record per sample.
inline void write_sample_csv(std::ostream& os, const std::vector<std::pair<double, double>>& samples) {
  os << "x,value\n";
  for (const auto& [x, v] : samples) os << csv_detail::number(x) << ',' << csv_detail::number(v) << '\n';
}

}  // namespace vdelta
