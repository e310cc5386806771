#pragma once

// Command-line front end. run_cli() parses arguments, dispatches one verb and
// writes results to the given streams; the vdelta binary is a thin wrapper.
//
//   vdelta simplify EXPR
//   vdelta integrate EXPR
//   vdelta equiv LHS RHS
//   vdelta check-dirac TARGET
//   vdelta probe-kernels G
//   vdelta trace EXPR
//
// Exit status: 0 on success, 1 when the engine rejects the input, 2 on parse,
// flag or config errors.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vdelta/battery.hpp"
#include "vdelta/deltacalc.hpp"
#include "vdelta/dirac.hpp"
#include "vdelta/parser.hpp"
#include "vdelta/quadrature.hpp"
#include "vdelta/serialize.hpp"
#include "vdelta/vintegral.hpp"

namespace vdelta {

namespace cli {

enum ExitCode : int { kOk = 0, kRejected = 1, kUsage = 2 };

/// Flag or config problem; maps to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Settings shared by all verbs. Unset optionals fall back to per-verb defaults.
struct Config {
  std::optional<double> tolerance;
  int probe_min_exp = 4;
  int probe_max_exp = 20;
  std::string battery = "standard";
  Window scan_window{};
  std::size_t grid_size = 4096;

  ProbeSchedule schedule() const {
    if (probe_min_exp < 1 || probe_max_exp > 40 || probe_min_exp >= probe_max_exp)
      throw ConfigError("probe exponents must satisfy 1 <= min < max <= 40");
    return geometric_schedule(probe_min_exp, probe_max_exp);
  }

  CompositionOptions composition() const {
    if (!(scan_window.lo < scan_window.hi) || !std::isfinite(scan_window.lo) || !std::isfinite(scan_window.hi))
      throw ConfigError("scan window must be a finite interval with lo < hi");
    if (grid_size < 16) throw ConfigError("grid size must be at least 16");
    return {scan_window, grid_size};
  }
};

inline Window parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("window must be given as LO,HI");
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    Window w{std::stod(a, &used), 0.0};
    if (used != a.size()) throw ConfigError("bad window bound '" + a + "'");
    w.hi = std::stod(b, &used);
    if (used != b.size()) throw ConfigError("bad window bound '" + b + "'");
    return w;
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("window must be given as LO,HI");
  }
}

/// Reads the JSON config file. Unknown keys are errors.
inline void load_config(const std::string& path, Config& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "tolerance") cfg.tolerance = v.get<double>();
      else if (key == "probe_min_exp") cfg.probe_min_exp = v.get<int>();
      else if (key == "probe_max_exp") cfg.probe_max_exp = v.get<int>();
      else if (key == "battery") cfg.battery = v.get<std::string>();
      else if (key == "scan_window") {
        const auto w = v.get<std::vector<double>>();
        if (w.size() != 2) throw ConfigError("scan_window must be [lo, hi]");
        cfg.scan_window = {w[0], w[1]};
      } else if (key == "grid_size") cfg.grid_size = v.get<std::size_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

inline DiracKernel kernel_flag(const std::string& name) {
  try {
    return kernel_by_name(name);
  } catch (const NotDiracError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline std::vector<RealFunction> battery_flag(const std::string& name) {
  try {
    return battery_by_name(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline std::string describe(const IntegralResult& r) {
  if (const auto* v = std::get_if<Reduced>(&r.outcome))
    return "reduced: " + format_number(v->value) + " (error " + format_number(v->error) + ")";
  if (const auto* v = std::get_if<Irreducible>(&r.outcome))
    return "irreducible: grows like n^" + format_number(v->exponent) +
           (v->sign < 0 ? " toward -infinity" : " toward +infinity");
  return "undetermined: " + std::get<Undetermined>(r.outcome).reason;
}

inline std::string describe(const EquivalenceVerdict& v) {
  if (const auto* d = std::get_if<Distinct>(&v))
    return "distinct: against " + d->witness + " the sides give " + format_number(d->lhs) + " and " +
           format_number(d->rhs);
  if (const auto* c = std::get_if<ConsistentEquivalent>(&v))
    return "consistent-equivalent over " + std::to_string(c->battery_size) +
           " test functions (max deviation " + format_number(c->max_deviation) + ")";
  const auto& s = std::get<IrreducibleSide>(v);
  return "irreducible-side: " + s.side + " does not reduce against " + s.witness + " (lhs " +
         describe(s.lhs) + "; rhs " + describe(s.rhs) + ")";
}

inline std::string describe(const DiracCheck& c) {
  if (const auto* cert = std::get_if<DiracCertificate>(&c)) {
    std::string s = "Dirac function: normalization " + format_number(cert->normalization.value) +
                    ", min sampled value " + format_number(cert->min_sampled_value);
    if (!cert->schedule.empty())
      s += ", support radius " + format_number(cert->support_radius.value_at(cert->schedule.back())) +
           " at rank " + std::to_string(cert->schedule.back().value());
    return s;
  }
  const auto& f = std::get<DiracFailure>(c);
  std::string s = "not a Dirac function: fails " + std::string(to_string(f.condition()));
  for (const auto& v : f.violations) s += "\n  " + std::string(to_string(v.condition)) + ": " + v.detail;
  return s;
}

/// Function checked by check-dirac: a kernel name, psi, or point-modified.
inline VirtualFunction dirac_target(const std::string& name) {
  if (name == "psi") return cauchy_psi();
  if (name == "point-modified") return point_modified_delta();
  if (name == "bump") return bump_family();
  if (name == "square") return square_family();
  if (name == "plus") return shifted_family(Shift::Plus);
  if (name == "minus") return shifted_family(Shift::Minus);
  return kernel_flag(name).function();
}

/// Values of the realized expression at rank n, in x coordinates.
inline double realization_value(const Realization& r, Rank n, double x) {
  double s = 0.0;
  for (const auto& p : r.pieces) s += p.phi(n, x - p.shift);
  return s;
}

inline std::pair<double, double> realization_span(const Realization& r, Rank n, const Window& fallback) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : r.pieces) {
    const auto supp = p.phi.support(n);
    if (!supp) return {fallback.lo, fallback.hi};
    for (const auto& iv : *supp) {
      lo = std::min(lo, iv.lo + p.shift);
      hi = std::max(hi, iv.hi + p.shift);
    }
  }
  if (!(lo < hi)) return {fallback.lo, fallback.hi};
  const double pad = 0.25 * (hi - lo);
  return {lo - pad, hi + pad};
}

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

inline void emit_json(std::ostream& os, const nlohmann::json& j) { os << j.dump() << '\n'; }

inline int report_error(const Streams& io, bool json, int code, const std::string& kind,
                        const std::string& message, nlohmann::json extra = nlohmann::json::object()) {
  if (json) {
    extra["error"] = kind;
    extra["message"] = message;
    extra["exit"] = code;
    emit_json(io.err, extra);
  } else {
    io.err << "vdelta: " << kind << ": " << message << '\n';
  }
  return code;
}

}  // namespace cli

/// Runs one invocation. argv[0] is the program name.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli;
  using nlohmann::json;
  const Streams io{out, err};

  CLI::App app{"Delta calculus on rank-indexed virtual functions", "vdelta"};
  app.require_subcommand(1, 1);

  bool as_json = false;
  std::string config_path, kernel_name = "bump", window_text, battery_name, trace_out, ranks_text;
  std::optional<double> tol;
  std::optional<std::size_t> grid;
  std::optional<int> min_exp, max_exp, order;
  app.add_flag("--json", as_json, "Machine-readable output");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--kernel", kernel_name, "Kernel for unbound delta terms")
      ->check(CLI::IsMember({"bump", "square", "plus", "minus", "mix", "conv"}));
  app.add_option("--tol", tol, "Tolerance");
  app.add_option("--window", window_text, "Root scan window LO,HI");
  app.add_option("--grid", grid, "Root scan grid size");
  app.add_option("--probe-min-exp", min_exp, "Smallest rank exponent (rank 2^e)");
  app.add_option("--probe-max-exp", max_exp, "Largest rank exponent");
  app.add_option("--battery", battery_name, "Test battery: standard, sifting, c1, c2");
  app.add_option("--order", order, "Derivative order");
  app.add_option("--trace-out", trace_out, "Write the rank or sample trace as CSV");
  app.add_option("--ranks", ranks_text, "Comma-separated ranks for trace");

  std::string expr1, expr2, kernels_text = "bump,square,plus,minus,mix";
  std::size_t points = 0;
  auto* simplify_cmd = app.add_subcommand("simplify", "Rewrite to a normal form");
  simplify_cmd->add_option("expr", expr1)->required();
  auto* integrate_cmd = app.add_subcommand("integrate", "Reduce the integral over the whole line");
  integrate_cmd->add_option("expr", expr1)->required();
  auto* equiv_cmd = app.add_subcommand("equiv", "Decide Dirac equivalence against a battery");
  equiv_cmd->add_option("lhs", expr1)->required();
  equiv_cmd->add_option("rhs", expr2)->required();
  auto* check_cmd = app.add_subcommand("check-dirac", "Check the Dirac conditions");
  check_cmd->add_option("target", expr1, "bump, square, plus, minus, mix, conv, psi or point-modified")
      ->required();
  auto* probe_cmd = app.add_subcommand("probe-kernels", "Compare delta(g(x)) across kernels");
  probe_cmd->add_option("g", expr1)->required();
  probe_cmd->add_option("--kernels", kernels_text, "Comma-separated kernel names");
  auto* trace_cmd = app.add_subcommand("trace", "Export n,I_n or x,value samples");
  trace_cmd->add_option("expr", expr1)->required();
  trace_cmd->add_option("--points", points, "Sample the expression at one rank on this many points");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    as_json = std::find_if(argv + 1, argv + argc, [](const char* a) { return std::string(a) == "--json"; }) !=
              argv + argc;
    return report_error(io, as_json, kUsage, "usage", e.what());
  }

  try {
    Config cfg;
    if (!config_path.empty()) load_config(config_path, cfg);
    if (tol) cfg.tolerance = tol;
    if (min_exp) cfg.probe_min_exp = *min_exp;
    if (max_exp) cfg.probe_max_exp = *max_exp;
    if (!battery_name.empty()) cfg.battery = battery_name;
    if (!window_text.empty()) cfg.scan_window = parse_window(window_text);
    if (grid) cfg.grid_size = *grid;
    if (cfg.tolerance && !(*cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (order && (*order < 0 || *order > 6)) throw ConfigError("order must be between 0 and 6");
    const auto schedule = cfg.schedule();
    const auto copt = cfg.composition();

    if (simplify_cmd->parsed()) {
      const auto e = parse_delta_expression(expr1);
      SimplifyOptions sopt;
      sopt.composition = copt;
      sopt.default_kernel = kernel_flag(kernel_name);
      const auto nf = simplify(e, sopt);
      if (as_json) emit_json(out, to_json(nf));
      else out << render_human(nf) << "\nstrength: " << nf.strength.to_string() << '\n';
      return kOk;
    }

    ReduceOptions ropt;
    if (cfg.tolerance) ropt.tol = *cfg.tolerance;

    if (integrate_cmd->parsed()) {
      const auto parsed = parse_expression(expr1);
      IntegralResult r;
      if (const auto* f = std::get_if<ExprPtr>(&parsed))
        r = reduce_integral(smooth_function(to_real_function(*f)), schedule, ropt);
      else
        r = integrate_against(std::get<DeltaExpr>(parsed), kernel_flag(kernel_name), RealFunction::constant(1.0),
                              schedule, ropt, copt);
      if (!trace_out.empty()) {
        std::ofstream f(trace_out);
        if (!f) throw ConfigError("cannot write '" + trace_out + "'");
        write_rank_csv(f, r.rank_values);
      }
      if (as_json) emit_json(out, to_json(r));
      else out << describe(r) << '\n';
      return kOk;
    }

    if (equiv_cmd->parsed()) {
      const auto lhs = parse_delta_expression(expr1);
      const auto rhs = parse_delta_expression(expr2);
      auto battery = battery_flag(cfg.battery);
      EquivalenceOptions eopt;
      if (cfg.tolerance) eopt.tol = *cfg.tolerance;
      eopt.schedule = schedule;
      eopt.composition = copt;
      if (order) {
        eopt.order = *order;
        battery = restrict_smoothness(battery, *order);
        if (battery.empty()) throw ConfigError("no battery member is C" + std::to_string(*order));
      }
      const auto v = check_equivalence(lhs, rhs, kernel_flag(kernel_name), battery, eopt);
      if (as_json) emit_json(out, to_json(v));
      else out << describe(v) << '\n';
      return kOk;
    }

    if (check_cmd->parsed()) {
      auto target = dirac_target(expr1);
      if (order) target = derivative(target, *order);
      DiracCheckOptions dopt;
      dopt.schedule = schedule;
      if (cfg.tolerance) dopt.tol = *cfg.tolerance;
      const auto c = check_dirac(target, dopt);
      if (as_json) {
        auto j = to_json(c);
        j["target"] = target.descriptor();
        emit_json(out, j);
      } else {
        out << target.descriptor() << ": " << describe(c) << '\n';
      }
      return kOk;
    }

    if (probe_cmd->parsed()) {
      const auto g = to_real_function(parse_function(expr1));
      std::vector<DiracKernel> kernels;
      for (const auto& name : split_list(kernels_text)) kernels.push_back(kernel_flag(name));
      if (kernels.size() < 2) throw ConfigError("--kernels needs at least two names");
      ProbeOptions popt;
      if (cfg.tolerance) popt.tol = *cfg.tolerance;
      popt.schedule = schedule;
      popt.composition = copt;
      const auto rep = kernel_dependence_probe(g, kernels, popt);
      if (as_json) {
        emit_json(out, to_json(rep));
      } else {
        for (const auto& e : rep.entries) out << e.kernel << ": " << describe(e.result) << '\n';
        out << (rep.flagged ? "kernel-dependent: " + rep.reason : std::string("kernel-independent")) << '\n';
      }
      return kOk;
    }

    // trace
    const auto e = parse_delta_expression(expr1);
    const auto real = realize(e, kernel_flag(kernel_name), copt);
    ProbeSchedule ranks;
    if (ranks_text.empty()) {
      ranks = schedule;
    } else {
      for (const auto& item : split_list(ranks_text)) {
        try {
          std::size_t used = 0;
          const auto v = std::stoull(item, &used);
          if (used != item.size() || v == 0) throw std::invalid_argument(item);
          ranks.push_back(Rank(v));
        } catch (const std::logic_error&) {
          throw ConfigError("bad rank '" + item + "'");
        }
      }
    }
    if (ranks.empty()) throw ConfigError("no ranks to trace");
    std::ostringstream csv;
    if (points > 0) {
      if (ranks.size() != 1) throw ConfigError("sampling needs exactly one rank in --ranks");
      if (points < 2) throw ConfigError("--points must be at least 2");
      const Rank n = ranks.front();
      const auto [lo, hi] = realization_span(real, n, cfg.scan_window);
      std::vector<std::pair<double, double>> samples;
      for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        samples.emplace_back(x, realization_value(real, n, x));
      }
      write_sample_csv(csv, samples);
    } else {
      std::vector<std::pair<std::uint64_t, double>> values;
      for (auto n : ranks) values.emplace_back(n.value(), integrate_rank(real, RealFunction::constant(1.0), n));
      write_rank_csv(csv, values);
    }
    if (trace_out.empty()) {
      out << csv.str();
    } else {
      std::ofstream f(trace_out);
      if (!f) throw ConfigError("cannot write '" + trace_out + "'");
      f << csv.str();
      if (as_json) emit_json(out, {{"trace_out", trace_out}, {"ranks", ranks.size()}});
      else out << "wrote " << trace_out << '\n';
    }
    return kOk;
  } catch (const ParseError& e) {
    json extra{{"position", e.position()}, {"expected", e.expected()}};
    return report_error(io, as_json, kUsage, "parse", e.what(), extra);
  } catch (const ConfigError& e) {
    return report_error(io, as_json, kUsage, "config", e.what());
  } catch (const RewriteError& e) {
    json extra = json::object();
    if (e.certificate()) extra["certificate"] = to_json(*e.certificate());
    return report_error(io, as_json, kRejected, "rejected", e.what(), extra);
  } catch (const std::exception& e) {
    return report_error(io, as_json, kRejected, "rejected", e.what());
  }
}

}  // namespace vdelta
