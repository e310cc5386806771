#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "vdelta/cli.hpp"
#include "vdelta/serialize.hpp"

using namespace vdelta;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vdelta");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vdelta_cli_test_" + name);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, SimplifyHuman) {
  const auto r = run({"simplify", "delta(x^2-4)"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.25·δ(x−2) + 0.25·δ(x+2)\nstrength: strong\n");
}

TEST(Cli, SimplifyJson) {
  const auto r = run({"--json", "simplify", "x^2*ddelta(x, 2)"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["strength"]["kind"], "order");
  EXPECT_EQ(j["strength"]["n"], 2);
  ASSERT_EQ(j["terms"].size(), 1u);
  EXPECT_EQ(j["terms"][0]["c"], 2.0);
  EXPECT_EQ(j["residual"], "none");
}

TEST(Cli, EquivVerdicts) {
  auto j = json::parse(run({"--json", "equiv", "delta(2*x)", "0.5*delta(x)"}).out);
  EXPECT_EQ(j["verdict"], "consistent-equivalent");
  EXPECT_EQ(j["battery_size"], 20);
  j = json::parse(run({"--json", "equiv", "delta(x)", "delta(x - 1)"}).out);
  EXPECT_EQ(j["verdict"], "distinct");
  EXPECT_TRUE(j.contains("witness"));
  const auto h = run({"equiv", "delta(2*x)", "0.5*delta(x)"});
  EXPECT_NE(h.out.find("consistent-equivalent"), std::string::npos) << h.out;
}

TEST(Cli, IntegrateOutcomes) {
  auto r = run({"--json", "integrate", "delta(x)+3"});
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["variant"], "irreducible");
  EXPECT_NEAR(j["exponent"].get<double>(), 1.0, 0.05);
  EXPECT_EQ(j["sign"], 1);
  EXPECT_EQ(j["rank_values"].size(), 17u);
  j = json::parse(run({"--json", "integrate", "cos(x)*delta(x - 2)"}).out);
  EXPECT_EQ(j["variant"], "reduced");
  EXPECT_NEAR(j["value"].get<double>(), std::cos(2.0), 1e-9);
  j = json::parse(run({"--json", "--probe-min-exp", "3", "--probe-max-exp", "9", "integrate", "delta(x)"}).out);
  EXPECT_EQ(j["rank_values"].size(), 7u);
  EXPECT_EQ(j["rank_values"][0][0], 8);
}

TEST(Cli, CheckDirac) {
  auto j = json::parse(run({"--json", "check-dirac", "bump"}).out);
  EXPECT_EQ(j["verdict"], "dirac");
  EXPECT_NEAR(j["normalization"]["value"].get<double>(), 1.0, 1e-8);
  j = json::parse(run({"--json", "check-dirac", "point-modified"}).out);
  EXPECT_EQ(j["verdict"], "not-dirac");
  EXPECT_EQ(j["violations"][0]["name"], "(iii) infinitesimal support");
  j = json::parse(run({"--json", "--order", "1", "check-dirac", "bump"}).out);
  EXPECT_EQ(j["violations"][0]["name"], "(i) nonnegativity");
}

TEST(Cli, ProbeKernels) {
  auto j = json::parse(run({"--json", "probe-kernels", "x^2", "--kernels", "minus,square"}).out);
  EXPECT_TRUE(j["flagged"].get<bool>());
  ASSERT_EQ(j["entries"].size(), 2u);
  EXPECT_EQ(j["entries"][0]["outcome"], "zero");
  EXPECT_EQ(j["entries"][1]["outcome"], "divergent");
  j = json::parse(run({"--json", "probe-kernels", "x^2 - 4", "--kernels", "bump,square"}).out);
  EXPECT_FALSE(j["flagged"].get<bool>());
}

TEST(Cli, TraceCsv) {
  auto r = run({"trace", "delta(x)", "--ranks", "4,8,16"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "n,I_n");
  EXPECT_EQ(ls[1].rfind("4,", 0), 0u);
  r = run({"--ranks", "8", "trace", "delta(x)", "--points", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  ls = lines(r.out);
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0], "x,value");
  EXPECT_EQ(ls[3].rfind("0,", 0), 0u);
}

TEST(Cli, TraceOutWritesFile) {
  const auto path = temp_file("trace.csv");
  std::filesystem::remove(path);
  const auto r = run({"--trace-out", path.string(), "--probe-max-exp", "8", "integrate", "delta(x)"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto ls = lines(ss.str());
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0], "n,I_n");
  std::filesystem::remove(path);
}

TEST(Cli, JsonIsByteIdenticalAcrossRuns) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"--json", "simplify", "delta(x^2-4)*cos(x)"},
        {"--json", "integrate", "delta(x)+3"},
        {"--json", "equiv", "delta(2*x)", "0.5*delta(x)"},
        {"--json", "check-dirac", "psi"},
        {"--json", "probe-kernels", "x^2"}}) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out) << args[1];
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 1) << args[1];
  }
}

TEST(Cli, ConfigFile) {
  const auto path = temp_file("config.json");
  {
    std::ofstream(path) << R"({"probe_min_exp": 5, "probe_max_exp": 10, "scan_window": [-3, 3]})";
  }
  auto j = json::parse(run({"--json", "--config", path.string(), "integrate", "delta(x)"}).out);
  EXPECT_EQ(j["rank_values"].size(), 6u);
  // Flags override the file.
  j = json::parse(run({"--json", "--config", path.string(), "--probe-max-exp", "7", "integrate", "delta(x)"}).out);
  EXPECT_EQ(j["rank_values"].size(), 3u);
  // Roots at +-4 lie outside the configured window, and g heads for zero at its edges.
  const auto w = run({"--json", "--config", path.string(), "simplify", "delta(x^2 - 16)"});
  EXPECT_EQ(w.code, 1);
  j = json::parse(w.err);
  EXPECT_EQ(j["certificate"]["scan_window"], json::parse("[-3.0, 3.0]"));
  EXPECT_EQ(j["certificate"]["verdict"], "outside-scan-risk");
  {
    std::ofstream(path) << R"({"probe_min_exp": 5, "colour": "red"})";
  }
  const auto r = run({"--json", "--config", path.string(), "simplify", "delta(x)"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "config");
  std::filesystem::remove(path);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"simplify", "delta(delta(x))"}).code, 2);
  EXPECT_EQ(run({"simplify", "delta(x"}).code, 2);
  EXPECT_EQ(run({"--json"}).code, 2);
  EXPECT_EQ(run({"--kernel", "psi", "simplify", "delta(x)"}).code, 2);
  EXPECT_EQ(run({"--window", "3", "simplify", "delta(x)"}).code, 2);
  EXPECT_EQ(run({"--probe-min-exp", "9", "--probe-max-exp", "5", "integrate", "delta(x)"}).code, 2);
  EXPECT_EQ(run({"--battery", "nothing", "equiv", "delta(x)", "delta(x)"}).code, 2);
  EXPECT_EQ(run({"--tol", "-1", "simplify", "delta(x)"}).code, 2);
  EXPECT_EQ(run({"simplify", "delta(x^2)"}).code, 1);
  EXPECT_EQ(run({"--kernel", "square", "integrate", "ddelta(x, 1)"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, JsonErrorsGoToStderr) {
  const auto r = run({"--json", "simplify", "delta(x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  const auto j = json::parse(r.err);
  EXPECT_EQ(j["error"], "parse");
  EXPECT_EQ(j["position"], 7);
  EXPECT_EQ(j["exit"], 2);
  const auto t = run({"--json", "simplify", "delta(x^2)"});
  EXPECT_EQ(t.code, 1);
  const auto k = json::parse(t.err);
  EXPECT_EQ(k["exit"], 1);
  EXPECT_EQ(k["certificate"]["verdict"], "violated");
}

TEST(Serialize, IntegralResultVariants) {
  IntegralResult r;
  r.outcome = Reduced{1.5, 1e-9};
  r.rank_values = {{16, 1.5}};
  auto j = to_json(r);
  EXPECT_EQ(j["variant"], "reduced");
  EXPECT_EQ(j["value"], 1.5);
  EXPECT_EQ(j["rank_values"][0][0], 16);
  r.outcome = Undetermined{"oscillates"};
  j = to_json(r);
  EXPECT_EQ(j["variant"], "undetermined");
  EXPECT_EQ(j["reason"], "oscillates");
}

TEST(Serialize, KernelDescriptorRoundTrip) {
  const auto j = to_json(shifted_delta(Shift::Plus).descriptor());
  EXPECT_EQ(j["name"], "plus");
  EXPECT_EQ(j["params"]["shift"], "2/n");
  EXPECT_TRUE(j.contains("smoothness"));
  EXPECT_TRUE(j.contains("support_rule"));
}

TEST(Serialize, CsvWriters) {
  std::ostringstream a;
  write_rank_csv(a, {{4, 0.5}, {8, 0.25}});
  EXPECT_EQ(a.str(), "n,I_n\n4,0.5\n8,0.25\n");
  std::ostringstream b;
  write_sample_csv(b, {{-1.0, 0.0}, {0.0, 2.0}});
  EXPECT_EQ(b.str(), "x,value\n-1,0\n0,2\n");
}
