#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specflow/cli.hpp"

using namespace specflow;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "specflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string write_temp(const std::string& name, const json& j) {
  const auto p = std::filesystem::temp_directory_path() / ("specflow_cli_" + name + ".json");
  std::ofstream(p) << j.dump();
  return p.string();
}

json scalar(double v) { return {{"dim", 1}, {"re", {{v}}}, {"im", {{0.0}}}}; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string x;
  while (std::getline(ss, x, ',')) f.push_back(x);
  return f;
}

}  // namespace

TEST(CliCompute, NormalizationPathTotalOne) {
  const auto in = write_temp("norm", {{"dim", 1}, {"kind", "sampled"}, {"samples", {scalar(-0.5), scalar(0.5)}}});
  const auto r = run_cli({"compute", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["total"], 1);
  EXPECT_TRUE(j["agree"].get<bool>());
  EXPECT_EQ(j["endpoints"], 1);
  EXPECT_EQ(j["oracle"]["net"], 1);
  EXPECT_EQ(j["phillips"]["method"], "phillips");
  EXPECT_EQ(j["pairsum"]["total"], 1);
}

TEST(CliCompute, ConstantPathTotalZero) {
  const json a = {{"dim", 2}, {"re", {{1.0, 0.5}, {0.5, -1.0}}}, {"im", {{0.0, 0.25}, {-0.25, 0.0}}}};
  const auto in = write_temp("const", {{"dim", 2},
                                        {"kind", "family"},
                                        {"family", {{"name", "linear_interp"}, {"params", {{"from", a}, {"to", a}}}}}});
  const auto r = run_cli({"compute", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["total"], 0);
}

TEST(CliCompute, CoarseBudgetExitsTwoWithHint) {
  const auto in = write_temp("trig", {{"dim", 3},
                                       {"kind", "family"},
                                       {"family", {{"name", "trig_random"}, {"params", {{"degree", 4}, {"gap", 0.2}}}, {"seed", 11}}}});
  EXPECT_EQ(run_cli({"compute", "--input", in}).code, 0);
  const auto r = run_cli({"compute", "--input", in, "--max-depth", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("refine"), std::string::npos);
}

TEST(CliCompute, CertificateRoundTripsAndRechecks) {
  const auto in = write_temp("trig2", {{"dim", 4},
                                        {"kind", "family"},
                                        {"family", {{"name", "trig_random"}, {"params", {{"degree", 3}}}, {"seed", 3}}}});
  const auto r = run_cli({"compute", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cert = io::certificate_from_json(json::parse(r.out)["phillips"]);
  Rng rng(3);
  const auto path = trig_random_path(rng, 4, 3, 0.2);
  EXPECT_TRUE(recheck_certificate(path, cert).valid);
  EXPECT_EQ(cert.total, sf_phillips(path).total);
}

TEST(CliCompute, InputErrors) {
  EXPECT_EQ(run_cli({"compute"}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"compute", "--input", "/nonexistent/x.json"}).code, 1);
  const auto bad = std::filesystem::temp_directory_path() / "specflow_cli_bad.json";
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(run_cli({"compute", "--input", bad.string()}).code, 1);
  const json nonherm = {{"dim", 2}, {"re", {{0.0, 1.0}, {0.0, 0.0}}}};
  EXPECT_EQ(run_cli({"compute", "--input", write_temp("nh", {{"kind", "sampled"}, {"samples", {nonherm, nonherm}}})}).code, 1);
  // endpoint not invertible
  EXPECT_EQ(run_cli({"compute", "--input", write_temp("sing", {{"kind", "sampled"}, {"samples", {scalar(0.0), scalar(1.0)}}})}).code, 1);
  EXPECT_EQ(run_cli({"compute", "--input", write_temp("dimx", {{"dim", 2}, {"kind", "sampled"}, {"samples", {scalar(-1.0), scalar(1.0)}}})}).code, 1);
  EXPECT_EQ(run_cli({"metrics", "--samples", "1"}).code, 1);
  EXPECT_EQ(run_cli({"metrics", "--tol", "-1"}).code, 1);
  EXPECT_EQ(run_cli({"metrics", "--format", "xml"}).code, 1);
}

TEST(CliMetrics, FugledeGraphColumnAndRankOneNorm) {
  const auto in = write_temp("model", {{"N", 64}, {"law", "linear"}, {"family", nullptr}});
  const auto r = run_cli({"metrics", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "family,n,d_N,d_W,d_R,d_G,res_N,res_W,res_R,res_G");
  int fuglede = 0, rank_one = 0, swap = 0;
  while (std::getline(ss, line)) {
    const auto f = split(line);
    ASSERT_EQ(f.size(), 10u);
    const double n = std::stod(f[1]);
    if (f[0] == "fuglede") {
      ++fuglede;
      EXPECT_NEAR(std::stod(f[5]), 2.0 * n / (1.0 + n * n), 1e-12);
    } else if (f[0] == "rank_one") {
      ++rank_one;
      EXPECT_EQ(std::stod(f[2]), 1.0);
    } else if (f[0] == "swap") {
      ++swap;
      EXPECT_EQ(std::stod(f[7]), 0.0);  // d_W lower bound respected
      EXPECT_EQ(std::stod(f[9]), 0.0);  // d_G upper bound respected
    }
  }
  EXPECT_EQ(fuglede, 32);
  EXPECT_EQ(rank_one, 32);
  EXPECT_EQ(swap, 31);
}

TEST(CliMetrics, TruncDimAndJson) {
  const auto r = run_cli({"metrics", "--trunc-dim", "8", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["rows"].size(), 7u * 3 + 6);
  EXPECT_TRUE(j["rows"][0]["d_N"].is_number());
}

TEST(CliToeplitz, CyclicTableAllTrue) {
  const auto in = write_temp("toe", {{"m_max", 20}, {"random", 0}});
  const auto r = run_cli({"toeplitz", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["all_equal"].get<bool>());
  ASSERT_EQ(j["cases"].size(), 20u);
  for (const auto& c : j["cases"]) {
    EXPECT_EQ(c["lhs"], 0);
    EXPECT_EQ(c["rhs"], 0);
    EXPECT_EQ(c["up"], 1);
    EXPECT_EQ(c["down"], 1);
  }
}

TEST(CliToeplitz, ExplicitPair) {
  const json d = {{"dim", 2}, {"re", {{-0.5, 0.0}, {0.0, 0.5}}}};
  const json w = {{"dim", 2}, {"re", {{0.0, 1.0}, {1.0, 0.0}}}};
  const auto r = run_cli({"toeplitz", "--input", write_temp("pair", {{"D", d}, {"W", w}})});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["cases"][0]["equal"].get<bool>());
  const json notu = {{"dim", 2}, {"re", {{2.0, 0.0}, {0.0, 1.0}}}};
  EXPECT_EQ(run_cli({"toeplitz", "--input", write_temp("pair2", {{"D", d}, {"W", notu}})}).code, 1);
}

TEST(CliGraded, SingleSpecAndSweep) {
  const json a = {{"rows", 1}, {"cols", 2}, {"re", {{0.0, 0.0}}}, {"im", {{0.0, 0.0}}}};
  const auto r = run_cli({"graded", "--input", write_temp("g", {{"p", 2}, {"q", 1}, {"A", a}})});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["ind0"], 1);
  EXPECT_EQ(j["window_dim"], 1);
  const auto s = run_cli({"graded", "--input", write_temp("gs", {{"trials", 60}, {"stability_instances", 5}})});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(json::parse(s.out)["passed"].get<bool>());
  const json wrong = {{"rows", 2}, {"cols", 2}, {"re", {{0.0, 0.0}, {0.0, 0.0}}}};
  EXPECT_EQ(run_cli({"graded", "--input", write_temp("gw", {{"p", 2}, {"q", 1}, {"A", wrong}})}).code, 1);
}

TEST(CliAxioms, SmallSuiteAndCsv) {
  const auto in = write_temp("ax", {{"concatenation", 6}, {"homotopy", 3}, {"normalization", 4}, {"vanishing", 6},
                                     {"max_dim", 5}, {"methods", {"phillips", "endpoints"}}});
  const auto r = run_cli({"axioms", "--input", in, "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line;
  int rows = 0;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    ++rows;
    EXPECT_EQ(split(line).back(), "true") << line;
  }
  EXPECT_EQ(rows, 8);
}

TEST(CliDeterminism, ByteIdenticalAcrossThreadCounts) {
  const auto toe = write_temp("det", {{"m_max", 4}, {"random", 6}});
  const auto gr = write_temp("detg", {{"trials", 30}, {"stability_instances", 3}, {"stability_trials", 10}});
  setenv("SPECFLOW_THREADS", "1", 1);
  const auto a = run_cli({"toeplitz", "--input", toe, "--seed", "9"});
  const auto ga = run_cli({"graded", "--input", gr, "--seed", "9"});
  setenv("SPECFLOW_THREADS", "4", 1);
  const auto b = run_cli({"toeplitz", "--input", toe, "--seed", "9"});
  const auto gb = run_cli({"graded", "--input", gr, "--seed", "9"});
  unsetenv("SPECFLOW_THREADS");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(ga.out, gb.out);
  EXPECT_NE(a.out, run_cli({"toeplitz", "--input", toe, "--seed", "10"}).out);
}

TEST(CliOutput, WritesOutFile) {
  const auto out = (std::filesystem::temp_directory_path() / "specflow_cli_out.csv").string();
  const auto r = run_cli({"metrics", "--trunc-dim", "4", "--out", out});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "family,n,d_N,d_W,d_R,d_G,res_N,res_W,res_R,res_G");
}
