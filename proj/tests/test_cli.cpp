#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "avm/cli.hpp"
#include "avm/error.hpp"

using namespace avm;
using namespace avm::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("avm_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const std::string& text) {
  return static_cast<long>(std::count(text.begin(), text.end(), '\n'));
}

json diag_doc() {
  return json::parse(R"({
    "n": 3, "alpha": 0.1, "beta": 0.9,
    "a": [0.2, 0.3, 0.5], "b": [0.5, 0.25, 0.25],
    "noise": {"mu": [0,0,0,0,0,0], "sigma": [1,1,1,1,1,1], "zero_noise": false},
    "run": {"T": 50, "seed": 42, "method": "both"}
  })");
}

}  // namespace

TEST(Config, RoundTrip) {
  const RunConfig cfg = parse_config(diag_doc());
  const json echoed = to_json(cfg);
  EXPECT_EQ(to_json(parse_config(echoed)), echoed);
  EXPECT_EQ(cfg.run.T, 50);
  EXPECT_EQ(cfg.model.a.size(), 3u);
}

TEST(Config, UniformWeightsFilledIn) {
  const RunConfig cfg = parse_config(json::parse(R"({"n": 4, "alpha": 0.2, "beta": 0.4})"));
  const RawParams p = resolved_model(cfg);
  ASSERT_EQ(p.a.size(), 4u);
  EXPECT_DOUBLE_EQ(p.b[3], 0.25);
}

TEST(Config, StrictSchema) {
  auto expect_config_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_config_error(R"({"n": 2, "gamma": 1})", "gamma");
  expect_config_error(R"({"run": {"steps": 3}})", "run.steps");
  expect_config_error(R"({"run": {"method": "fast"}})", "run.method");
  expect_config_error(R"({"n": "two"})", "n");
  expect_config_error(R"({"output": {"precision": "6"}})", "precision");
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Run, VersionAndHelp) {
  const Result v = call({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(AVM_VERSION) + "\n");
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Run, DecomposeReport) {
  const Result r = call({"decompose", "--n", "3", "--alpha", "0.1", "--beta", "0.9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["command"], "decompose");
  EXPECT_EQ(rep["tool_version"], AVM_VERSION);
  EXPECT_TRUE(rep.contains("config_echo"));
  EXPECT_TRUE(rep.contains("timing"));
  EXPECT_TRUE(rep["warnings"].is_array());
}

TEST(Run, ExitCodes) {
  const Result forbidden = call({"decompose", "--n", "3", "--alpha", "0", "--beta", "0"});
  EXPECT_EQ(forbidden.code, 2);
  EXPECT_EQ(forbidden.err.rfind("error: ForbiddenPair: ", 0), 0u) << forbidden.err;
  EXPECT_EQ(count_lines(forbidden.err), 1);

  const Result regime = call({"simulate", "--n", "2", "--alpha", "1.09804", "--beta", "0.7", "--method", "explicit"});
  EXPECT_EQ(regime.code, 1);
  EXPECT_NE(regime.err.find("\nerror: WrongRegime: "), std::string::npos) << regime.err;

  const Result blowup = call({"simulate", "--n", "2", "--alpha", "40", "--beta", "0.1", "--T", "1000"});
  EXPECT_EQ(blowup.code, 1);
  EXPECT_NE(blowup.err.find("\nerror: NonFiniteState"), std::string::npos) << blowup.err;

  EXPECT_EQ(call({"simulate", "--alpha", "0.1", "--beta", "0.9"}).code, 2);
  EXPECT_EQ(call({"nonsense"}).code, 2);
  EXPECT_EQ(call({"decompose", "--config", "/nonexistent/avm.json"}).code, 2);
}

TEST(Run, SimulateOutputsAreAtomicAndDeterministic) {
  TempDir dir;
  std::ofstream(dir.file("cfg.json")) << diag_doc().dump();
  const std::string stem = dir.file("path.csv");
  const Result r = call({"simulate", "--config", dir.file("cfg.json"), "--out", stem});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string rec = slurp(dir.file("path_recursive.csv"));
  const std::string exp = slurp(dir.file("path_explicit.csv"));
  EXPECT_EQ(count_lines(rec), 52);
  EXPECT_EQ(count_lines(exp), 52);
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
  ASSERT_EQ(call({"simulate", "--config", dir.file("cfg.json"), "--out", stem}).code, 0);
  EXPECT_EQ(slurp(dir.file("path_recursive.csv")), rec);
}

TEST(Run, ConfigEchoReproducesPayload) {
  TempDir dir;
  const Result first = call({"moments", "--n", "2", "--alpha", "0.1", "--beta", "0.9", "--t-grid", "2,4", "--mc-reps", "200"});
  ASSERT_EQ(first.code, 0) << first.err;
  const json rep = json::parse(first.out);
  std::ofstream(dir.file("echo.json")) << rep["config_echo"].dump();
  const Result second = call({"moments", "--config", dir.file("echo.json"), "--report", dir.file("rep.json")});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_TRUE(second.out.empty());
  const json rep2 = json::parse(slurp(dir.file("rep.json")));
  EXPECT_EQ(rep2["payload"], rep["payload"]);
  EXPECT_EQ(rep2["config_echo"], rep["config_echo"]);
}

TEST(Run, FigureTrajectoryHasExpectedRows) {
  TempDir dir;
  const Result r = call({"fig-a", "--out", dir.file("fig.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir.file("fig.csv"));
  EXPECT_EQ(count_lines(csv), 702);
  EXPECT_EQ(csv.rfind("t,xbar,h\n", 0), 0u);
  const json rep = json::parse(r.out);
  EXPECT_TRUE(rep["payload"].contains("analysis"));
}

TEST(Run, ShortCycleAnalysisWarns) {
  const Result r = call({"cycle", "--T", "64", "--analyze"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  ASSERT_FALSE(rep["warnings"].empty());
  EXPECT_NE(rep["warnings"][0].get<std::string>().find("TooShort"), std::string::npos);
}

TEST(Run, VerifyPasses) {
  const Result r = call({"verify", "--n", "3", "--alpha", "0.1", "--beta", "0.9"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  const json rep = json::parse(r.out);
  EXPECT_TRUE(rep["payload"]["passed"].get<bool>());
  EXPECT_GE(rep["payload"]["checks"].size(), 10u);
}

TEST(Run, DumpMatrices) {
  TempDir dir;
  ASSERT_EQ(call({"decompose", "--n", "2", "--alpha", "0.1", "--beta", "0.9", "--dump-matrices", dir.path().string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir.file("M.csv")));
  EXPECT_TRUE(fs::exists(dir.file("Q.csv")));
  EXPECT_EQ(count_lines(slurp(dir.file("Qinv.csv"))), 4);
}
