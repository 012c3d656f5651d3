#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crtrial/cli.hpp"
#include "crtrial/report.hpp"

using namespace crtrial;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Set CRTRIAL_UPDATE_GOLDEN=1 to rewrite the files after a deliberate change.
void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(CRTRIAL_TEST_GOLDEN) + "/" + name;
  if (std::getenv("CRTRIAL_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual;
    return;
  }
  CHECK_MESSAGE(slurp(path) == actual, "golden mismatch: " << path);
}

const std::string fixture = CRTRIAL_TEST_DATA "/fixture.csv";

}  // namespace

TEST_CASE("plan output") {
  const auto r = run({"plan", "--f1t", "0.7", "--f1c", "0.55", "--f2t", "0.1", "--f2c", "0.1", "--method", "sd",
                      "--format", "json"});
  REQUIRE(r.code == kExitOk);
  check_golden("plan_table2_row1_sd.json", r.out);
  const auto j = Json::parse(r.out);
  CHECK(j["plan"]["total_n"] == 300);
  CHECK(j["effect_measures"]["odds_ratio_tau"].get<double>() == doctest::Approx(1.909).epsilon(1e-3));

  const auto text = run({"plan", "--median-t", "12", "--median-c", "20", "--improve", "0.6"});
  CHECK(text.code == kExitOk);
  CHECK(text.out.find("total N           200") != std::string::npos);
}

TEST_CASE("plan usage errors") {
  CHECK(run({"plan"}).code == kExitUsage);
  CHECK(run({"plan", "--f1t", "0.7"}).code == kExitUsage);
  CHECK(run({"plan", "--f1t", "0.7", "--f1c", "0.55", "--f2t", "0.1", "--f2c", "0.1", "--median-t", "3"}).code ==
        kExitUsage);
  CHECK(run({"plan", "--f1t", "abc"}).code == kExitUsage);
  CHECK(run({"plan", "--format", "xml"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
  // well-formed but impossible probabilities
  CHECK(run({"plan", "--f1t", "0.9", "--f1c", "0.55", "--f2t", "0.2", "--f2c", "0.1"}).code == kExitComputation);
  CHECK(run({"plan", "--f1t", "0.55", "--f1c", "0.55", "--f2t", "0.1", "--f2c", "0.1"}).code == kExitComputation);
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("estimate") != std::string::npos);
}

TEST_CASE("tables") {
  const auto csv = run({"table", "--preset", "table2", "--format", "csv"});
  REQUIRE(csv.code == kExitOk);
  check_golden("table2.csv", csv.out);
  const auto text = run({"table", "--preset", "table1"});
  REQUIRE(text.code == kExitOk);
  check_golden("table1.txt", text.out);
  CHECK(run({"table", "--preset", "table2", "--format", "json"}).code == kExitOk);
  CHECK(run({"table"}).code == kExitUsage);
  CHECK(run({"table", "--preset", "table7"}).code == kExitUsage);

  const auto tmp = std::filesystem::temp_directory_path() / "crtrial_empty_rows.csv";
  std::ofstream(tmp) << "f1t,f1c,f2t,f2c\n";
  CHECK(run({"table", "--file", tmp.string()}).code == kExitUsage);
  std::ofstream(tmp) << "f1t,f1c,f2t,f2c\n0.7,0.55,0.1,0.1\n";
  const auto custom = run({"table", "--file", tmp.string(), "--format", "csv"});
  CHECK(custom.code == kExitOk);
  std::filesystem::remove(tmp);
}

TEST_CASE("estimate") {
  const auto r = run({"estimate", "--data", fixture});
  REQUIRE(r.code == kExitOk);
  check_golden("estimate_fixture.json", r.out);
  const auto j = Json::parse(r.out);
  CHECK(j["pooled"]["at_tau"]["f1"].get<double>() == doctest::Approx(0.48333333333333334).epsilon(1e-14));
  CHECK(j["tests"]["gray"].is_null());
  CHECK(r.err.find("notice") != std::string::npos);

  CHECK(run({"estimate", "--data", fixture, "--subdistribution-km"}).code == kExitComputation);
  CHECK(run({"estimate", "--data", "/nonexistent.csv"}).code == kExitUsage);
  CHECK(run({"estimate"}).code == kExitUsage);

  const auto curves = std::filesystem::temp_directory_path() / "crtrial_curves.csv";
  CHECK(run({"estimate", "--data", fixture, "--pooled-only", "--curves-csv", curves.string()}).code == kExitOk);
  const auto text = slurp(curves.string());
  CHECK(text.rfind("group,curve,time,value\n", 0) == 0);
  std::filesystem::remove(curves);
}

TEST_CASE("simulate and ssr") {
  const std::vector<std::string> base{"--f1t", "0.7", "--f1c", "0.55", "--f2t", "0.1", "--f2c", "0.1",
                                      "--n",   "100", "--replicates", "50", "--seed", "3"};
  std::vector<std::string> sim{"simulate"};
  sim.insert(sim.end(), base.begin(), base.end());
  const auto a = run(sim);
  REQUIRE(a.code == kExitOk);
  auto threaded = sim;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(run(threaded).out == a.out);
  const auto j = Json::parse(a.out);
  CHECK(j["command"] == "simulate");
  CHECK(j["config"]["seed"] == 3);

  auto unseeded = sim;
  unseeded.erase(unseeded.end() - 2, unseeded.end());
  const auto u = run(unseeded);
  CHECK(u.code == kExitOk);
  CHECK(u.err.find("seed: ") != std::string::npos);

  std::vector<std::string> ssr{"ssr"};
  ssr.insert(ssr.end(), base.begin(), base.end());
  CHECK(run(ssr).code == kExitUsage);  // no planning effect
  ssr.insert(ssr.end(), {"--planning-theta", "1.6"});
  const auto s = run(ssr);
  CHECK(s.code == kExitOk);
  CHECK(Json::parse(s.out)["results"]["final_n"].is_object());

  auto censored_gray = sim;
  censored_gray.insert(censored_gray.end(), {"--analysis", "gray", "--censor-window", "20"});
  CHECK(run(censored_gray).code == kExitComputation);

  const auto cfg = std::filesystem::temp_directory_path() / "crtrial_bad.json";
  std::ofstream(cfg) << "{ \"n_total\": 10,";
  CHECK(run({"simulate", "--config", cfg.string()}).code == kExitUsage);
  std::filesystem::remove(cfg);
}
