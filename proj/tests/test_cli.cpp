#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
  json report() const { return json::parse(out); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string config(const std::string& name) { return std::string(PSEUDOSHIFT_CONFIGS) + "/" + name; }

Run run(const std::string& args) {
  fs::path err = fs::temp_directory_path() / ("pseudoshift_cli_err_" + std::to_string(::getpid()));
  std::string cmd = std::string(PSEUDOSHIFT_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  fs::remove(err);
  return r;
}

fs::path scratch(const std::string& name, const std::string& body) {
  fs::path p = fs::temp_directory_path() / ("pseudoshift_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("analyze-map") {
  auto s = run("--config " + config("successor_w2_l2.json") + " analyze-map");
  CHECK(s.code == 0);
  auto j = s.report();
  CHECK(j["generator_sets"]["1"] == json::array({1}));
  CHECK(j["partitions"]["1"].size() == 1);

  auto f = run("--config " + config("first_example.json") + " analyze-map");
  CHECK(f.code == 1);
  CHECK(f.report()["structural"]["injective"]["kind"] == "Refuted");
  CHECK(f.report()["structural"]["injective"]["evidence"]["witness"] == json::array({4, 5}));

  auto t = run("--config " + config("two_orbit.json") + " analyze-map");
  CHECK(t.code == 0);
  CHECK(t.report()["generator_sets"]["1"] == json::array({1, 2}));
}

TEST_CASE("criteria commands") {
  auto c = run("--config " + config("closing_lp.json") + " check-chaotic");
  CHECK(c.code == 0);
  CHECK(c.report()["overall"]["kind"] == "ExactTailBound");
  CHECK(run("--config " + config("closing_c0.json") + " check-chaotic").code == 0);
  CHECK(run("--config " + config("successor_w2_l2.json") + " check-hypercyclic").code == 0);
  auto flat = run("--config " + config("successor_w1.json") + " check-hypercyclic");
  CHECK(flat.code == 1);
  CHECK(run("--config " + config("successor_w1.json") + " check-chaotic").code == 1);
}

TEST_CASE("periodic, approx and simulate") {
  auto p = run("--config " + config("successor_w2_l1.json") + " --mode exact periodic --k 1 --N 1");
  CHECK(p.code == 0);
  CHECK(p.report()["residual"] == 0.0);
  CHECK(p.report()["entries"]["2"] == "1/2");

  auto pf = run("--config " + config("closing_lp.json") + " periodic --k 1 --N 2");
  CHECK(pf.code == 0);
  CHECK(pf.report()["relative_residual"].get<double>() <= 1e-10);

  auto a = run("--config " + config("successor_w2_l1.json") + " approx --target " + config("target_e1.json") +
               " --eps 0.1");
  CHECK(a.code == 0);
  CHECK(a.report()["achieved"].get<double>() < 0.1);

  auto sim = run("--config " + config("successor_w2_l2.json") + " simulate --vector " + config("target_e1.json") +
                 " --steps 3");
  CHECK(sim.code == 0);
  auto traj = sim.report()["trajectory"];
  REQUIRE(traj.size() == 4);
  CHECK(traj[0]["norm"] == 1.0);
  for (size_t j = 1; j < 4; ++j) CHECK(traj[j]["norm"] == 0.0);
}

TEST_CASE("csv and output files") {
  fs::path out = fs::temp_directory_path() / ("pseudoshift_" + std::to_string(::getpid()) + "_out.csv");
  auto r = run("--config " + config("successor_w2_l2.json") + " --format csv --output " + out.string() +
               " simulate --vector " + config("target_e1.json") + " --steps 1");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::string body = slurp(out);
  CHECK(body.rfind("j,norm,top\n", 0) == 0);
  CHECK(body.find("\n0,1,1:1\n") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("output is deterministic") {
  std::string args = "--config " + config("two_orbit.json") + " check-chaotic";
  CHECK(run(args).out == run(args).out);
}

TEST_CASE("errors and exit codes") {
  auto missing = run("--config /nonexistent/config.json analyze-map");
  CHECK(missing.code == 66);
  CHECK(json::parse(missing.err)["error"] == "missing_file");

  auto bad = scratch("bad.json", "{\n  \"map\": {\n    \"clauses\": [\n  ,\n}");
  auto parse = run("--config " + bad.string() + " analyze-map");
  CHECK(parse.code == 65);
  auto msg = json::parse(parse.err)["message"].get<std::string>();
  CHECK(msg.find(bad.string() + ":4:") != std::string::npos);
  fs::remove(bad);

  auto unknown = scratch("unknown.json", R"({"map": {"clauses": [], "default": {"affine": {"a": 1, "b": 1}}},
    "weights": {"clauses": [], "default": {"const": 2}}, "space": "c0", "colour": 1})");
  auto u = run("--config " + unknown.string() + " analyze-map");
  CHECK(u.code == 65);
  CHECK(json::parse(u.err)["message"].get<std::string>().find("colour") != std::string::npos);
  fs::remove(unknown);

  CHECK(run("--config " + config("successor_w2_l2.json")).code == 64);
  CHECK(run("--config " + config("successor_w2_l2.json") + " periodic --k 0").code == 64);
  CHECK(run("--config " + config("successor_w2_l2.json") + " --mode fuzzy analyze-map").code == 64);
  auto nt = run("--config " + config("successor_w2_l2.json") + " approx --target /nonexistent/t.json");
  CHECK(nt.code == 66);
}
