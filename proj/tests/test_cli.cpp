// test_cli.cpp — end-to-end runs of the qclt binary: exit codes, artifacts,
// determinism.  The binary path is baked in as QCLT_BIN_PATH at build time.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd =
      env_prefix + " " + std::string(QCLT_BIN_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qclt_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& contents) const {
    const fs::path p = path / name;
    std::ofstream(p) << contents;
    return p.string();
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  bool has(const std::string& name) const { return fs::exists(path / name); }
};

const char* kIsing8 =
    R"({"builder": "ising", "n": 8, "params": {"B": 1.0, "J": 1.0}})";

std::string all_down_state(int n) {
  json locals = json::array();
  for (int i = 0; i < n; ++i)
    locals.push_back(json::array({{0.0, 0.0}, {1.0, 0.0}}));
  return json{{"locals", locals}}.dump();
}

}  // namespace

TEST_CASE("schema prints a json document") {
  const RunResult r = run("schema");
  CHECK(r.code == 0);
  const json schema = json::parse(r.out);
  CHECK(schema.contains("properties"));
}

TEST_CASE("measure: happy path writes artifacts") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const RunResult r =
      run("measure --model " + model + " --state all-up --out " + tmp.path.string());
  CHECK(r.code == 0);
  REQUIRE(tmp.has("measure.csv"));
  REQUIRE(tmp.has("report.json"));
  CHECK(tmp.slurp("measure.csv").substr(0, 13) == "value,weight\n");

  const json report = json::parse(tmp.slurp("report.json"));
  CHECK(report.at("method") == "exact");
  CHECK(report.at("n") == 8);
  CHECK(std::abs(report.at("stats").at("variance").get<double>() - 1.75) < 1e-10);
  CHECK(std::abs(report.at("gaussian").at("ks_distance").get<double>() -
                 0.521588543) < 1e-6);
}

TEST_CASE("measure: --n overrides the file") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const RunResult r = run("measure --model " + model + " --n 4 --out " +
                          tmp.path.string());
  CHECK(r.code == 0);
  CHECK(json::parse(tmp.slurp("report.json")).at("n") == 4);
}

TEST_CASE("measure: degenerate variance exits 2 with machine-readable error") {
  TempDir tmp;
  const std::string model = tmp.file(
      "flat.json", R"({"builder": "ising", "n": 6, "params": {"J": 0.0}})");
  const RunResult r =
      run("measure --model " + model + " --state all-up --out " + tmp.path.string());
  CHECK(r.code == 2);
  const json err = json::parse(r.out);
  CHECK(err.at("error").at("type") == "hypothesis-violation");
  CHECK(err.at("error").at("what").get<std::string>().find("degenerate") !=
        std::string::npos);
}

TEST_CASE("usage and parse errors exit 1") {
  TempDir tmp;
  CHECK(run("").code == 1);  // a subcommand is required
  CHECK(run("measure").code == 1);
  CHECK(run("measure --model /no/such/file.json").code == 1);
  CHECK(run("measure --frobnicate").code == 1);

  const std::string bad = tmp.file("bad.json", "{\"builder\": \"ising\", n: }");
  CHECK(run("measure --model " + bad + " --out " + tmp.path.string()).code == 1);

  const std::string unknown = tmp.file("unknown.json", R"({"builder": "xy", "n": 3})");
  CHECK(run("measure --model " + unknown + " --out " + tmp.path.string()).code == 1);

  CHECK(run("--help").code == 0);
}

TEST_CASE("verify: all checks pass on the n=8 default") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const RunResult r = run("verify --model " + model);
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("lyapunov_bound") != std::string::npos);
  CHECK(r.out.find("all checks passed") != std::string::npos);

  // degenerate blocking k = n still runs to completion
  CHECK(run("verify --model " + model + " --k 8").code == 0);
}

TEST_CASE("verify --json is byte-stable") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const RunResult a = run("verify --model " + model + " --json");
  const RunResult b = run("verify --model " + model + " --json");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const json rep = json::parse(a.out);
  CHECK(rep.at("ok") == true);
  CHECK(rep.at("checks").is_array());
}

TEST_CASE("sweep: table rows, determinism, thread cap") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const std::string base = "sweep --model " + model + " --n-list 4,6 --out " +
                           tmp.path.string();
  CHECK(run(base).code == 0);
  const std::string csv1 = tmp.slurp("sweep.csv");
  const std::string json1 = tmp.slurp("sweep.json");
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 3);  // header + 2 rows

  CHECK(run(base).code == 0);
  CHECK(tmp.slurp("sweep.csv") == csv1);
  CHECK(tmp.slurp("sweep.json") == json1);

  CHECK(run(base, "QCLT_THREADS=2").code == 0);
  CHECK(tmp.slurp("sweep.csv") == csv1);

  CHECK(run(base, "QCLT_THREADS=frogs").code == 1);
  CHECK(run("sweep --model " + model + " --out " + tmp.path.string()).code == 1);
}

TEST_CASE("sweep: needs a parametric builder") {
  TempDir tmp;
  // a custom model cannot be re-instantiated at other n
  const std::string custom = tmp.file("custom.json", R"({
    "builder": "custom", "n": 1, "local_dims": [2],
    "custom_terms": {"site_terms": [[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[-1.0,0.0]]]],
                      "bond_terms": []}})");
  const RunResult r =
      run("sweep --model " + custom + " --n-list 2,3 --out " + tmp.path.string());
  CHECK(r.code == 1);
}

TEST_CASE("dynamics: fidelity oracle values land in the csv") {
  TempDir tmp;
  const std::string model = tmp.file(
      "two.json", R"({"builder": "ising", "n": 2, "params": {"B": 1.0, "J": 2.0}})");
  const RunResult r = run("dynamics --model " + model +
                          " --tmax 2.2 --steps 220 --out " + tmp.path.string());
  CHECK(r.code == 0);
  REQUIRE(tmp.has("fidelity.csv"));
  REQUIRE(tmp.has("dynamics.json"));

  double f03 = 0.0, f11 = 0.0;
  std::istringstream lines(tmp.slurp("fidelity.csv"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("0.3,", 0) == 0) f03 = std::stod(line.substr(4));
    if (line.rfind("1.1,", 0) == 0) f11 = std::stod(line.substr(4));
  }
  CHECK(f03 == doctest::Approx(0.922715522031).epsilon(1e-9));
  CHECK(f11 == doctest::Approx(0.920548628514).epsilon(1e-9));
}

TEST_CASE("dynamics: transition trace against a second state") {
  TempDir tmp;
  const std::string model = tmp.file("ising.json", kIsing8);
  const std::string state_a = tmp.file("down.json", all_down_state(8));
  json flipped = json::parse(all_down_state(8));
  flipped["locals"][4] = json::array({{1.0, 0.0}, {0.0, 0.0}});
  const std::string state_b = tmp.file("flip.json", flipped.dump());

  const RunResult r = run("dynamics --model " + model + " --state " + state_a +
                          " --state-b " + state_b + " --steps 200 --out " +
                          tmp.path.string());
  CHECK(r.code == 0);
  REQUIRE(tmp.has("transition.csv"));
  const json meta = json::parse(tmp.slurp("dynamics.json"));
  const json tr = meta.at("transition");
  CHECK(std::abs(tr.at("bound").get<double>() - 0.564718) < 1e-6);
  CHECK(tr.at("regime_ok_a") == true);
  CHECK(tr.at("regime_ok_b") == true);
  CHECK(tr.at("max_probability").get<double>() < 1e-12);
  CHECK(std::abs(tr.at("ground_energy").get<double>() + 8.442571) < 1e-5);

  // identical states are not a valid transition pair
  const RunResult same = run("dynamics --model " + model + " --state " + state_a +
                             " --state-b " + state_a + " --tmax 1 --out " +
                             tmp.path.string());
  CHECK(same.code == 2);
}
