#include "doctest.h"

#include "knudsenlab/config.hpp"
#include "knudsenlab/experiments.hpp"
#include "knudsenlab/output.hpp"
#include "knudsenlab/parallel.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace knudsenlab;
namespace fs = std::filesystem;

namespace {

const char* kSimulate = R"(
# small linear run
[model]
kind = HydroBGK
K = 6
Mx = 3
N = 2

[epsilon]
grid = 0.5, 0.2

[experiment]
type = simulate
T = 0.2
dt = 0.01
max_mode = 2

[runtime]
seed = 4
)";

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Everything after the '#' provenance line.
std::string csv_body(const fs::path& p) {
  const std::string text = read_file(p);
  return text.substr(text.find('\n') + 1);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("knudsenlab_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(KNUDSENLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing: values, defaults, comments") {
  const ExperimentConfig c = parse_config(kSimulate);
  CHECK(c.model.kind == ModelKind::HydroBGK);
  CHECK(c.model.K == 6);
  CHECK(c.eps_grid == std::vector<double>{0.5, 0.2});
  CHECK(c.experiment.kind == ExperimentKind::simulate);
  CHECK(*c.experiment.T == 0.2);
  CHECK(c.experiment.data == "random");
  CHECK(c.runtime.seed == 4);
  CHECK(c.runtime.threads == 1);
}

TEST_CASE("config errors name the offending key") {
  const auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[model]\nkind=HydroBGK\n[epsilon]\ngrid=\n[experiment]\ntype=verify\n").find("epsilon.grid") !=
        std::string::npos);
  CHECK(message("[model]\nkind=HydroBGK\ncolour=red\n[epsilon]\ngrid=0.5\n[experiment]\ntype=verify\n")
            .find("model.colour") != std::string::npos);
  CHECK(message("[epsilon]\ngrid=0.5\n[experiment]\ntype=verify\nzeta_max=0.1\n").find("experiment.zeta_max") !=
        std::string::npos);
  CHECK(message("[epsilon]\ngrid=0.5\n[experiment]\ntype=simulate\nnonlinear=true\n").find("nonlinear") !=
        std::string::npos);
  CHECK(message("[epsilon]\ngrid=0.5\n[experiment]\n").find("experiment.type") != std::string::npos);
  CHECK(message("[epsilon]\ngrid=0.5,x\n[experiment]\ntype=verify\n").find("epsilon.grid") != std::string::npos);
  CHECK(message("[epsilon]\ngrid=0.5\n[experiment]\ntype=decay-sweep\n").find("at least 2") != std::string::npos);
  CHECK(message("[extra]\nk=1\n").find("extra") != std::string::npos);
}

TEST_CASE("config hash ignores threads and tracks everything else") {
  ExperimentConfig a = parse_config(kSimulate);
  ExperimentConfig b = a;
  b.runtime.threads = 4;
  CHECK(a.hash() == b.hash());
  b.runtime.seed = 5;
  CHECK(a.hash() != b.hash());
  CHECK(hex64(a.hash()).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV writer: provenance line, column line, row width") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  {
    CsvWriter w(dir / "x.csv", "abc", {"eps", "t"});
    w.row({0.5, 0.25});
    CHECK_THROWS(w.row({1.0}));
  }
  std::istringstream lines(read_file(dir / "x.csv"));
  std::string first, second, third;
  std::getline(lines, first);
  std::getline(lines, second);
  std::getline(lines, third);
  CHECK(first.rfind("# knudsenlab", 0) == 0);
  CHECK(first.find("config_hash=abc") != std::string::npos);
  CHECK(second == "eps,t");
  CHECK(third == "0.5,0.25");
}

TEST_CASE("parallel_for runs every index once and rethrows the first failure") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](int i) {
                                   if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
                                 }),
                    "3");
}

TEST_CASE("simulate: outputs, schema and byte-identical reruns") {
  const ExperimentConfig c = parse_config(kSimulate);
  const fs::path a = scratch("sim_a"), b = scratch("sim_b"), t = scratch("sim_threads");
  const ExperimentResult r = run_experiment(c, a);
  CHECK(r.exit_code() == 0);
  run_experiment(c, b);
  CHECK(csv_body(a / "decay.csv") == csv_body(b / "decay.csv"));
  ExperimentConfig threaded = c;
  threaded.runtime.threads = 2;
  run_experiment(threaded, t);
  CHECK(csv_body(a / "decay.csv") == csv_body(t / "decay.csv"));

  std::istringstream lines(read_file(a / "decay.csv"));
  std::string header, columns;
  std::getline(lines, header);
  std::getline(lines, columns);
  CHECK(header.find(hex64(c.hash())) != std::string::npos);
  CHECK(columns == "eps,t,norm_L2,norm_Hk,norm_HypEps,norm_HypPerp");

  const auto j = nlohmann::json::parse(read_file(a / "result.json"));
  for (const char* key : {"experiment", "model", "config_hash", "versions", "status", "checks", "failed_checks", "error",
                          "files", "summary"})
    CHECK(j.contains(key));
  CHECK(j["status"] == "pass");
  CHECK(j["experiment"] == "simulate");
  CHECK(j["config_hash"] == hex64(c.hash()));
  for (const auto& check : j["checks"]) {
    CHECK(check.contains("name"));
    CHECK(check["pass"].is_boolean());
  }
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "ok.ini") << kSimulate;
  std::string empty = kSimulate;
  empty.replace(empty.find("grid = 0.5, 0.2"), 15, "grid =");
  std::ofstream(dir / "empty.ini") << empty;

  CHECK(run_cli("simulate --config " + (dir / "ok.ini").string() + " --output " + (dir / "out").string(),
                dir / "log1") == 0);
  CHECK(fs::exists(dir / "out" / "result.json"));
  CHECK(run_cli("simulate --config " + (dir / "empty.ini").string(), dir / "log2") == 2);
  CHECK(read_file(dir / "log2").find("epsilon.grid") != std::string::npos);
  CHECK(run_cli("verify --config " + (dir / "ok.ini").string(), dir / "log3") == 2);
  CHECK(run_cli("simulate --config " + (dir / "missing.ini").string(), dir / "log4") == 2);
  CHECK(run_cli("simulate --config " + (dir / "ok.ini").string() + " --output " + (dir / "seeded").string() +
                    " --seed 9 --threads 2",
                dir / "log5") == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "seeded" / "result.json"));
  CHECK(j["config_hash"] != hex64(parse_config(kSimulate).hash()));
}

TEST_CASE("verify experiment on a small HydroBGK discretization") {
  ExperimentConfig c;
  c.model.kind = ModelKind::HydroBGK;
  c.model.K = 6;
  c.model.Mx = 3;
  c.eps_grid = {0.5};
  c.experiment.kind = ExperimentKind::verify;
  c.experiment.data = "random";
  const ExperimentResult r = run_experiment(c, scratch("verify"));
  for (const auto& check : r.checks) {
    CAPTURE(check.name);
    CHECK(check.pass);
  }
  CHECK(r.exit_code() == 0);
}

TEST_CASE("shipped example configs parse and validate") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(KNUDSENLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(validate(parse_config(read_file(entry.path()))));
    ++seen;
  }
  CHECK(seen >= 4);
}
