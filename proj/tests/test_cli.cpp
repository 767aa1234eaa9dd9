#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "meshmap/cli.hpp"
#include "meshmap/io.hpp"

using namespace meshmap;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("meshmap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Small, fast run configuration.
fs::path small_config(const fs::path& dir) {
  const Json j = {{"workload",
                   {{"name", "small"},
                    {"input_size", 64},
                    {"layers", Json::array({{{"neurons", 96}, {"weight_sparsity", 0.8}, {"activation_sparsity", 0.3}},
                                            {{"neurons", 64}, {"weight_sparsity", 0.8}, {"activation_sparsity", 0.6}}})}}},
                  {"architecture", {{"mesh_width", 3}, {"mesh_height", 2}, {"cores_per_router", 4}}},
                  {"es", {{"budget", 25}, {"seed", 1}}}};
  write_text_file(dir / "run.json", dump_json(j));
  return dir / "run.json";
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"ablate", "everything"}).code == kExitUsage);
  CHECK(cli({"--version"}).code == kExitOk);
}

TEST_CASE("generate") {
  auto r = cli({"generate", "sparsemlp-1"});
  CHECK(r.code == kExitOk);
  const auto w = workload_from_json(Json::parse(r.out), "workload");
  CHECK(w.layers.size() == 6);
  CHECK(r.err.find("16777216 dense parameters") != std::string::npos);

  const auto dir = scratch("generate");
  r = cli({"--out", dir.string(), "generate", "sparsemlp-2"});
  CHECK(r.code == kExitOk);
  CHECK(workload_from_json(read_json_file(dir / "sparsemlp-2.json"), "workload").layers.size() == 12);

  r = cli({"generate", "sparsemlp-9"});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("heuristics table") {
  const auto dir = scratch("heuristics");
  const auto r = cli({"--out", dir.string(), "heuristics"});
  REQUIRE(r.code == kExitOk);
  const auto csv = lines(read_file(dir / "heuristics.csv"));
  REQUIRE(csv.size() == 6);
  double prev = 0.0;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    const auto first = csv[i].find(','), second = csv[i].find(',', first + 1);
    const double lat = std::stod(csv[i].substr(second + 1));
    CHECK(lat >= prev);
    prev = lat;
  }
  CHECK(cli({"--out", dir.string(), "heuristics"}).out == r.out);
  CHECK(cli({"heuristics", "--k", "40"}).code == kExitInfeasible);
}

TEST_CASE("optimize writes a reproducible run directory") {
  const auto dir = scratch("optimize");
  const auto config = small_config(dir);
  const auto a = dir / "a", b = dir / "b";
  REQUIRE(cli({"--config", config.string(), "--out", a.string(), "optimize", "--threads", "3"}).code == kExitOk);
  REQUIRE(cli({"--config", config.string(), "--out", b.string(), "optimize", "--threads", "1"}).code == kExitOk);
  for (const char* f : {"trace.csv", "best_mapping.json", "summary.txt", "config.json", "trials.csv", "aggregate.csv"})
    CHECK(read_file(a / f) == read_file(b / f));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(lines(read_file(a / "trace.csv")).size() == 26);
  CHECK(mapping_from_json(read_json_file(a / "best_mapping.json")).report.has_value());

  // The config echo reproduces the run on its own.
  const auto c = dir / "c";
  REQUIRE(cli({"--config", (a / "config.json").string(), "--out", c.string(), "optimize"}).code == kExitOk);
  CHECK(read_file(c / "trace.csv") == read_file(a / "trace.csv"));
}

TEST_CASE("optimize with several trials") {
  const auto dir = scratch("trials");
  const auto config = small_config(dir);
  REQUIRE(cli({"--config", config.string(), "--out", dir.string(), "--trials", "3", "optimize", "--budget", "20"})
              .code == kExitOk);
  for (int t = 0; t < 3; ++t) {
    const auto trial = dir / ("trial_" + std::to_string(t));
    CHECK(lines(read_file(trial / "trace.csv")).size() == 21);
    CHECK(fs::exists(trial / "best_mapping.json"));
    CHECK(fs::exists(trial / "summary.txt"));
  }
  CHECK(lines(read_file(dir / "aggregate.csv")).size() == 21);
  CHECK(lines(read_file(dir / "trials.csv")).size() == 4);
}

TEST_CASE("config errors name the field") {
  const auto dir = scratch("badconfig");
  write_text_file(dir / "bad.json", dump_json(Json{{"es", {{"lambda_place", 0}}}}));
  auto r = cli({"--config", (dir / "bad.json").string(), "optimize"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("es.lambda_place") != std::string::npos);
  r = cli({"--config", (dir / "missing.json").string(), "optimize"});
  CHECK(r.code == kExitIo);
}

TEST_CASE("evaluate and render a mapping file") {
  const auto dir = scratch("evaluate");
  const auto config = small_config(dir);
  REQUIRE(cli({"--config", config.string(), "--out", dir.string(), "optimize"}).code == kExitOk);
  const auto mapping = (dir / "best_mapping.json").string();
  const auto stored = mapping_from_json(read_json_file(mapping));

  const auto out = dir / "eval";
  auto r = cli({"--out", out.string(), "evaluate", mapping});
  REQUIRE(r.code == kExitOk);
  const auto report = lines(read_file(out / "report.csv"));
  REQUIRE(report.size() == 2);
  CHECK(report[1].rfind(fixed6(stored.report->latency_us) + ",", 0) == 0);

  const auto pic = dir / "pic";
  r = cli({"--out", pic.string(), "render", mapping, "--heat"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == read_file(pic / "mapping.txt"));
  const auto svg = read_file(pic / "mapping.svg");
  CHECK(svg.find("data-max-load=\"" + std::to_string(stored.report->max_link_load) + "\"") != std::string::npos);
  REQUIRE(cli({"--out", pic.string(), "render", mapping, "--heat"}).code == kExitOk);
  CHECK(read_file(pic / "mapping.svg") == svg);

  auto broken = read_json_file(mapping);
  broken["partitioning"]["extra"][0] = 99;
  write_text_file(dir / "broken.json", dump_json(broken));
  r = cli({"render", (dir / "broken.json").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("partitioning") != std::string::npos);
  CHECK(cli({"evaluate", (dir / "absent.json").string()}).code == kExitIo);
}

TEST_CASE("ablations") {
  const auto dir = scratch("ablate");
  const auto config = small_config(dir);
  auto r = cli({"--config", config.string(), "--out", (dir / "lam").string(), "--trials", "2", "ablate", "lambdas",
                "--budget", "20"});
  REQUIRE(r.code == kExitOk);
  CHECK(lines(read_file(dir / "lam" / "summary.csv")).size() == 10);
  CHECK(fs::exists(dir / "lam" / "part8_place1" / "trial_1.csv"));

  r = cli({"--config", config.string(), "--out", (dir / "eli").string(), "--trials", "2", "ablate", "elitism"});
  REQUIRE(r.code == kExitOk);
  const auto runs = lines(read_file(dir / "eli" / "runs.csv"));
  REQUIRE(runs.size() == 5);
  // Paired arms use the same seeds.
  CHECK(runs[1].substr(runs[1].find(',')).substr(0, 5) == runs[3].substr(runs[3].find(',')).substr(0, 5));
  CHECK(lines(read_file(dir / "eli" / "non_elitist" / "trial_0.csv")).size() == 26);

  r = cli({"--config", config.string(), "--out", (dir / "var").string(), "ablate", "variance"});
  REQUIRE(r.code == kExitOk);
  CHECK(lines(read_file(dir / "var" / "variance.csv")).size() == 51);

  r = cli({"--config", config.string(), "--out", (dir / "reo").string(), "--trials", "1", "ablate", "reordering"});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir / "reo" / "reordering_off" / "trial_0.csv"));
}

TEST_CASE("output directory that cannot be created is an i/o error") {
  const auto dir = scratch("blocked");
  write_text_file(dir / "file", "x");
  CHECK(cli({"--config", small_config(dir).string(), "--out", (dir / "file" / "sub").string(), "optimize"}).code ==
        kExitIo);
}
