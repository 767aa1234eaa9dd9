#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "meshmap/errors.hpp"
#include "meshmap/heuristics.hpp"
#include "meshmap/io.hpp"
#include "meshmap/render.hpp"
#include "support.hpp"

using namespace meshmap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("meshmap_io_" + name);
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

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("architecture round trip and presets") {
  auto spec = default_architecture_spec(2);
  spec.rates.link_bandwidth = 123.0;
  const auto back = architecture_from_json(to_json(spec), "architecture");
  CHECK(to_json(back) == to_json(spec));
  CHECK(Architecture(back).core_count() == 304);

  const auto preset = architecture_from_json(Json{{"preset", "default"}, {"chips", 2}}, "architecture");
  CHECK(Architecture(preset).core_count() == 304);
  CHECK(field_of([] { architecture_from_json(Json{{"preset", "tiny"}}, "architecture"); }) == "architecture.preset");
}

TEST_CASE("unknown fields are rejected with their path") {
  CHECK(field_of([] { architecture_from_json(Json{{"mesh_width", 2}, {"colour", 1}}, "architecture"); }) ==
        "architecture.colour");
  CHECK(field_of([] {
          architecture_from_json(Json{{"rates", {{"link_bandwith", 1.0}}}}, "architecture");
        }) == "architecture.rates.link_bandwith");
  CHECK(field_of([] {
          workload_from_json(Json{{"input_size", 4}, {"layers", Json::array({{{"neurons", 4}, {"sparsity", 0.1}}})}},
                             "workload");
        }) == "workload.layers[0].sparsity");
  CHECK(field_of([] { architecture_from_json(Json{{"mesh_width", "wide"}}, "architecture"); }) ==
        "architecture.mesh_width");
}

TEST_CASE("workload files and presets") {
  const auto w = test::chain(16, {8, 4}, 0.25, 0.5);
  const auto back = workload_from_json(to_json(w), "workload");
  CHECK(to_json(back) == to_json(w));
  CHECK(back.layers[1].fan_in == 8);

  const auto mlp = workload_from_json(Json{{"preset", "sparsemlp-2"}}, "workload");
  CHECK(mlp.layers.size() == 12);
  const auto custom = workload_from_json(Json{{"preset", "sparsemlp-1"}, {"hidden", {512, 512}}}, "workload");
  CHECK(custom.layers.size() == 3);
  CHECK(field_of([] { workload_from_json(Json{{"layers", Json::array()}}, "workload"); }) == "workload.input_size");
}

TEST_CASE("mapping files round trip and are checked") {
  const MappingProblem p(test::chain(16, {20, 12}, 0.5, 0.3), test::mesh(2, 2, 4));
  Rng rng(1);
  const auto m = build_mapping(test::genotype({1, 2}, p.spare_cores() - 3), random_placement(p.arch, rng), p);
  const auto report = evaluate(p, m, p.arch.rates());
  const auto j = mapping_to_json(p, m, report);
  const auto f = mapping_from_json(j);
  CHECK(f.partitioning == m.partitioning);
  CHECK(f.placement == m.placement);
  REQUIRE(f.report.has_value());
  CHECK(f.report->latency_us == report.latency_us);
  CHECK(dump_json(mapping_to_json(p, m, report)) == dump_json(j));

  auto bad = j;
  bad["layers"][0]["cores"][0] = bad["layers"][1]["cores"][0];
  CHECK(field_of([&] { mapping_from_json(bad); }) == "layers[0].cores");
  bad = j;
  bad["partitioning"]["unused"] = 0;
  CHECK(field_of([&] { mapping_from_json(bad); }) == "partitioning");
  bad = j;
  bad["placement"][1] = bad["placement"][0];
  CHECK(field_of([&] { mapping_from_json(bad); }) == "placement");
  bad = j;
  bad["extra_field"] = 1;
  CHECK(field_of([&] { mapping_from_json(bad); }) == "extra_field");
  bad = j;
  bad["placement"][0] = Json::array({0, 9, 9, 1});
  CHECK(field_of([&] { mapping_from_json(bad); }) == "placement[0]");
}

TEST_CASE("run config sections") {
  const auto dir = scratch("config");
  write_text_file(dir / "arch.json", dump_json(Json{{"preset", "default"}, {"chips", 2}}));
  const Json j = {{"architecture", "arch.json"},
                  {"workload", {{"preset", "sparsemlp-2"}}},
                  {"es", {{"budget", 60}, {"seed", 7}, {"strategy", "chipwise"}, {"lambda_part", 2}}},
                  {"operators", {{"placement", {{"alpha", 0.5}}}}},
                  {"model", {{"rates", {{"link_bandwidth", 99.0}}}, {"noise", {{"sigma", 0.01}}}}}};
  write_text_file(dir / "run.json", dump_json(j));
  const auto c = load_run_config(dir / "run.json");
  CHECK(c.architecture.chips == 2);
  CHECK(c.architecture.rates.link_bandwidth == 99.0);
  CHECK(c.architecture.rates.synops_rate == ModelRates{}.synops_rate);
  CHECK(c.es.budget == 60);
  CHECK(c.es.seed == 7);
  CHECK(c.es.lambda_part == 2);
  CHECK(c.es.strategy == Strategy::chipwise);
  CHECK(c.es.placement_ops.alpha == 0.5);
  CHECK(c.es.noise.sigma == 0.01);
  CHECK(c.workload.layers.size() == 12);

  // The echo is self-contained and loads back to the same values.
  const auto echo = to_json(c);
  const auto again = run_config_from_json(echo, dir);
  CHECK(to_json(again) == echo);

  const auto defaults = run_config_from_json(Json::object(), dir);
  CHECK(defaults.workload.layers.size() == 6);
  CHECK(defaults.es.budget == 125);

  CHECK(field_of([&] { run_config_from_json(Json{{"es", {{"budget", 3}}}}, dir); }) == "es.budget");
  CHECK(field_of([&] { run_config_from_json(Json{{"es", {{"strategy", "x"}}}}, dir); }) == "es.strategy");
  CHECK(field_of([&] { run_config_from_json(Json{{"model", {{"noise", {{"sigma", 0.5}}}}}}, dir); }) ==
        "model.noise.sigma");
  CHECK_THROWS_AS(run_config_from_json(Json{{"workload", "missing.json"}}, dir), IoError);
}

TEST_CASE("file helpers report io and parse errors") {
  const auto dir = scratch("files");
  CHECK_THROWS_AS(read_json_file(dir / "nope.json"), IoError);
  write_text_file(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(read_json_file(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(write_text_file(dir / "no" / "such" / "dir" / "x.txt", "x"), IoError);
}

TEST_CASE("trace csv") {
  const std::vector<TraceEvent> events{{0, 0, TraceLevel::init, 12.5, true, 12.5},
                                       {1, 1, TraceLevel::partitioning, 1.0 / 3.0, false, 12.5}};
  CHECK(trace_csv(events) ==
        "eval_index,generation,level,latency_us,accepted,best_so_far_us\n"
        "0,0,init,12.500000,1,12.500000\n"
        "1,1,partitioning,0.333333,0,12.500000\n");

  const auto dir = scratch("trace");
  {
    TraceCsvWriter w(dir / "trace.csv");
    w.write(events[0]);
    // Flushed per event: readable before the writer closes.
    CHECK(read_file(dir / "trace.csv") == trace_csv({events[0]}));
    w.write(events[1]);
  }
  CHECK(read_file(dir / "trace.csv") == trace_csv(events));
}

TEST_CASE("report csv") {
  FitnessReport r;
  r.latency_us = 20.0;
  r.stage_times = {1.0, 2.0, 3.0, 4.5};
  r.power_w = 1.25;
  r.energy_per_step_uj = 25.0;
  r.used_cores = 35;
  r.max_link_load = 900;
  CHECK(report_csv_header() ==
        "latency_us,synops_us,synmem_us,dendops_us,link_us,power_w,energy_per_step_uj,used_cores,max_link_load\n");
  CHECK(report_csv_row(r) == "20.000000,1.000000,2.000000,3.000000,4.500000,1.250000,25.000000,35,900\n");
  CHECK(fixed6(-0.0000004) == "-0.000000");
}

TEST_CASE("text and svg rendering of a single router") {
  auto s = test::mesh_spec(1, 1, 4);
  s.max_neurons_per_core = 5;
  const MappingProblem p(test::chain(1, {10}), Architecture(s));
  const auto m = build_mapping(test::genotype({0}, 2), identity_placement(p.arch), p);
  CHECK(render_text(p, m) == "chip 0\n 0 [00..]\n");
  const auto svg = render_svg(p, m);
  CHECK(count(svg, "class=\"used\"") == 2);
  CHECK(count(svg, "class=\"unused\"") == 2);
  CHECK(count(svg, "class=\"disabled\"") == 0);
  CHECK(svg == render_svg(p, m));
  CHECK(svg.find("L0:2") != std::string::npos);
}

TEST_CASE("rendering marks disabled slots") {
  const MappingProblem p(generate_sparse_mlp(sparse_mlp_preset("sparsemlp-1")),
                         Architecture(default_architecture_spec()));
  const auto m = build_mapping(min_plus_k(p, 2), identity_placement(p.arch), p);
  const auto svg = render_svg(p, m);
  CHECK(count(svg, "class=\"used\"") == 35);
  CHECK(count(svg, "class=\"unused\"") == 152 - 35);
  CHECK(count(svg, "class=\"disabled\"") == 8);
  const auto text = render_text(p, m);
  CHECK(text.find(" 0 [####]") != std::string::npos);
  CHECK(count(text, "#") == 8);
}

TEST_CASE("heat overlay maximum equals the report's max link load") {
  const MappingProblem p(generate_sparse_mlp(sparse_mlp_preset("sparsemlp-1")),
                         Architecture(default_architecture_spec()));
  Rng rng(4);
  const auto m = build_mapping(min_plus_k(p, 2), random_placement(p.arch, rng), p);
  const auto report = evaluate(p, m, p.arch.rates());
  const auto svg = render_svg(p, m, {true, 48});
  CHECK(svg.find("data-max-load=\"" + std::to_string(report.max_link_load) + "\"") != std::string::npos);
  CHECK(svg.find("data-load=\"" + std::to_string(report.max_link_load) + "\"") != std::string::npos);
  std::int64_t largest = 0;
  for (auto pos = svg.find("data-load=\""); pos != std::string::npos; pos = svg.find("data-load=\"", pos + 1))
    largest = std::max<std::int64_t>(largest, std::stoll(svg.substr(pos + 11)));
  CHECK(largest == report.max_link_load);
}
