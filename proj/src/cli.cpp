#include "meshmap/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "meshmap/errors.hpp"
#include "meshmap/heuristics.hpp"
#include "meshmap/io.hpp"
#include "meshmap/render.hpp"

namespace fs = std::filesystem;

namespace meshmap {

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int trials = 0;  // 0: subcommand default
  std::string workload;
  int chips = 0;
  std::int64_t budget = 0;
  std::string strategy;
  int k = -1;
  unsigned threads = 0;  // 0: hardware concurrency
  bool heat = false;
  int samples = 50;
  std::vector<std::int64_t> hidden;
  std::string name;  // generate: preset name
  std::string mapping;
  std::string ablation;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Requested thread count capped by MESHMAP_THREADS.
unsigned effective_threads(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MESHMAP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw ConfigError("must be a positive integer", "MESHMAP_THREADS");
    n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

Workload workload_argument(const std::string& value) {
  if (fs::exists(value)) return workload_from_json(read_json_file(value), "workload");
  return workload_from_json(Json{{"preset", value}}, "workload");
}

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? run_config_from_json(Json::object(), fs::current_path()) : load_run_config(o.config);
  if (!o.workload.empty()) c.workload = workload_argument(o.workload);
  if (o.chips > 0) {
    const auto rates = c.architecture.rates;
    c.architecture = default_architecture_spec(o.chips);
    c.architecture.rates = rates;
  }
  if (o.seed_set) c.es.seed = o.seed;
  if (o.budget > 0) c.es.budget = o.budget;
  if (!o.strategy.empty()) c.es.strategy = parse_strategy(o.strategy);
  if (o.k >= 0) c.es.k_init = o.k;
  c.es.threads = effective_threads(o.threads);
  c.es.validate();
  return c;
}

fs::path output_dir(const Options& o, const char* fallback) {
  fs::path dir = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string stage_summary(const FitnessReport& r) {
  std::ostringstream s;
  s << "latency_us " << fixed6(r.latency_us) << "\n"
    << "  synops_us " << fixed6(r.stage_times.synops_us) << "\n"
    << "  synmem_us " << fixed6(r.stage_times.synmem_us) << "\n"
    << "  dendops_us " << fixed6(r.stage_times.dendops_us) << "\n"
    << "  link_us " << fixed6(r.stage_times.link_us) << "\n"
    << "power_w " << fixed6(r.power_w) << "\n"
    << "energy_per_step_uj " << fixed6(r.energy_per_step_uj) << "\n"
    << "used_cores " << r.used_cores << "\n"
    << "max_link_load " << r.max_link_load << "\n";
  return s.str();
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  MlpSpec spec;
  try {
    spec = sparse_mlp_preset(o.name);
  } catch (const ConfigError&) {
    err << "unknown workload '" << o.name << "'; expected sparsemlp-1 or sparsemlp-2\n";
    return kExitUsage;
  }
  if (!o.hidden.empty()) spec.hidden = o.hidden;
  const auto w = generate_sparse_mlp(spec);
  std::int64_t nonzero = 0;
  for (const auto& l : w.layers) nonzero += nonzero_synapses(l);
  std::ostringstream summary;
  summary << w.name << ": " << w.layers.size() << " layers, " << dense_parameter_count(w) << " dense parameters, "
          << nonzero << " nonzero synapses\n";
  if (o.out.empty()) {
    out << dump_json(to_json(w));
    err << summary.str();
  } else {
    const auto dir = output_dir(o, ".");
    const auto file = dir / (o.name + ".json");
    write_text_file(file, dump_json(to_json(w)));
    out << summary.str() << "wrote " << file.string() << "\n";
  }
  return kExitOk;
}

struct Row {
  std::string name;
  FitnessReport report;
};

int cmd_heuristics(const Options& o, std::ostream& out) {
  const auto c = load_config(o);
  const MappingProblem p(c.workload, Architecture(c.architecture));
  const auto x = min_plus_k(p, c.es.k_init);
  std::vector<std::pair<std::string, PlacementGenotype>> candidates;
  for (const auto& h : standard_heuristics()) candidates.emplace_back(h.name(), heuristic_placement(h, p.arch));
  Rng rng(Rng::derive(c.es.seed, std::uint64_t{0}));
  candidates.emplace_back("random", random_placement(p.arch, rng));

  std::vector<Row> rows;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto m = build_mapping(x, candidates[i].second, p);
    rows.push_back({candidates[i].first,
                    evaluate(p, m, p.arch.rates(), c.es.noise, Rng::derive(c.es.seed, {3, i}))});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.report.latency_us < b.report.latency_us; });

  std::ostringstream csv;
  csv << "rank,placement," << report_csv_header();
  out << "workload " << p.workload.name << ", min+" << c.es.k_init << " (" << x.total_extra() + p.c_min
      << " of " << p.total_cores() << " cores)\n";
  out << std::left << std::setw(6) << "rank" << std::setw(24) << "placement" << std::right << std::setw(14)
      << "latency_us" << std::setw(12) << "synops" << std::setw(12) << "synmem" << std::setw(12) << "dendops"
      << std::setw(12) << "link" << std::setw(12) << "power_w" << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    out << std::left << std::setw(6) << i + 1 << std::setw(24) << rows[i].name << std::right << std::setw(14)
        << fixed6(r.latency_us) << std::setw(12) << fixed6(r.stage_times.synops_us) << std::setw(12)
        << fixed6(r.stage_times.synmem_us) << std::setw(12) << fixed6(r.stage_times.dendops_us) << std::setw(12)
        << fixed6(r.stage_times.link_us) << std::setw(12) << fixed6(r.power_w) << "\n";
    csv << i + 1 << ',' << rows[i].name << ',' << report_csv_row(r);
  }
  if (!o.out.empty()) write_text_file(output_dir(o, ".") / "heuristics.csv", csv.str());
  return kExitOk;
}

std::string run_summary(const MappingProblem& p, const RunResult& r) {
  std::ostringstream s;
  s << "workload " << p.workload.name << "\n"
    << "strategy " << to_string(r.config.strategy) << "\n"
    << "seed " << r.config.seed << "\n"
    << "budget " << r.config.budget << "\n"
    << "trace_events " << r.trace.size() << "\n"
    << "c_min " << p.c_min << "\n"
    << "extra_cores";
  for (int e : r.best_mapping.partitioning.extra) s << ' ' << e;
  s << "\nunused_cores " << r.best_mapping.partitioning.unused << "\n";
  s << stage_summary(r.best_report);
  s << "partitioning_generations " << r.partitioning_generations << "\n"
    << "stalled_partitioning_generations " << r.stalled_partitioning_generations << "\n";
  for (const auto& w : r.warnings) s << "warning " << w << "\n";
  return s.str();
}

// Runs one seeded trial, streaming the trace to `dir`/trace.csv.
RunResult run_trial(const MappingProblem& p, const EsConfig& es, const fs::path& dir) {
  TraceCsvWriter trace(dir / "trace.csv");
  auto result = run_strategy(p, es, [&trace](const TraceEvent& e) { trace.write(e); });
  write_text_file(dir / "best_mapping.json", dump_json(mapping_to_json(p, result.best_mapping, result.best_report)));
  write_text_file(dir / "summary.txt", run_summary(p, result));
  return result;
}

// eval_index, then min/mean/max of best_so_far_us and mean candidate latency.
std::string aggregate_csv(const std::vector<std::vector<TraceEvent>>& traces) {
  std::ostringstream s;
  s << "eval_index,min_best_so_far_us,mean_best_so_far_us,max_best_so_far_us,mean_latency_us\n";
  std::size_t rows = traces.empty() ? 0 : traces.front().size();
  for (const auto& t : traces) rows = std::min(rows, t.size());
  for (std::size_t i = 0; i < rows; ++i) {
    double lo = INFINITY, hi = -INFINITY, sum = 0.0, lat = 0.0;
    for (const auto& t : traces) {
      lo = std::min(lo, t[i].best_so_far_us);
      hi = std::max(hi, t[i].best_so_far_us);
      sum += t[i].best_so_far_us;
      lat += t[i].latency_us;
    }
    const auto n = static_cast<double>(traces.size());
    s << traces.front()[i].eval_index << ',' << fixed6(lo) << ',' << fixed6(sum / n) << ',' << fixed6(hi) << ','
      << fixed6(lat / n) << '\n';
  }
  return s.str();
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const auto started = timestamp();
  const auto c = load_config(o);
  const MappingProblem p(c.workload, Architecture(c.architecture));
  const auto dir = output_dir(o, "meshmap_out");
  const int trials = std::max(1, o.trials);
  write_text_file(dir / "config.json", dump_json(to_json(c)));

  std::vector<std::vector<TraceEvent>> traces;
  std::ostringstream table;
  table << "trial,seed," << report_csv_header();
  for (int t = 0; t < trials; ++t) {
    EsConfig es = c.es;
    es.seed = c.es.seed + static_cast<std::uint64_t>(t);
    fs::path trial_dir = dir;
    if (trials > 1) {
      trial_dir = dir / ("trial_" + std::to_string(t));
      fs::create_directories(trial_dir);
    }
    const auto r = run_trial(p, es, trial_dir);
    out << "trial " << t << " seed " << es.seed << ": best latency " << fixed6(r.best_report.latency_us) << " us, "
        << r.best_report.used_cores << " cores\n";
    for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
    table << t << ',' << es.seed << ',' << report_csv_row(r.best_report);
    traces.push_back(r.trace);
  }
  write_text_file(dir / "trials.csv", table.str());
  write_text_file(dir / "aggregate.csv", aggregate_csv(traces));

  Json manifest = {{"config_path", o.config},
                   {"output_dir", dir.string()},
                   {"started", started},
                   {"finished", timestamp()},
                   {"tool_version", kToolVersion},
                   {"seed", c.es.seed},
                   {"trials", trials},
                   {"threads", c.es.threads}};
  write_text_file(dir / "manifest.json", dump_json(manifest));
  out << "outputs in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto file = mapping_from_json(read_json_file(o.mapping));
  ModelRates rates = file.architecture.rates;
  NoiseConfig noise;
  std::uint64_t seed = o.seed;
  if (!o.config.empty()) {
    const auto c = load_run_config(o.config);
    rates = c.architecture.rates;
    noise = c.es.noise;
    if (!o.seed_set) seed = c.es.seed;
  }
  const MappingProblem p(file.workload, Architecture(file.architecture));
  const auto m = build_mapping(file.partitioning, file.placement, p);
  const auto r = evaluate(p, m, rates, noise, seed);
  out << "workload " << p.workload.name << "\n" << stage_summary(r);
  if (!o.out.empty()) {
    const auto dir = output_dir(o, ".");
    write_text_file(dir / "report.csv", report_csv_header() + report_csv_row(r));
    write_text_file(dir / "report.json", dump_json(to_json(r)));
  }
  return kExitOk;
}

int cmd_render(const Options& o, std::ostream& out) {
  const auto file = mapping_from_json(read_json_file(o.mapping));
  const MappingProblem p(file.workload, Architecture(file.architecture));
  const auto m = build_mapping(file.partitioning, file.placement, p);
  const auto text = render_text(p, m);
  out << text;
  if (!o.out.empty()) {
    const auto dir = output_dir(o, ".");
    RenderOptions ro;
    ro.heat = o.heat;
    write_text_file(dir / "mapping.svg", render_svg(p, m, ro));
    write_text_file(dir / "mapping.txt", text);
  }
  return kExitOk;
}

struct Arm {
  std::string name;
  EsConfig es;
};

int cmd_ablate(const Options& o, std::ostream& out) {
  const auto c = load_config(o);
  const MappingProblem p(c.workload, Architecture(c.architecture));
  const auto dir = output_dir(o, "meshmap_ablate");
  write_text_file(dir / "config.json", dump_json(to_json(c)));

  if (o.ablation == "variance") {
    const auto x = min_plus_k(p, c.es.k_init);
    std::ostringstream csv;
    csv << "sample," << report_csv_header();
    std::vector<double> lat;
    for (int i = 0; i < o.samples; ++i) {
      Rng rng(Rng::derive(c.es.seed, {5, static_cast<std::uint64_t>(i)}));
      const auto m = build_mapping(x, random_placement(p.arch, rng), p);
      const auto r = evaluate(p, m, p.arch.rates(), c.es.noise, Rng::derive(c.es.seed, {3, static_cast<std::uint64_t>(i)}));
      lat.push_back(r.latency_us);
      csv << i << ',' << report_csv_row(r);
    }
    write_text_file(dir / "variance.csv", csv.str());
    const double mean = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
    double var = 0.0;
    for (double v : lat) var += (v - mean) * (v - mean);
    const double sd = lat.size() > 1 ? std::sqrt(var / static_cast<double>(lat.size() - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(lat.begin(), lat.end());
    std::ostringstream s;
    s << "samples,mean_latency_us,std_latency_us,min_latency_us,max_latency_us\n"
      << lat.size() << ',' << fixed6(mean) << ',' << fixed6(sd) << ',' << fixed6(*lo) << ',' << fixed6(*hi) << '\n';
    write_text_file(dir / "summary.csv", s.str());
    out << lat.size() << " random placements of min+" << c.es.k_init << ": mean " << fixed6(mean) << " us, sd "
        << fixed6(sd) << ", min " << fixed6(*lo) << ", max " << fixed6(*hi) << "\n";
    return kExitOk;
  }

  std::vector<Arm> arms;
  if (o.ablation == "reordering") {
    arms = {{"reordering_on", c.es}, {"reordering_off", c.es}};
    arms[0].es.use_reordering = true;
    arms[1].es.use_reordering = false;
  } else if (o.ablation == "elitism") {
    arms = {{"elitist", c.es}, {"non_elitist", c.es}};
    arms[0].es.elitist_partitioning = true;
    arms[1].es.elitist_partitioning = false;
  } else {
    for (int lp : {1, 4, 8}) {
      for (int ll : {1, 4, 8}) {
        Arm a{"part" + std::to_string(lp) + "_place" + std::to_string(ll), c.es};
        a.es.lambda_part = lp;
        a.es.lambda_place = ll;
        a.es.validate();
        arms.push_back(a);
      }
    }
  }

  const int trials = o.trials > 0 ? o.trials : 5;
  std::ostringstream runs, agg;
  runs << "arm,trial,seed,final_latency_us,partitioning_generations,stalled_generations,stalled_fraction\n";
  agg << "arm,trials,min_final_latency_us,mean_final_latency_us,max_final_latency_us,mean_stalled_fraction\n";
  out << std::left << std::setw(20) << "arm" << std::right << std::setw(14) << "mean_us" << std::setw(14) << "min_us"
      << std::setw(14) << "max_us" << std::setw(12) << "stalled" << "\n";
  for (const auto& arm : arms) {
    const auto arm_dir = dir / arm.name;
    fs::create_directories(arm_dir);
    std::vector<double> finals, stalled;
    std::vector<std::vector<TraceEvent>> traces;
    for (int t = 0; t < trials; ++t) {
      EsConfig es = arm.es;
      es.seed = c.es.seed + static_cast<std::uint64_t>(t);
      const auto r = run_strategy(p, es);
      write_text_file(arm_dir / ("trial_" + std::to_string(t) + ".csv"), trace_csv(r.trace));
      const double frac = r.partitioning_generations > 0
                              ? static_cast<double>(r.stalled_partitioning_generations) / r.partitioning_generations
                              : 0.0;
      finals.push_back(r.best_report.latency_us);
      stalled.push_back(frac);
      traces.push_back(r.trace);
      runs << arm.name << ',' << t << ',' << es.seed << ',' << fixed6(r.best_report.latency_us) << ','
           << r.partitioning_generations << ',' << r.stalled_partitioning_generations << ',' << fixed6(frac) << '\n';
    }
    write_text_file(arm_dir / "aggregate.csv", aggregate_csv(traces));
    const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / trials;
    const double mean_stalled = std::accumulate(stalled.begin(), stalled.end(), 0.0) / trials;
    const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
    agg << arm.name << ',' << trials << ',' << fixed6(*lo) << ',' << fixed6(mean) << ',' << fixed6(*hi) << ','
        << fixed6(mean_stalled) << '\n';
    out << std::left << std::setw(20) << arm.name << std::right << std::setw(14) << fixed6(mean) << std::setw(14)
        << fixed6(*lo) << std::setw(14) << fixed6(*hi) << std::setw(12) << fixed6(mean_stalled) << "\n";
  }
  write_text_file(dir / "runs.csv", runs.str());
  write_text_file(dir / "summary.csv", agg.str());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Partitioning and placement of layered sparse networks on 2D-mesh accelerators", "meshmap"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "Run configuration (JSON)");
  auto* seed = app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--trials", o.trials, "Number of seeded trials")->check(CLI::PositiveNumber);

  auto add_problem_flags = [&](CLI::App* sub) {
    sub->add_option("--workload", o.workload, "Workload file or preset (sparsemlp-1, sparsemlp-2)");
    sub->add_option("--chips", o.chips, "Use the default chip replicated N times")->check(CLI::PositiveNumber);
    sub->add_option("--k", o.k, "Extra cores per layer for min+k")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "Concurrent evaluations (capped by MESHMAP_THREADS)");
  };

  auto* generate = app.add_subcommand("generate", "Write a SparseMLP workload file");
  generate->add_option("name", o.name, "sparsemlp-1 or sparsemlp-2")->required();
  generate->add_option("--hidden", o.hidden, "Hidden layer sizes");

  auto* heuristics = app.add_subcommand("heuristics", "Rank the placement heuristics and a random placement");
  add_problem_flags(heuristics);

  auto* optimize = app.add_subcommand("optimize", "Run the nested evolution strategy");
  add_problem_flags(optimize);
  optimize->add_option("--budget", o.budget, "Fitness evaluations per trial")->check(CLI::PositiveNumber);
  optimize->add_option("--strategy", o.strategy, "single, global or chipwise")
      ->check(CLI::IsMember({"single", "global", "chipwise"}));

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a mapping file");
  evaluate_cmd->add_option("mapping", o.mapping, "Mapping file")->required();

  auto* render = app.add_subcommand("render", "Draw a mapping file as SVG and text");
  render->add_option("mapping", o.mapping, "Mapping file")->required();
  render->add_flag("--heat", o.heat, "Overlay per-link load");

  auto* ablate = app.add_subcommand("ablate", "Paired ablation runs");
  ablate->add_option("which", o.ablation, "reordering, elitism, lambdas or variance")
      ->required()
      ->check(CLI::IsMember({"reordering", "elitism", "lambdas", "variance"}));
  add_problem_flags(ablate);
  ablate->add_option("--budget", o.budget, "Fitness evaluations per trial")->check(CLI::PositiveNumber);
  ablate->add_option("--samples", o.samples, "Random placements for the variance study")->check(CLI::PositiveNumber);
  ablate->add_option("--strategy", o.strategy, "single, global or chipwise")
      ->check(CLI::IsMember({"single", "global", "chipwise"}));

  std::vector<const char*> argv{"meshmap"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  o.seed_set = seed->count() > 0;

  try {
    if (*generate) return cmd_generate(o, out, err);
    if (*heuristics) return cmd_heuristics(o, out);
    if (*optimize) return cmd_optimize(o, out);
    if (*evaluate_cmd) return cmd_evaluate(o, out);
    if (*render) return cmd_render(o, out);
    if (*ablate) return cmd_ablate(o, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GenotypeError& e) {
    err << "invalid mapping: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace meshmap
