#include "meshmap/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "meshmap/errors.hpp"

namespace meshmap {

namespace {

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::string index_path(const std::string& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

// Strict reader over one JSON object: typed lookups with path-qualified
// errors, and finish() rejects every key that was never asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError("expected an object", where_.empty() ? "<root>" : where_);
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(where_, key); }

  const Json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    const Json* v = child(key);
    if (!v) return false;
    out = convert<T>(*v, path(key));
    return true;
  }

  template <typename T>
  T require(const std::string& key) {
    T out{};
    if (!get(key, out)) throw ConfigError("missing required field", path(key));
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown field", path(item.key()));
    }
  }

  template <typename T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("expected a boolean", where);
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer", where);
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<std::int64_t>() < 0) throw ConfigError("expected a nonnegative integer", where);
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("expected a number", where);
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("expected a string", where);
      return v.get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const Json& require_array(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("expected an array", where);
  return v;
}

Json location_json(const CoreLocation& loc) { return Json::array({loc.chip, loc.x, loc.y, loc.c}); }

CoreLocation location_from_json(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw ConfigError("expected [chip, x, y, c]", where);
  CoreLocation loc;
  loc.chip = ObjectReader::convert<int>(v[0], where);
  loc.x = ObjectReader::convert<int>(v[1], where);
  loc.y = ObjectReader::convert<int>(v[2], where);
  loc.c = ObjectReader::convert<int>(v[3], where);
  return loc;
}

FitnessReport report_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  FitnessReport out;
  r.get("latency_us", out.latency_us);
  r.get("power_w", out.power_w);
  r.get("energy_per_step_uj", out.energy_per_step_uj);
  r.get("used_cores", out.used_cores);
  r.get("max_link_load", out.max_link_load);
  r.get("evaluation_seed", out.evaluation_seed);
  r.get("noise_factor", out.noise_factor);
  if (const Json* st = r.child("stage_times")) {
    ObjectReader s(*st, r.path("stage_times"));
    s.get("synops_us", out.stage_times.synops_us);
    s.get("synmem_us", out.stage_times.synmem_us);
    s.get("dendops_us", out.stage_times.dendops_us);
    s.get("link_us", out.stage_times.link_us);
    s.finish();
  }
  r.finish();
  return out;
}

NoiseConfig noise_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  NoiseConfig n;
  r.get("sigma", n.sigma);
  r.finish();
  return n;
}

void operators_from_json(const Json& j, const std::string& where, EsConfig& es) {
  ObjectReader r(j, where);
  if (const Json* p = r.child("partitioning")) {
    ObjectReader o(*p, r.path("partitioning"));
    o.get("p_mut", es.partition_ops.p_mut);
    o.get("p_add", es.partition_ops.p_add);
    o.get("delta_max", es.partition_ops.delta_max);
    o.finish();
  }
  if (const Json* p = r.child("placement")) {
    ObjectReader o(*p, r.path("placement"));
    o.get("p_swap", es.placement_ops.p_swap);
    o.get("p_inverse", es.placement_ops.p_inverse);
    o.get("alpha", es.placement_ops.alpha);
    o.finish();
  }
  r.finish();
}

void es_from_json(const Json& j, const std::string& where, EsConfig& es) {
  ObjectReader r(j, where);
  r.get("lambda_part", es.lambda_part);
  r.get("lambda_place", es.lambda_place);
  r.get("budget", es.budget);
  r.get("elitist_partitioning", es.elitist_partitioning);
  r.get("use_reordering", es.use_reordering);
  r.get("charge_init_to_budget", es.charge_init_to_budget);
  r.get("seed", es.seed);
  r.get("k_init", es.k_init);
  r.get("max_resample", es.max_resample);
  std::string strategy;
  if (r.get("strategy", strategy)) {
    try {
      es.strategy = parse_strategy(strategy);
    } catch (const ConfigError& e) {
      throw ConfigError("unknown strategy '" + strategy + "'", r.path("strategy"));
    }
  }
  r.finish();
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), path.string());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

Json to_json(const ModelRates& r) {
  return {{"synops_rate", r.synops_rate},
          {"synmem_rate", r.synmem_rate},
          {"dendops_rate", r.dendops_rate},
          {"link_bandwidth", r.link_bandwidth},
          {"interchip_bandwidth", r.interchip_bandwidth},
          {"barrier_overhead_us", r.barrier_overhead_us},
          {"axon_row_words", r.axon_row_words},
          {"static_power_per_core_w", r.static_power_per_core_w},
          {"chip_idle_power_w", r.chip_idle_power_w},
          {"e_synop_j", r.e_synop_j},
          {"e_packet_hop_j", r.e_packet_hop_j},
          {"e_neuron_update_j", r.e_neuron_update_j}};
}

ModelRates rates_from_json(const Json& j, const std::string& where, ModelRates base) {
  ObjectReader r(j, where);
  r.get("synops_rate", base.synops_rate);
  r.get("synmem_rate", base.synmem_rate);
  r.get("dendops_rate", base.dendops_rate);
  r.get("link_bandwidth", base.link_bandwidth);
  r.get("interchip_bandwidth", base.interchip_bandwidth);
  r.get("barrier_overhead_us", base.barrier_overhead_us);
  r.get("axon_row_words", base.axon_row_words);
  r.get("static_power_per_core_w", base.static_power_per_core_w);
  r.get("chip_idle_power_w", base.chip_idle_power_w);
  r.get("e_synop_j", base.e_synop_j);
  r.get("e_packet_hop_j", base.e_packet_hop_j);
  r.get("e_neuron_update_j", base.e_neuron_update_j);
  r.finish();
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), where);
  }
  return base;
}

Json to_json(const ArchitectureSpec& spec) {
  Json disabled = Json::array();
  for (const auto& d : spec.disabled_cores) disabled.push_back(location_json(d));
  Json links = Json::array();
  for (const auto& l : spec.interchip_links) {
    links.push_back({{"chip_a", l.chip_a}, {"x_a", l.x_a}, {"y_a", l.y_a},
                     {"chip_b", l.chip_b}, {"x_b", l.x_b}, {"y_b", l.y_b}});
  }
  return {{"chips", spec.chips},
          {"mesh_width", spec.mesh_width},
          {"mesh_height", spec.mesh_height},
          {"cores_per_router", spec.cores_per_router},
          {"disabled_cores", disabled},
          {"max_neurons_per_core", spec.max_neurons_per_core},
          {"core_memory_words", spec.core_memory_words},
          {"interchip_hop_penalty", spec.interchip_hop_penalty},
          {"rates", to_json(spec.rates)},
          {"interchip_links", links}};
}

ArchitectureSpec architecture_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ArchitectureSpec spec;
  std::string preset;
  if (r.get("preset", preset)) {
    if (preset != "default") throw ConfigError("unknown preset '" + preset + "' (default)", r.path("preset"));
    int chips = 1;
    r.get("chips", chips);
    if (chips < 1) throw ConfigError("must be >= 1", r.path("chips"));
    spec = default_architecture_spec(chips);
  }
  r.get("chips", spec.chips);
  r.get("mesh_width", spec.mesh_width);
  r.get("mesh_height", spec.mesh_height);
  r.get("cores_per_router", spec.cores_per_router);
  r.get("max_neurons_per_core", spec.max_neurons_per_core);
  r.get("core_memory_words", spec.core_memory_words);
  r.get("interchip_hop_penalty", spec.interchip_hop_penalty);
  if (const Json* d = r.child("disabled_cores")) {
    const auto path = r.path("disabled_cores");
    spec.disabled_cores.clear();
    for (std::size_t i = 0; i < require_array(*d, path).size(); ++i) {
      spec.disabled_cores.push_back(location_from_json((*d)[i], index_path(path, i)));
    }
  }
  if (const Json* rates = r.child("rates")) spec.rates = rates_from_json(*rates, r.path("rates"), spec.rates);
  if (const Json* links = r.child("interchip_links")) {
    const auto path = r.path("interchip_links");
    spec.interchip_links.clear();
    for (std::size_t i = 0; i < require_array(*links, path).size(); ++i) {
      ObjectReader l((*links)[i], index_path(path, i));
      InterchipLinkSpec s;
      s.chip_a = l.require<int>("chip_a");
      s.x_a = l.require<int>("x_a");
      s.y_a = l.require<int>("y_a");
      s.chip_b = l.require<int>("chip_b");
      s.x_b = l.require<int>("x_b");
      s.y_b = l.require<int>("y_b");
      l.finish();
      spec.interchip_links.push_back(s);
    }
  }
  r.finish();
  try {
    build_architecture(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), where);
  }
  return spec;
}

Json to_json(const Workload& w) {
  Json layers = Json::array();
  for (const auto& l : w.layers) {
    layers.push_back({{"neurons", l.neurons},
                      {"weight_sparsity", l.weight_sparsity},
                      {"activation_sparsity", l.activation_sparsity},
                      {"state_words_per_neuron", l.state_words_per_neuron},
                      {"weight_words_per_synapse", l.weight_words_per_synapse}});
  }
  return {{"name", w.name}, {"input_size", w.input_size}, {"input_activity", w.input_activity}, {"layers", layers}};
}

Workload workload_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  std::string preset;
  if (r.get("preset", preset)) {
    MlpSpec spec;
    try {
      spec = sparse_mlp_preset(preset);
    } catch (const ConfigError&) {
      throw ConfigError("unknown preset '" + preset + "' (sparsemlp-1, sparsemlp-2)", r.path("preset"));
    }
    r.get("name", spec.name);
    r.get("input_size", spec.input_size);
    r.get("output_size", spec.output_size);
    r.get("weight_sparsity", spec.weight_sparsity);
    r.get("first_activation_sparsity", spec.first_activation_sparsity);
    r.get("last_activation_sparsity", spec.last_activation_sparsity);
    r.get("input_activity", spec.input_activity);
    if (const Json* h = r.child("hidden")) {
      const auto path = r.path("hidden");
      spec.hidden.clear();
      for (std::size_t i = 0; i < require_array(*h, path).size(); ++i) {
        spec.hidden.push_back(ObjectReader::convert<std::int64_t>((*h)[i], index_path(path, i)));
      }
    }
    r.finish();
    try {
      return generate_sparse_mlp(spec);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), where);
    }
  }

  std::string name = "workload";
  r.get("name", name);
  const auto input_size = r.require<std::int64_t>("input_size");
  double input_activity = 1.0;
  r.get("input_activity", input_activity);
  const Json* layers = r.child("layers");
  if (!layers) throw ConfigError("missing required field", r.path("layers"));
  const auto path = r.path("layers");
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < require_array(*layers, path).size(); ++i) {
    ObjectReader l((*layers)[i], index_path(path, i));
    LayerSpec s;
    s.neurons = l.require<std::int64_t>("neurons");
    l.get("weight_sparsity", s.weight_sparsity);
    l.get("activation_sparsity", s.activation_sparsity);
    l.get("state_words_per_neuron", s.state_words_per_neuron);
    l.get("weight_words_per_synapse", s.weight_words_per_synapse);
    l.finish();
    specs.push_back(s);
  }
  r.finish();
  try {
    return make_workload(name, input_size, specs, input_activity);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), where);
  }
}

Json to_json(const FitnessReport& r) {
  return {{"latency_us", r.latency_us},
          {"stage_times",
           {{"synops_us", r.stage_times.synops_us},
            {"synmem_us", r.stage_times.synmem_us},
            {"dendops_us", r.stage_times.dendops_us},
            {"link_us", r.stage_times.link_us}}},
          {"power_w", r.power_w},
          {"energy_per_step_uj", r.energy_per_step_uj},
          {"used_cores", r.used_cores},
          {"max_link_load", r.max_link_load},
          {"evaluation_seed", r.evaluation_seed},
          {"noise_factor", r.noise_factor}};
}

Json to_json(const EsConfig& c) {
  return {{"lambda_part", c.lambda_part},
          {"lambda_place", c.lambda_place},
          {"budget", c.budget},
          {"elitist_partitioning", c.elitist_partitioning},
          {"use_reordering", c.use_reordering},
          {"charge_init_to_budget", c.charge_init_to_budget},
          {"seed", c.seed},
          {"k_init", c.k_init},
          {"max_resample", c.max_resample},
          {"strategy", to_string(c.strategy)}};
}

Json mapping_to_json(const MappingProblem& p, const Mapping& m, const std::optional<FitnessReport>& report) {
  Json placement = Json::array();
  for (auto id : m.placement.order) placement.push_back(location_json(p.arch.core(id)));
  Json layers = Json::array();
  for (std::size_t i = 0; i < m.layer_cores.size(); ++i) {
    Json cores = Json::array();
    for (auto id : m.layer_cores[i]) cores.push_back(location_json(p.arch.core(id)));
    layers.push_back({{"index", i}, {"min_cores", p.min_cores[i]}, {"cores", cores}});
  }
  Json unused = Json::array();
  for (auto id : m.unused_cores) unused.push_back(location_json(p.arch.core(id)));
  Json j = {{"architecture", to_json(p.arch.spec())},
            {"workload", to_json(p.workload)},
            {"partitioning", {{"extra", m.partitioning.extra}, {"unused", m.partitioning.unused}}},
            {"placement", placement},
            {"layers", layers},
            {"unused_cores", unused}};
  if (report) j["report"] = to_json(*report);
  return j;
}

MappingFile mapping_from_json(const Json& j) {
  ObjectReader r(j, "");
  MappingFile out;
  const Json* arch = r.child("architecture");
  if (!arch) throw ConfigError("missing required field", "architecture");
  out.architecture = architecture_from_json(*arch, "architecture");
  const Json* work = r.child("workload");
  if (!work) throw ConfigError("missing required field", "workload");
  out.workload = workload_from_json(*work, "workload");

  const Json* part = r.child("partitioning");
  if (!part) throw ConfigError("missing required field", "partitioning");
  {
    ObjectReader pr(*part, "partitioning");
    const Json* extra = pr.child("extra");
    if (!extra) throw ConfigError("missing required field", "partitioning.extra");
    for (std::size_t i = 0; i < require_array(*extra, "partitioning.extra").size(); ++i) {
      out.partitioning.extra.push_back(ObjectReader::convert<int>((*extra)[i], index_path("partitioning.extra", i)));
    }
    out.partitioning.unused = pr.require<int>("unused");
    pr.finish();
  }

  const Architecture a(out.architecture);
  const Json* placement = r.child("placement");
  if (!placement) throw ConfigError("missing required field", "placement");
  for (std::size_t i = 0; i < require_array(*placement, "placement").size(); ++i) {
    const auto where = index_path("placement", i);
    const auto id = a.find_core(location_from_json((*placement)[i], where));
    if (!id) throw ConfigError("not a usable core", where);
    out.placement.order.push_back(*id);
  }

  const MappingProblem problem(out.workload, a);
  const auto violations = validate(out.partitioning, out.placement, problem);
  for (const auto& v : violations) {
    const char* field = v.kind == ViolationKind::permutation ? "placement" : "partitioning";
    if (v.kind != ViolationKind::feasibility) throw ConfigError(v.message, field);
  }
  const auto mapping = build_mapping(out.partitioning, out.placement, problem);

  if (const Json* layers = r.child("layers")) {
    require_array(*layers, "layers");
    if (layers->size() != mapping.layer_cores.size()) throw ConfigError("layer count mismatch", "layers");
    for (std::size_t i = 0; i < layers->size(); ++i) {
      const auto where = index_path("layers", i);
      ObjectReader lr((*layers)[i], where);
      std::size_t index = i;
      lr.get("index", index);
      int min_cores = problem.min_cores[i];
      lr.get("min_cores", min_cores);
      if (index != i || min_cores != problem.min_cores[i]) throw ConfigError("inconsistent with the workload", where);
      if (const Json* cores = lr.child("cores")) {
        const auto cpath = where + ".cores";
        require_array(*cores, cpath);
        std::vector<CoreId> ids;
        for (std::size_t k = 0; k < cores->size(); ++k) {
          const auto id = a.find_core(location_from_json((*cores)[k], index_path(cpath, k)));
          if (!id) throw ConfigError("not a usable core", index_path(cpath, k));
          ids.push_back(*id);
        }
        if (ids != mapping.layer_cores[i]) throw ConfigError("does not match the genotypes", cpath);
      }
      lr.finish();
    }
  }
  if (const Json* unused = r.child("unused_cores")) {
    require_array(*unused, "unused_cores");
    std::vector<CoreId> ids;
    for (std::size_t k = 0; k < unused->size(); ++k) {
      const auto id = a.find_core(location_from_json((*unused)[k], index_path("unused_cores", k)));
      if (!id) throw ConfigError("not a usable core", index_path("unused_cores", k));
      ids.push_back(*id);
    }
    if (ids != mapping.unused_cores) throw ConfigError("does not match the genotypes", "unused_cores");
  }
  if (const Json* rep = r.child("report")) out.report = report_from_json(*rep, "report");
  r.finish();
  return out;
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ObjectReader r(j, "");
  RunConfig c;
  auto resolve = [&](const Json& v, const std::string& where) -> Json {
    if (!v.is_string()) return v;
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    try {
      return read_json_file(p);
    } catch (const IoError& e) {
      throw IoError(where + ": " + e.what());
    }
  };

  c.architecture = default_architecture_spec();
  if (const Json* a = r.child("architecture")) c.architecture = architecture_from_json(resolve(*a, "architecture"), "architecture");
  if (const Json* w = r.child("workload")) {
    c.workload = workload_from_json(resolve(*w, "workload"), "workload");
  } else {
    c.workload = generate_sparse_mlp(sparse_mlp_preset("sparsemlp-1"));
  }
  if (const Json* o = r.child("operators")) operators_from_json(*o, "operators", c.es);
  if (const Json* e = r.child("es")) es_from_json(*e, "es", c.es);
  if (const Json* m = r.child("model")) {
    ObjectReader mr(*m, "model");
    if (const Json* rates = mr.child("rates")) {
      c.architecture.rates = rates_from_json(*rates, "model.rates", c.architecture.rates);
    }
    if (const Json* noise = mr.child("noise")) c.es.noise = noise_from_json(*noise, "model.noise");
    mr.finish();
  }
  r.finish();
  c.es.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const RunConfig& c) {
  return {{"workload", to_json(c.workload)},
          {"architecture", to_json(c.architecture)},
          {"operators",
           {{"partitioning",
             {{"p_mut", c.es.partition_ops.p_mut},
              {"p_add", c.es.partition_ops.p_add},
              {"delta_max", c.es.partition_ops.delta_max}}},
            {"placement",
             {{"p_swap", c.es.placement_ops.p_swap},
              {"p_inverse", c.es.placement_ops.p_inverse},
              {"alpha", c.es.placement_ops.alpha}}}}},
          {"es", to_json(c.es)},
          {"model", {{"rates", to_json(c.architecture.rates)}, {"noise", {{"sigma", c.es.noise.sigma}}}}}};
}

std::string trace_csv_header() { return "eval_index,generation,level,latency_us,accepted,best_so_far_us\n"; }

std::string trace_csv_row(const TraceEvent& e) {
  std::ostringstream s;
  s << e.eval_index << ',' << e.generation << ',' << to_string(e.level) << ',' << fixed6(e.latency_us) << ','
    << (e.accepted ? 1 : 0) << ',' << fixed6(e.best_so_far_us) << '\n';
  return s.str();
}

std::string trace_csv(const std::vector<TraceEvent>& events) {
  std::string out = trace_csv_header();
  for (const auto& e : events) out += trace_csv_row(e);
  return out;
}

TraceCsvWriter::TraceCsvWriter(const std::filesystem::path& path) {
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw IoError("cannot write " + path.string());
  const auto header = trace_csv_header();
  std::fputs(header.c_str(), file_);
  std::fflush(file_);
}

TraceCsvWriter::~TraceCsvWriter() {
  if (file_) std::fclose(file_);
}

void TraceCsvWriter::write(const TraceEvent& e) {
  const auto row = trace_csv_row(e);
  if (std::fputs(row.c_str(), file_) < 0 || std::fflush(file_) != 0) throw IoError("trace write failed");
}

std::string report_csv_header() {
  return "latency_us,synops_us,synmem_us,dendops_us,link_us,power_w,energy_per_step_uj,used_cores,max_link_load\n";
}

std::string report_csv_row(const FitnessReport& r) {
  std::ostringstream s;
  s << fixed6(r.latency_us) << ',' << fixed6(r.stage_times.synops_us) << ',' << fixed6(r.stage_times.synmem_us) << ','
    << fixed6(r.stage_times.dendops_us) << ',' << fixed6(r.stage_times.link_us) << ',' << fixed6(r.power_w) << ','
    << fixed6(r.energy_per_step_uj) << ',' << r.used_cores << ',' << r.max_link_load << '\n';
  return s.str();
}

}  // namespace meshmap
