#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "meshmap/evolution.hpp"
#include "meshmap/fitness.hpp"

namespace meshmap {

using Json = nlohmann::json;

// File helpers. Missing or unreadable files raise IoError, malformed JSON a
// ConfigError naming the file.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
// Pretty-printed with a trailing newline; key order is sorted, so equal
// values always serialize to equal bytes.
std::string dump_json(const Json& j);

// Every reader rejects unknown fields; errors carry the dotted path below
// `where` (e.g. "architecture.rates.link_bandwidth").
Json to_json(const ModelRates& r);
ModelRates rates_from_json(const Json& j, const std::string& where, ModelRates base = {});

// Architecture file: {chips, mesh_width, mesh_height, cores_per_router,
// disabled_cores: [[chip, x, y, c], ...], max_neurons_per_core,
// core_memory_words, interchip_hop_penalty, rates{...},
// interchip_links: [{chip_a, x_a, y_a, chip_b, x_b, y_b}, ...]}.
// {"preset": "default", "chips": n} starts from the default chip instead of
// an empty spec; other fields then override it.
Json to_json(const ArchitectureSpec& spec);
ArchitectureSpec architecture_from_json(const Json& j, const std::string& where);

// Workload file: {name, input_size, input_activity,
// layers: [{neurons, weight_sparsity, activation_sparsity,
//           state_words_per_neuron, weight_words_per_synapse}, ...]}.
// A {"preset": "sparsemlp-1", ...} object runs the generator instead
// (optional name, input_size, output_size, hidden, weight_sparsity,
// first_activation_sparsity, last_activation_sparsity, input_activity).
Json to_json(const Workload& w);
Workload workload_from_json(const Json& j, const std::string& where);

Json to_json(const FitnessReport& r);
Json to_json(const EsConfig& c);

// Self-contained mapping file: architecture, workload, both genotypes, the
// resulting per-layer core lists and optionally the report.
struct MappingFile {
  ArchitectureSpec architecture;
  Workload workload;
  PartitioningGenotype partitioning;
  PlacementGenotype placement;
  std::optional<FitnessReport> report;
};

Json mapping_to_json(const MappingProblem& p, const Mapping& m, const std::optional<FitnessReport>& report);
// Checks the genotypes against the embedded problem and the stored core
// lists against the rebuilt phenotype.
MappingFile mapping_from_json(const Json& j);

// {workload, architecture, operators{partitioning, placement},
//  es{...}, model{rates, noise}}. Every section is optional; workload and
// architecture may also be file paths, resolved against `base_dir`.
// model.rates overrides the architecture's own rates field by field.
struct RunConfig {
  Workload workload;
  ArchitectureSpec architecture;
  EsConfig es;
};

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
// Resolved, self-contained echo that loads back to the same RunConfig.
Json to_json(const RunConfig& c);

// eval_index,generation,level,latency_us,accepted,best_so_far_us
std::string trace_csv_header();
std::string trace_csv_row(const TraceEvent& e);
std::string trace_csv(const std::vector<TraceEvent>& events);

// Appends rows to a trace file, flushing after every event.
class TraceCsvWriter {
 public:
  explicit TraceCsvWriter(const std::filesystem::path& path);
  ~TraceCsvWriter();
  TraceCsvWriter(const TraceCsvWriter&) = delete;
  TraceCsvWriter& operator=(const TraceCsvWriter&) = delete;

  void write(const TraceEvent& e);

 private:
  std::FILE* file_ = nullptr;
};

std::string report_csv_header();
std::string report_csv_row(const FitnessReport& r);

// Fixed 6-decimal rendering used by every CSV.
std::string fixed6(double value);

}  // namespace meshmap
