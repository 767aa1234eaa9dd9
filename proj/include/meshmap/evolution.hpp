#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meshmap/fitness.hpp"
#include "meshmap/genome.hpp"
#include "meshmap/operators.hpp"

namespace meshmap {

enum class Strategy { single, global, chipwise };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct EsConfig {
  int lambda_part = 4;
  int lambda_place = 4;
  std::int64_t budget = 125;
  bool elitist_partitioning = true;
  bool use_reordering = true;
  bool charge_init_to_budget = true;
  std::uint64_t seed = 0;
  int k_init = 2;
  int max_resample = 10;
  unsigned threads = 1;  // concurrent evaluations per generation
  Strategy strategy = Strategy::single;
  PartitionMutationParams partition_ops;
  PlacementMutationParams placement_ops;
  NoiseConfig noise;

  // Throws ConfigError with the dotted field path.
  void validate() const;
};

enum class TraceLevel { init, partitioning, placement };

std::string to_string(TraceLevel level);

struct TraceEvent {
  std::int64_t eval_index = 0;
  int generation = 0;
  TraceLevel level = TraceLevel::init;
  double latency_us = 0.0;
  bool accepted = false;
  // Latency of the current parent once this evaluation has been considered.
  double best_so_far_us = 0.0;

  bool operator==(const TraceEvent&) const = default;
};

using TraceSink = std::function<void(const TraceEvent&)>;

struct Individual {
  PartitioningGenotype x;
  PlacementGenotype omega;
  double latency_us = 0.0;
};

struct RunResult {
  Mapping best_mapping;
  FitnessReport best_report;  // noise-free re-evaluation of best_mapping
  std::vector<TraceEvent> trace;
  EsConfig config;
  std::vector<std::string> warnings;
  int partitioning_generations = 0;
  int stalled_partitioning_generations = 0;  // no strict improvement over the parent
  // Chip-wise runs only: one trace per segment, in chip order.
  std::vector<std::vector<TraceEvent>> segment_traces;
};

// Nested (1+lambda) evolution over partitioning and placement.
// One generation = partitioning step then placement step.
class NestedEvolution {
 public:
  NestedEvolution(const MappingProblem& problem, EsConfig config, TraceSink sink = {});

  // min+k against the four heuristics and one random placement; the argmin
  // becomes the parent (ties: enumeration order). Returns the parent.
  const Individual& initialize();

  // Mutates the partitioning lambda_part times, transfers the parent
  // placement to each offspring and selects. Returns false when the budget
  // is already exhausted.
  bool partitioning_step();

  // lambda_place placement mutants under the fixed partitioning; elitist.
  bool placement_step();

  RunResult run();

  const Individual& parent() const noexcept { return parent_; }
  std::int64_t evaluations() const noexcept { return charged_; }
  std::int64_t remaining() const noexcept { return config_.budget - charged_; }
  int generation() const noexcept { return generation_; }
  const std::vector<TraceEvent>& trace() const noexcept { return trace_; }

 private:
  // Evaluates candidates (possibly in parallel); latency per candidate.
  std::vector<double> evaluate_batch(const std::vector<Individual>& candidates);
  void record(TraceLevel level, double latency, bool accepted, double best_so_far, bool charge);
  void consider_best(const Individual& ind);

  const MappingProblem& problem_;
  EsConfig config_;
  TraceSink sink_;
  Individual parent_;
  std::optional<Individual> best_;
  std::vector<TraceEvent> trace_;
  std::vector<std::string> warnings_;
  std::int64_t charged_ = 0;
  std::int64_t next_eval_ = 0;
  int generation_ = 0;
  int partitioning_generations_ = 0;
  int stalled_ = 0;
  bool initialized_ = false;
};

RunResult evolve(const MappingProblem& problem, const EsConfig& config, TraceSink sink = {});

struct WorkloadSegment {
  std::size_t first_layer = 0;
  std::size_t end_layer = 0;  // exclusive
  int chip = 0;
  int c_min = 0;
  Workload workload;  // layers [first_layer, end_layer) fed by the preceding layer
};

// Contiguous split of the layers over n_chips chips minimising the largest
// segment C_min (ties: smallest variance of segment C_min). Each segment must
// fit on its chip. Throws InfeasibleError otherwise.
std::vector<WorkloadSegment> segment_workload(const Workload& w, const Architecture& arch, int n_chips);

// Single-chip architecture for `chip` of a multi-chip spec (same mesh,
// that chip's disabled cores, no inter-chip links).
Architecture chip_architecture(const Architecture& arch, int chip);

// Evolves every segment on its own chip with a budget share proportional to
// its C_min, then evaluates the combined mapping on the full system.
RunResult evolve_chipwise(const MappingProblem& problem, const EsConfig& config, TraceSink sink = {});

// Dispatches on config.strategy (single and global both run evolve()).
RunResult run_strategy(const MappingProblem& problem, const EsConfig& config, TraceSink sink = {});

}  // namespace meshmap
