#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshmap/arch.hpp"

namespace meshmap {

struct Layer {
  std::int64_t neurons = 0;
  std::int64_t fan_in = 0;            // neurons of the previous layer (input size for layer 1)
  double weight_sparsity = 0.0;       // fraction of zero weights, in [0, 1)
  double activation_sparsity = 0.0;   // fraction of inactive output neurons per step, in [0, 1]
  std::int64_t state_words_per_neuron = 2;
  std::int64_t weight_words_per_synapse = 1;
};

// Round-half-up of neurons * fan_in * (1 - weight_sparsity).
std::int64_t nonzero_synapses(const Layer& layer);

// Ordered layered workload. Layer i's fan_in equals layer i-1's neurons.
struct Workload {
  std::string name;
  std::int64_t input_size = 0;
  double input_activity = 1.0;  // fraction of inputs active per step feeding layer 1
  std::vector<Layer> layers;

  std::size_t layer_count() const noexcept { return layers.size(); }
};

// Spec of one layer as found in a workload file (fan_in is derived).
struct LayerSpec {
  std::int64_t neurons = 0;
  double weight_sparsity = 0.0;
  double activation_sparsity = 0.0;
  std::int64_t state_words_per_neuron = 2;
  std::int64_t weight_words_per_synapse = 1;
};

// Chains `layers` onto an input of `input_size` and validates the result.
Workload make_workload(std::string name, std::int64_t input_size, const std::vector<LayerSpec>& layers,
                       double input_activity = 1.0);

// Throws ConfigError on empty workloads, nonpositive sizes, sparsities out of
// range or a broken fan_in chain.
void validate_workload(const Workload& w);

// Dense weight count sum(neurons * fan_in).
std::int64_t dense_parameter_count(const Workload& w);

struct CoreBudget {
  std::int64_t neurons_on_core = 0;
  std::int64_t synapse_words = 0;
  std::int64_t state_words = 0;
  std::int64_t buffer_words = 0;

  std::int64_t memory_words() const noexcept { return synapse_words + state_words + buffer_words; }
};

// Spike input buffer: one bit per potentially active input axon, 32 per word.
inline constexpr std::int64_t kBufferBitsPerWord = 32;

// Per-core requirement of `layer` split uniformly over `cores` cores.
CoreBudget core_requirements(const Layer& layer, std::int64_t cores, const Architecture& arch);

bool is_feasible(const Layer& layer, std::int64_t cores, const Architecture& arch);

// Neurons held by core `index` (0-based) of a layer of `neurons` split over
// `cores` in natural order: slice [floor(i*n/c), floor((i+1)*n/c)).
std::int64_t slice_neurons(std::int64_t neurons, std::int64_t cores, std::int64_t index);

// Smallest feasible core count per layer. Throws InfeasibleError naming the
// first layer that does not fit, and when the total exceeds the usable cores.
std::vector<int> minimum_partitioning(const Workload& w, const Architecture& arch);

struct MlpSpec {
  // Preset the spec was derived from ("sparsemlp-1", "sparsemlp-2"); informational.
  std::string preset;
  std::string name = "mlp";
  std::int64_t input_size = 1024;
  std::int64_t output_size = 512;
  std::vector<std::int64_t> hidden;
  std::optional<std::int64_t> hidden_min;
  std::optional<std::int64_t> hidden_max;
  double weight_sparsity = 0.85;
  double first_activation_sparsity = 0.15;
  double last_activation_sparsity = 0.80;
  double input_activity = 1.0;
};

MlpSpec sparse_mlp_preset(const std::string& preset);

// Builds the MLP of `spec`. Activation sparsity ramps linearly over layer
// index from first to last. Throws ConfigError when a hidden dimension
// falls outside [hidden_min, hidden_max].
Workload generate_sparse_mlp(const MlpSpec& spec);

}  // namespace meshmap
