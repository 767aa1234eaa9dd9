#include "meshmap/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "meshmap/errors.hpp"

namespace meshmap {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::int64_t nonzero_synapses(const Layer& layer) {
  const double dense = static_cast<double>(layer.neurons) * static_cast<double>(layer.fan_in);
  return static_cast<std::int64_t>(std::floor(dense * (1.0 - layer.weight_sparsity) + 0.5));
}

Workload make_workload(std::string name, std::int64_t input_size, const std::vector<LayerSpec>& layers,
                       double input_activity) {
  Workload w;
  w.name = std::move(name);
  w.input_size = input_size;
  w.input_activity = input_activity;
  std::int64_t fan_in = input_size;
  for (const auto& s : layers) {
    w.layers.push_back({s.neurons, fan_in, s.weight_sparsity, s.activation_sparsity, s.state_words_per_neuron,
                        s.weight_words_per_synapse});
    fan_in = s.neurons;
  }
  validate_workload(w);
  return w;
}

void validate_workload(const Workload& w) {
  if (w.layers.empty()) throw ConfigError("workload has no layers", "layers");
  if (w.input_size < 1) throw ConfigError("must be >= 1", "input_size");
  if (!(w.input_activity >= 0.0 && w.input_activity <= 1.0)) {
    throw ConfigError("must lie in [0, 1]", "input_activity");
  }
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const auto& l = w.layers[i];
    const std::string at = "layers[" + std::to_string(i) + "]";
    if (l.neurons < 1) throw ConfigError("must be >= 1", at + ".neurons");
    if (!(l.weight_sparsity >= 0.0 && l.weight_sparsity < 1.0)) {
      throw ConfigError("must lie in [0, 1)", at + ".weight_sparsity");
    }
    if (!(l.activation_sparsity >= 0.0 && l.activation_sparsity <= 1.0)) {
      throw ConfigError("must lie in [0, 1]", at + ".activation_sparsity");
    }
    if (l.state_words_per_neuron < 0) throw ConfigError("must be >= 0", at + ".state_words_per_neuron");
    if (l.weight_words_per_synapse < 0) throw ConfigError("must be >= 0", at + ".weight_words_per_synapse");
    const auto expected = i == 0 ? w.input_size : w.layers[i - 1].neurons;
    if (l.fan_in != expected) {
      throw ConfigError("fan_in " + std::to_string(l.fan_in) + " does not match previous layer size " +
                            std::to_string(expected),
                        at + ".fan_in");
    }
  }
}

std::int64_t dense_parameter_count(const Workload& w) {
  std::int64_t total = 0;
  for (const auto& l : w.layers) total += l.neurons * l.fan_in;
  return total;
}

CoreBudget core_requirements(const Layer& layer, std::int64_t cores, const Architecture&) {
  CoreBudget b;
  b.neurons_on_core = ceil_div(layer.neurons, cores);
  b.synapse_words = ceil_div(nonzero_synapses(layer), cores) * layer.weight_words_per_synapse;
  b.state_words = b.neurons_on_core * layer.state_words_per_neuron;
  b.buffer_words = ceil_div(layer.fan_in, kBufferBitsPerWord);
  return b;
}

bool is_feasible(const Layer& layer, std::int64_t cores, const Architecture& arch) {
  const auto b = core_requirements(layer, cores, arch);
  return b.neurons_on_core <= arch.max_neurons_per_core() && b.memory_words() <= arch.core_memory_words();
}

std::int64_t slice_neurons(std::int64_t neurons, std::int64_t cores, std::int64_t index) {
  return (index + 1) * neurons / cores - index * neurons / cores;
}

std::vector<int> minimum_partitioning(const Workload& w, const Architecture& arch) {
  const auto total = static_cast<std::int64_t>(arch.core_count());
  std::vector<int> mins;
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const auto& layer = w.layers[i];
    // Requirements are non-increasing in the core count, so binary search.
    std::int64_t lo = 1, hi = total;
    if (!is_feasible(layer, hi, arch)) {
      const auto b = core_requirements(layer, hi, arch);
      const std::string what = b.neurons_on_core > arch.max_neurons_per_core() ? "neuron cap" : "memory capacity";
      throw InfeasibleError("layer " + std::to_string(i) + " violates the " + what + " even on all " +
                            std::to_string(total) + " cores");
    }
    while (lo < hi) {
      const auto mid = lo + (hi - lo) / 2;
      if (is_feasible(layer, mid, arch)) hi = mid;
      else lo = mid + 1;
    }
    mins.push_back(static_cast<int>(lo));
    sum += lo;
  }
  if (sum > total) {
    throw InfeasibleError("minimum partitioning needs " + std::to_string(sum) + " cores but only " +
                          std::to_string(total) + " are usable");
  }
  return mins;
}

MlpSpec sparse_mlp_preset(const std::string& preset) {
  MlpSpec s;
  const auto key = lower(preset);
  if (key == "sparsemlp-1") {
    s.name = "SparseMLP-1";
    s.hidden = {1024, 4096, 2048, 512, 2048};
    s.hidden_min = 512;
    s.hidden_max = 4096;
  } else if (key == "sparsemlp-2") {
    s.name = "SparseMLP-2";
    s.hidden = {4096, 2048, 1024, 1024, 1024, 1024, 1024, 1024, 1024, 2048, 4096};
    s.hidden_min = 1024;
    s.hidden_max = 4096;
  } else {
    throw ConfigError("unknown workload preset '" + preset + "'", "preset");
  }
  s.preset = key;
  return s;
}

Workload generate_sparse_mlp(const MlpSpec& spec) {
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    const auto h = spec.hidden[i];
    if ((spec.hidden_min && h < *spec.hidden_min) || (spec.hidden_max && h > *spec.hidden_max)) {
      throw ConfigError("hidden dimension " + std::to_string(h) + " outside the allowed range",
                        "hidden[" + std::to_string(i) + "]");
    }
  }
  std::vector<std::int64_t> sizes = spec.hidden;
  sizes.push_back(spec.output_size);
  const auto count = sizes.size();
  std::vector<LayerSpec> layers;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    LayerSpec l;
    l.neurons = sizes[k];
    l.weight_sparsity = spec.weight_sparsity;
    l.activation_sparsity = spec.first_activation_sparsity * (1.0 - t) + spec.last_activation_sparsity * t;
    layers.push_back(l);
  }
  return make_workload(spec.name, spec.input_size, layers, spec.input_activity);
}

}  // namespace meshmap
