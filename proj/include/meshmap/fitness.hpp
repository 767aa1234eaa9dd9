#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "meshmap/genome.hpp"
#include "meshmap/model_rates.hpp"

namespace meshmap {

// Multiplicative measurement noise: latency *= 1 + eps with
// eps ~ Normal(0, sigma) truncated to [-3 sigma, 3 sigma]. sigma = 0 disables it.
struct NoiseConfig {
  double sigma = 0.0;
};

struct TrafficEntry {
  CoreId src = 0;
  CoreId dst = 0;
  std::int64_t packets = 0;
  bool operator==(const TrafficEntry&) const = default;
};

// Active output neurons of a slice: ceil(slice * (1 - activation_sparsity)).
std::int64_t active_neurons(std::int64_t slice, double activation_sparsity);

// Per step, every core of layer i sends one packet per active neuron to
// every core of layer i+1. The last layer sends nothing.
std::vector<TrafficEntry> traffic_matrix(const MappingProblem& p, const Mapping& m);

struct LinkLoads {
  std::vector<std::int64_t> per_link;  // indexed like Architecture::links()
  std::int64_t max_load = 0;
};

// Aggregated load: each traffic entry adds its packets to every link of its route.
LinkLoads link_loads(const MappingProblem& p, const Mapping& m);

// Independent oracle for link_loads: walks every packet hop by hop.
// Throws ConfigError when the instance carries more than max_packets packets.
std::map<Link, std::int64_t> simulate_exact(const MappingProblem& p, const Mapping& m,
                                            std::int64_t max_packets = 2'000'000);

struct StageTimes {
  double synops_us = 0.0;
  double synmem_us = 0.0;
  double dendops_us = 0.0;
  double link_us = 0.0;

  double max() const;
};

// Upper-bound time of each pipeline stage: the busiest core (or link) of
// that stage determines it.
//   synops(core)  = A * (1 - ws) * m
//   synmem(core)  = A * (axon_row_words + (1 - ws) * m * weight_words)
//   dendops(core) = m
// where m is the core's neuron slice and A the active spikes arriving from
// the previous layer (or the input for layer 1).
StageTimes stage_times(const MappingProblem& p, const Mapping& m, const ModelRates& rates);

struct PowerEnergy {
  double static_w = 0.0;
  double dynamic_energy_uj = 0.0;
  double power_w = 0.0;
  double energy_per_step_uj = 0.0;
};

PowerEnergy energy_power(const MappingProblem& p, const Mapping& m, const ModelRates& rates, double latency_us);

struct FitnessReport {
  double latency_us = 0.0;
  StageTimes stage_times;
  double power_w = 0.0;
  double energy_per_step_uj = 0.0;
  std::size_t used_cores = 0;
  std::int64_t max_link_load = 0;
  std::uint64_t evaluation_seed = 0;
  double noise_factor = 1.0;

  double fitness() const { return -latency_us; }
};

// latency = (max stage time + barrier overhead) * noise factor.
FitnessReport evaluate(const MappingProblem& p, const Mapping& m, const ModelRates& rates,
                       const NoiseConfig& noise = {}, std::uint64_t seed = 0);

}  // namespace meshmap
