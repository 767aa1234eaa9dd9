#include "meshmap/fitness.hpp"

#include <algorithm>
#include <cmath>

#include "meshmap/errors.hpp"
#include "meshmap/random.hpp"

namespace meshmap {

namespace {

// Spikes entering each layer per step: the input for layer 0, otherwise the
// summed active neurons of the previous layer's cores.
std::vector<std::int64_t> incoming_spikes(const MappingProblem& p, const Mapping& m) {
  const auto& layers = p.workload.layers;
  std::vector<std::int64_t> in(layers.size(), 0);
  in[0] = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(p.workload.input_size) * p.workload.input_activity - 1e-9));
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const auto cores = static_cast<std::int64_t>(m.layer_cores[i].size());
    std::int64_t total = 0;
    for (std::int64_t j = 0; j < cores; ++j) {
      total += active_neurons(slice_neurons(layers[i].neurons, cores, j), layers[i].activation_sparsity);
    }
    in[i + 1] = total;
  }
  return in;
}

double bandwidth_of(const Link& link, const ModelRates& rates) {
  return link.kind == LinkKind::inter_chip ? rates.interchip_bandwidth : rates.link_bandwidth;
}

}  // namespace

std::int64_t active_neurons(std::int64_t slice, double activation_sparsity) {
  const double active = static_cast<double>(slice) * (1.0 - activation_sparsity);
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(active - 1e-9)));
}

std::vector<TrafficEntry> traffic_matrix(const MappingProblem& p, const Mapping& m) {
  std::vector<TrafficEntry> out;
  const auto& layers = p.workload.layers;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const auto& src_cores = m.layer_cores[i];
    const auto cores = static_cast<std::int64_t>(src_cores.size());
    for (std::int64_t j = 0; j < cores; ++j) {
      const auto packets =
          active_neurons(slice_neurons(layers[i].neurons, cores, j), layers[i].activation_sparsity);
      if (packets == 0) continue;
      for (auto dst : m.layer_cores[i + 1]) out.push_back({src_cores[j], dst, packets});
    }
  }
  return out;
}

LinkLoads link_loads(const MappingProblem& p, const Mapping& m) {
  LinkLoads loads;
  loads.per_link.assign(p.arch.links().size(), 0);
  for (const auto& t : traffic_matrix(p, m)) {
    for (auto link : p.arch.route_links(t.src, t.dst)) loads.per_link[link] += t.packets;
  }
  if (!loads.per_link.empty()) loads.max_load = *std::max_element(loads.per_link.begin(), loads.per_link.end());
  return loads;
}

std::map<Link, std::int64_t> simulate_exact(const MappingProblem& p, const Mapping& m, std::int64_t max_packets) {
  const auto& arch = p.arch;
  const auto& layers = p.workload.layers;

  // Materialize the packet list first so the size guard runs before any work.
  struct Packet {
    CoreLocation src, dst;
  };
  std::vector<Packet> packets;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const auto n = layers[i].neurons;
    const auto cores = static_cast<std::int64_t>(m.layer_cores[i].size());
    for (std::int64_t j = 0; j < cores; ++j) {
      const auto first = j * n / cores, last = (j + 1) * n / cores;
      const double active = static_cast<double>(last - first) * (1.0 - layers[i].activation_sparsity);
      const auto spikes = static_cast<std::int64_t>(std::ceil(active - 1e-9));
      for (auto dst : m.layer_cores[i + 1]) {
        for (std::int64_t s = 0; s < spikes; ++s) {
          if (static_cast<std::int64_t>(packets.size()) >= max_packets) {
            throw ConfigError("instance exceeds the exact-simulation limit of " + std::to_string(max_packets) +
                              " packets");
          }
          packets.push_back({arch.core(m.layer_cores[i][j]), arch.core(dst)});
        }
      }
    }
  }

  std::map<Link, std::int64_t> loads;
  for (const auto& pkt : packets) {
    CoreLocation at = pkt.src.router();
    ++loads[{LinkKind::core_to_router, pkt.src, at}];
    auto walk_to = [&](const CoreLocation& target) {
      while (at.x != target.x) {
        CoreLocation next = at;
        next.x += target.x > at.x ? 1 : -1;
        ++loads[{LinkKind::router_to_router, at, next}];
        at = next;
      }
      while (at.y != target.y) {
        CoreLocation next = at;
        next.y += target.y > at.y ? 1 : -1;
        ++loads[{LinkKind::router_to_router, at, next}];
        at = next;
      }
    };
    if (pkt.src.chip != pkt.dst.chip) {
      const auto path = arch.chip_path(pkt.src.chip, pkt.dst.chip);
      if (path.empty()) throw RoutingError("no inter-chip route for packet " + to_string(pkt.src));
      for (std::size_t h = 0; h + 1 < path.size(); ++h) {
        const auto ends = arch.interchip_endpoints(path[h], path[h + 1]);
        walk_to(ends->first);
        ++loads[{LinkKind::inter_chip, ends->first, ends->second}];
        at = ends->second;
      }
    }
    walk_to(pkt.dst.router());
    ++loads[{LinkKind::router_to_core, at, pkt.dst}];
  }
  return loads;
}

double StageTimes::max() const { return std::max({synops_us, synmem_us, dendops_us, link_us}); }

namespace {

StageTimes compute_stage_times(const MappingProblem& p, const Mapping& m, const ModelRates& rates,
                               const LinkLoads& loads) {
  const auto& layers = p.workload.layers;
  const auto incoming = incoming_spikes(p, m);
  StageTimes t;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    const auto cores = static_cast<std::int64_t>(m.layer_cores[i].size());
    const double density = 1.0 - layer.weight_sparsity;
    const auto spikes = static_cast<double>(incoming[i]);
    // The last slice is the largest one.
    const auto slice = static_cast<double>(slice_neurons(layer.neurons, cores, cores - 1));
    const double synops = spikes * density * slice;
    const double synmem =
        spikes * (rates.axon_row_words + density * slice * static_cast<double>(layer.weight_words_per_synapse));
    t.synops_us = std::max(t.synops_us, synops / rates.synops_rate);
    t.synmem_us = std::max(t.synmem_us, synmem / rates.synmem_rate);
    t.dendops_us = std::max(t.dendops_us, slice / rates.dendops_rate);
  }
  const auto& links = p.arch.links();
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (loads.per_link[l] == 0) continue;
    t.link_us = std::max(t.link_us, static_cast<double>(loads.per_link[l]) / bandwidth_of(links[l], rates));
  }
  return t;
}

}  // namespace

StageTimes stage_times(const MappingProblem& p, const Mapping& m, const ModelRates& rates) {
  return compute_stage_times(p, m, rates, link_loads(p, m));
}

PowerEnergy energy_power(const MappingProblem& p, const Mapping& m, const ModelRates& rates, double latency_us) {
  if (!(latency_us > 0.0)) throw ConfigError("latency must be > 0 for power accounting");
  const auto& arch = p.arch;
  const auto& layers = p.workload.layers;
  PowerEnergy out;

  std::vector<std::size_t> used_on_chip(arch.chips(), 0);
  for (const auto& cores : m.layer_cores)
    for (auto id : cores) ++used_on_chip[arch.core(id).chip];
  for (int chip = 0; chip < arch.chips(); ++chip) {
    if (used_on_chip[chip] == 0) continue;
    out.static_w += rates.chip_idle_power_w * static_cast<double>(used_on_chip[chip]) /
                    static_cast<double>(arch.usable_cores_on_chip(chip));
    out.static_w += rates.static_power_per_core_w * static_cast<double>(used_on_chip[chip]);
  }

  const auto incoming = incoming_spikes(p, m);
  double synops = 0.0, neurons = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    // Summed over cores the slices add up to the layer size.
    synops += static_cast<double>(incoming[i]) * (1.0 - layers[i].weight_sparsity) *
              static_cast<double>(layers[i].neurons);
    neurons += static_cast<double>(layers[i].neurons);
  }
  double packet_hops = 0.0;
  for (const auto& t : traffic_matrix(p, m)) {
    packet_hops += static_cast<double>(t.packets) * arch.hop_distance(arch.core(t.src), arch.core(t.dst));
  }
  const double dynamic_j =
      rates.e_synop_j * synops + rates.e_packet_hop_j * packet_hops + rates.e_neuron_update_j * neurons;
  out.dynamic_energy_uj = dynamic_j * 1e6;
  out.power_w = out.static_w + out.dynamic_energy_uj / latency_us;
  out.energy_per_step_uj = out.power_w * latency_us;
  return out;
}

FitnessReport evaluate(const MappingProblem& p, const Mapping& m, const ModelRates& rates, const NoiseConfig& noise,
                       std::uint64_t seed) {
  FitnessReport r;
  const auto loads = link_loads(p, m);
  r.stage_times = compute_stage_times(p, m, rates, loads);
  r.evaluation_seed = seed;
  r.used_cores = m.used_cores();
  r.max_link_load = loads.max_load;
  double latency = r.stage_times.max() + rates.barrier_overhead_us;
  if (noise.sigma > 0.0) {
    Rng rng(seed);
    double eps = rng.normal(0.0, noise.sigma);
    while (std::abs(eps) > 3.0 * noise.sigma) eps = rng.normal(0.0, noise.sigma);
    r.noise_factor = 1.0 + eps;
    latency *= r.noise_factor;
  }
  r.latency_us = latency;
  const auto pe = energy_power(p, m, rates, latency);
  r.power_w = pe.power_w;
  r.energy_per_step_uj = pe.energy_per_step_uj;
  return r;
}

}  // namespace meshmap
