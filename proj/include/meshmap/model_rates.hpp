#pragma once

namespace meshmap {

// Throughput and energy constants of the analytical stage-time model.
// The defaults are calibration values: they put the packed row-major
// SparseMLP-1 baseline in the tens-of-microseconds regime and are not
// measurements of any silicon.
struct ModelRates {
  double synops_rate = 8000.0;         // synaptic ops per us per core
  double synmem_rate = 4500.0;         // synapse words per us per core
  double dendops_rate = 100.0;         // neuron updates per us per core
  double link_bandwidth = 250.0;       // packets per us per on-chip link
  double interchip_bandwidth = 250.0;  // packets per us per inter-chip link
  double barrier_overhead_us = 2.0;
  double axon_row_words = 1.0;         // words read per incoming spike before its synapse row
  double static_power_per_core_w = 0.0;
  double chip_idle_power_w = 1.2;
  double e_synop_j = 2.0e-11;
  double e_packet_hop_j = 5.0e-12;
  double e_neuron_update_j = 5.0e-11;

  // Throws ConfigError naming the first bad field.
  void validate() const;
};

}  // namespace meshmap
