#pragma once

#include <vector>

#include "meshmap/arch.hpp"
#include "meshmap/genome.hpp"
#include "meshmap/workload.hpp"

namespace meshmap::test {

// Single-chip mesh with every slot usable.
inline ArchitectureSpec mesh_spec(int w, int h, int cores_per_router, int chips = 1) {
  ArchitectureSpec s;
  s.chips = chips;
  s.mesh_width = w;
  s.mesh_height = h;
  s.cores_per_router = cores_per_router;
  return s;
}

inline Architecture mesh(int w, int h, int cores_per_router, int chips = 1) {
  return Architecture(mesh_spec(w, h, cores_per_router, chips));
}

// Chain of dense layers with uniform sparsities.
inline Workload chain(std::int64_t input, std::vector<std::int64_t> sizes, double ws = 0.0, double as = 0.0) {
  std::vector<LayerSpec> specs;
  for (auto n : sizes) specs.push_back({n, ws, as});
  return make_workload("test", input, specs);
}

inline PartitioningGenotype genotype(std::vector<int> extra, int unused) { return {std::move(extra), unused}; }

}  // namespace meshmap::test
