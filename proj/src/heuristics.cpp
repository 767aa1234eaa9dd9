#include "meshmap/heuristics.hpp"

#include <utility>
#include <vector>

#include "meshmap/errors.hpp"

namespace meshmap {

std::string PlacementHeuristic::name() const {
  std::string s = fill == FillGranularity::packed ? "packed" : "spread";
  s += order == FillOrder::column_major ? "-column-major" : "-row-major";
  if (transpose) s += "-transposed";
  return s;
}

std::array<PlacementHeuristic, 4> standard_heuristics(bool transpose) {
  return {{{FillOrder::column_major, FillGranularity::packed, transpose},
           {FillOrder::row_major, FillGranularity::packed, transpose},
           {FillOrder::column_major, FillGranularity::spread, transpose},
           {FillOrder::row_major, FillGranularity::spread, transpose}}};
}

int max_feasible_k(const MappingProblem& p) {
  return p.spare_cores() / static_cast<int>(p.layer_count());
}

PartitioningGenotype min_plus_k(const MappingProblem& p, int k) {
  if (k < 0) throw ConfigError("k must be >= 0", "es.k_init");
  const auto layers = static_cast<int>(p.layer_count());
  if (p.c_min + k * layers > p.total_cores()) {
    throw InfeasibleError("min+" + std::to_string(k) + " needs " + std::to_string(p.c_min + k * layers) +
                          " cores but only " + std::to_string(p.total_cores()) +
                          " are usable; largest feasible k is " + std::to_string(max_feasible_k(p)));
  }
  PartitioningGenotype x;
  x.extra.assign(p.layer_count(), k);
  x.unused = p.spare_cores() - k * layers;
  return x;
}

PlacementGenotype heuristic_placement(const PlacementHeuristic& h, const Architecture& arch) {
  const bool column_major = (h.order == FillOrder::column_major) != h.transpose;
  std::vector<std::pair<int, int>> routers;  // (x, y) in visiting order
  if (column_major) {
    for (int x = 0; x < arch.mesh_width(); ++x)
      for (int y = 0; y < arch.mesh_height(); ++y) routers.emplace_back(x, y);
  } else {
    for (int y = 0; y < arch.mesh_height(); ++y)
      for (int x = 0; x < arch.mesh_width(); ++x) routers.emplace_back(x, y);
  }

  PlacementGenotype out;
  out.order.reserve(arch.core_count());
  auto emit = [&](int chip, int x, int y, int c) {
    if (auto id = arch.find_core({chip, x, y, c})) out.order.push_back(*id);
  };
  for (int chip = 0; chip < arch.chips(); ++chip) {
    if (h.fill == FillGranularity::packed) {
      for (auto [x, y] : routers)
        for (int c = 1; c <= arch.cores_per_router(); ++c) emit(chip, x, y, c);
    } else {
      for (int c = 1; c <= arch.cores_per_router(); ++c)
        for (auto [x, y] : routers) emit(chip, x, y, c);
    }
  }
  return out;
}

PlacementGenotype random_placement(const Architecture& arch, Rng& rng) {
  auto p = identity_placement(arch);
  rng.shuffle(std::span(p.order));
  return p;
}

}  // namespace meshmap
