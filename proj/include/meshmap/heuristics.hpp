#pragma once

#include <array>
#include <string>

#include "meshmap/genome.hpp"
#include "meshmap/random.hpp"

namespace meshmap {

enum class FillOrder { column_major, row_major };
enum class FillGranularity { packed, spread };

// Structured placement. Column-major visits routers x-outer, y-inner;
// row-major y-outer, x-inner. `transpose` swaps the two axis conventions.
struct PlacementHeuristic {
  FillOrder order = FillOrder::column_major;
  FillGranularity fill = FillGranularity::packed;
  bool transpose = false;

  std::string name() const;  // e.g. "packed-row-major"
  bool operator==(const PlacementHeuristic&) const = default;
};

// packed-column, packed-row, spread-column, spread-row. This is also the
// tie-break order used when picking an initial parent.
std::array<PlacementHeuristic, 4> standard_heuristics(bool transpose = false);

// Largest k with C_min + k * L <= C_tot.
int max_feasible_k(const MappingProblem& p);

// Every layer gets k extra cores. Throws InfeasibleError reporting the
// largest feasible k when the budget is exceeded.
PartitioningGenotype min_plus_k(const MappingProblem& p, int k);

// Packed emits every slot of a router before moving on; spread emits slot 1
// of every router of a chip, then slot 2, and so on. Chips in ascending
// order, disabled slots skipped.
PlacementGenotype heuristic_placement(const PlacementHeuristic& h, const Architecture& arch);

PlacementGenotype random_placement(const Architecture& arch, Rng& rng);

}  // namespace meshmap
