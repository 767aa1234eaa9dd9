#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "meshmap/genome.hpp"
#include "meshmap/random.hpp"

namespace meshmap {

struct PartitionMutationParams {
  double p_mut = 0.3;  // per-gene selection probability
  double p_add = 0.5;  // resource addition; redistribution otherwise
  int delta_max = 2;

  void validate() const;
};

struct PlacementMutationParams {
  double p_swap = 0.4;
  double p_inverse = 0.3;  // scramble takes 1 - p_swap - p_inverse
  double alpha = 0.25;     // magnitude k ~ U{1..floor(alpha * C_used)}

  void validate() const;
};

// Moves min(delta, unused) cores from the pool into layer `layer`.
void add_cores(PartitioningGenotype& x, std::size_t layer, int delta);

// Moves min(delta, extra[layer]) cores out of `layer` into `target`
// (another layer) or into the unused pool when target is empty.
void redistribute_cores(PartitioningGenotype& x, std::size_t layer, int delta, std::optional<std::size_t> target);

// Visits the layer genes in random order; each mutates with probability
// p_mut by addition or redistribution. The unused gene is only changed as
// the counterpart of a move, so the budget identity always holds.
PartitioningGenotype mutate_partitioning(const PartitioningGenotype& x, const PartitionMutationParams& params, Rng& rng);

enum class PlacementMove { active_global_swap, inversion, scramble };

void invert_window(std::span<CoreId> order, std::size_t start, std::size_t length);
void scramble_window(std::span<CoreId> order, std::size_t start, std::size_t length, Rng& rng);

// ceil(k/2) swaps of an active position i < used with any other position.
void active_global_swap(std::span<CoreId> order, std::size_t used, std::size_t k, Rng& rng);

// Applies exactly one of the three moves. Windows are truncated at the end
// of the permutation.
PlacementGenotype mutate_placement(const PlacementGenotype& omega, std::size_t used,
                                   const PlacementMutationParams& params, Rng& rng);

// Same, reporting which move was drawn.
PlacementGenotype mutate_placement(const PlacementGenotype& omega, std::size_t used,
                                   const PlacementMutationParams& params, Rng& rng, PlacementMove& applied);

// Transfers omega (cut by x_old) onto x_new while keeping every layer's
// physical cores: shrinking layers keep their leading cores, growing layers
// keep all and draw the deficit from the pool. The pool holds the old unused
// cores in omega order followed by released cores in layer order.
PlacementGenotype reorder_placement(const PlacementGenotype& omega, const PartitioningGenotype& x_old,
                                    const PartitioningGenotype& x_new, std::span<const int> min_cores);

}  // namespace meshmap
