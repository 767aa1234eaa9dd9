#include "meshmap/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meshmap/errors.hpp"

namespace meshmap {

void PartitionMutationParams::validate() const {
  if (!(p_mut >= 0.0 && p_mut <= 1.0)) throw ConfigError("must lie in [0, 1]", "operators.partitioning.p_mut");
  if (!(p_add >= 0.0 && p_add <= 1.0)) throw ConfigError("must lie in [0, 1]", "operators.partitioning.p_add");
  if (delta_max < 1) throw ConfigError("must be >= 1", "operators.partitioning.delta_max");
}

void PlacementMutationParams::validate() const {
  if (!(p_swap >= 0.0 && p_swap <= 1.0)) throw ConfigError("must lie in [0, 1]", "operators.placement.p_swap");
  if (!(p_inverse >= 0.0 && p_inverse <= 1.0)) {
    throw ConfigError("must lie in [0, 1]", "operators.placement.p_inverse");
  }
  if (p_swap + p_inverse > 1.0 + 1e-12) throw ConfigError("p_swap + p_inverse must be <= 1", "operators.placement");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("must lie in (0, 1]", "operators.placement.alpha");
}

void add_cores(PartitioningGenotype& x, std::size_t layer, int delta) {
  const int moved = std::min(delta, x.unused);
  x.extra.at(layer) += moved;
  x.unused -= moved;
}

void redistribute_cores(PartitioningGenotype& x, std::size_t layer, int delta, std::optional<std::size_t> target) {
  const int moved = std::min(delta, x.extra.at(layer));
  x.extra[layer] -= moved;
  if (target) x.extra.at(*target) += moved;
  else x.unused += moved;
}

PartitioningGenotype mutate_partitioning(const PartitioningGenotype& x, const PartitionMutationParams& params,
                                         Rng& rng) {
  PartitioningGenotype out = x;
  const auto layers = out.extra.size();
  std::vector<std::size_t> visit(layers);
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  rng.shuffle(std::span(visit));
  for (auto i : visit) {
    if (!rng.bernoulli(params.p_mut)) continue;
    const int delta = rng.uniform_int(1, params.delta_max);
    if (rng.bernoulli(params.p_add)) {
      add_cores(out, i, delta);
    } else {
      // L choices: the other L-1 layers, then the pool.
      const auto r = rng.uniform_int<std::size_t>(0, layers - 1);
      std::optional<std::size_t> target;
      if (r + 1 < layers) target = r < i ? r : r + 1;
      redistribute_cores(out, i, delta, target);
    }
  }
  return out;
}

void invert_window(std::span<CoreId> order, std::size_t start, std::size_t length) {
  if (start >= order.size()) return;
  const auto end = std::min(order.size(), start + length);
  std::reverse(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
}

void scramble_window(std::span<CoreId> order, std::size_t start, std::size_t length, Rng& rng) {
  if (start >= order.size()) return;
  const auto end = std::min(order.size(), start + length);
  rng.shuffle(order.subspan(start, end - start));
}

void active_global_swap(std::span<CoreId> order, std::size_t used, std::size_t k, Rng& rng) {
  const auto total = order.size();
  if (total < 2 || used == 0) return;
  const auto swaps = (k + 1) / 2;
  for (std::size_t s = 0; s < swaps; ++s) {
    const auto i = rng.uniform_int<std::size_t>(0, used - 1);
    auto j = rng.uniform_int<std::size_t>(0, total - 2);
    if (j >= i) ++j;
    std::swap(order[i], order[j]);
  }
}

PlacementGenotype mutate_placement(const PlacementGenotype& omega, std::size_t used,
                                   const PlacementMutationParams& params, Rng& rng, PlacementMove& applied) {
  PlacementGenotype out = omega;
  const auto total = out.order.size();
  if (total == 0) return out;
  used = std::clamp<std::size_t>(used, 1, total);
  const auto k_max = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(params.alpha * static_cast<double>(used))));
  const double u = rng.uniform01();
  const auto k = rng.uniform_int<std::size_t>(1, k_max);
  std::span<CoreId> order(out.order);
  if (u < params.p_swap) {
    applied = PlacementMove::active_global_swap;
    active_global_swap(order, used, k, rng);
  } else if (u < params.p_swap + params.p_inverse) {
    applied = PlacementMove::inversion;
    invert_window(order, rng.uniform_int<std::size_t>(0, used - 1), k);
  } else {
    applied = PlacementMove::scramble;
    scramble_window(order, rng.uniform_int<std::size_t>(0, used - 1), k, rng);
  }
  return out;
}

PlacementGenotype mutate_placement(const PlacementGenotype& omega, std::size_t used,
                                   const PlacementMutationParams& params, Rng& rng) {
  PlacementMove ignored{};
  return mutate_placement(omega, used, params, rng, ignored);
}

PlacementGenotype reorder_placement(const PlacementGenotype& omega, const PartitioningGenotype& x_old,
                                    const PartitioningGenotype& x_new, std::span<const int> min_cores) {
  const auto layers = min_cores.size();
  if (x_old.extra.size() != layers || x_new.extra.size() != layers) {
    throw GenotypeError("reorder: genotype length does not match layer count");
  }
  std::vector<std::size_t> old_size(layers), new_size(layers);
  std::size_t used_old = 0, used_new = 0;
  for (std::size_t i = 0; i < layers; ++i) {
    old_size[i] = static_cast<std::size_t>(min_cores[i] + x_old.extra[i]);
    new_size[i] = static_cast<std::size_t>(min_cores[i] + x_new.extra[i]);
    used_old += old_size[i];
    used_new += new_size[i];
  }
  if (used_old > omega.order.size() || used_new > omega.order.size()) {
    throw GenotypeError("reorder: partitioning uses more cores than the placement holds");
  }

  // Pass 1: every layer keeps its leading min(old, new) cores; the tails of
  // shrinking layers are released after the pre-existing pool.
  std::vector<std::vector<CoreId>> blocks(layers);
  std::vector<CoreId> pool(omega.order.begin() + static_cast<std::ptrdiff_t>(used_old), omega.order.end());
  std::size_t pos = 0;
  std::vector<CoreId> released;
  for (std::size_t i = 0; i < layers; ++i) {
    const auto keep = std::min(old_size[i], new_size[i]);
    blocks[i].assign(omega.order.begin() + static_cast<std::ptrdiff_t>(pos),
                     omega.order.begin() + static_cast<std::ptrdiff_t>(pos + keep));
    released.insert(released.end(), omega.order.begin() + static_cast<std::ptrdiff_t>(pos + keep),
                    omega.order.begin() + static_cast<std::ptrdiff_t>(pos + old_size[i]));
    pos += old_size[i];
  }
  pool.insert(pool.end(), released.begin(), released.end());

  // Pass 2: growing layers draw from the front of the pool, in layer order.
  std::size_t next = 0;
  PlacementGenotype out;
  out.order.reserve(omega.order.size());
  for (std::size_t i = 0; i < layers; ++i) {
    while (blocks[i].size() < new_size[i]) blocks[i].push_back(pool[next++]);
    out.order.insert(out.order.end(), blocks[i].begin(), blocks[i].end());
  }
  out.order.insert(out.order.end(), pool.begin() + static_cast<std::ptrdiff_t>(next), pool.end());
  return out;
}

}  // namespace meshmap
