#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "meshmap/arch.hpp"
#include "meshmap/workload.hpp"

namespace meshmap {

using BigInt = boost::multiprecision::cpp_int;

// Extra cores per layer beyond the minimum, plus the unallocated-core gene.
// Valid genotypes satisfy sum(extra) + unused == C_tot - C_min.
struct PartitioningGenotype {
  std::vector<int> extra;
  int unused = 0;

  int total_extra() const;
  bool operator==(const PartitioningGenotype&) const = default;
};

// Permutation of every usable core (by CoreId).
struct PlacementGenotype {
  std::vector<CoreId> order;

  std::size_t size() const noexcept { return order.size(); }
  bool operator==(const PlacementGenotype&) const = default;
};

PlacementGenotype identity_placement(const Architecture& arch);

// Workload + architecture + the workload's minimum partitioning.
struct MappingProblem {
  Workload workload;
  Architecture arch;
  std::vector<int> min_cores;
  int c_min = 0;

  MappingProblem(Workload w, Architecture a);

  int total_cores() const noexcept { return static_cast<int>(arch.core_count()); }
  int spare_cores() const noexcept { return total_cores() - c_min; }
  std::size_t layer_count() const noexcept { return workload.layers.size(); }
};

// Phenotype: layer i owns layer_cores[i] (c_min_i + x_i consecutive
// entries of the placement). Slice j of a layer lives on layer_cores[i][j].
struct Mapping {
  PartitioningGenotype partitioning;
  PlacementGenotype placement;
  std::vector<std::vector<CoreId>> layer_cores;
  std::vector<CoreId> unused_cores;

  std::size_t used_cores() const;
};

std::vector<int> layer_sizes(const MappingProblem& p, const PartitioningGenotype& x);

enum class ViolationKind { budget, permutation, shape, feasibility };

struct Violation {
  ViolationKind kind;
  std::string message;
};

std::string to_string(ViolationKind kind);

// Every reason build_mapping would reject (x, omega); empty when valid.
std::vector<Violation> validate(const PartitioningGenotype& x, const PlacementGenotype& omega,
                                const MappingProblem& p);

// Throws GenotypeError (budget/permutation/shape) or InfeasibleError (layer
// capacity) on invalid input.
Mapping build_mapping(const PartitioningGenotype& x, const PlacementGenotype& omega, const MappingProblem& p);

// binom(C_tot - C_min + L, L). Throws InfeasibleError if C_tot < C_min.
BigInt count_partitionings(std::int64_t total_cores, std::int64_t min_cores, std::int64_t layers);

// C_tot! / (C_tot - C_used)!.
BigInt count_placements(std::int64_t total_cores, std::int64_t used_cores);

// log10 of a positive big integer, accurate to ~1e-12 relative.
double log10_big(const BigInt& value);

}  // namespace meshmap
