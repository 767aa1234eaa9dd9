#include "meshmap/genome.hpp"

#include <cmath>
#include <numeric>

#include "meshmap/errors.hpp"

namespace meshmap {

int PartitioningGenotype::total_extra() const { return std::accumulate(extra.begin(), extra.end(), 0); }

PlacementGenotype identity_placement(const Architecture& arch) {
  PlacementGenotype p;
  p.order.resize(arch.core_count());
  std::iota(p.order.begin(), p.order.end(), CoreId{0});
  return p;
}

MappingProblem::MappingProblem(Workload w, Architecture a)
    : workload(std::move(w)), arch(std::move(a)), min_cores(minimum_partitioning(workload, arch)) {
  c_min = std::accumulate(min_cores.begin(), min_cores.end(), 0);
}

std::size_t Mapping::used_cores() const {
  std::size_t n = 0;
  for (const auto& cores : layer_cores) n += cores.size();
  return n;
}

std::vector<int> layer_sizes(const MappingProblem& p, const PartitioningGenotype& x) {
  std::vector<int> sizes(p.min_cores);
  for (std::size_t i = 0; i < sizes.size() && i < x.extra.size(); ++i) sizes[i] += x.extra[i];
  return sizes;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::budget: return "budget";
    case ViolationKind::permutation: return "permutation";
    case ViolationKind::shape: return "shape";
    case ViolationKind::feasibility: return "feasibility";
  }
  return "unknown";
}

std::vector<Violation> validate(const PartitioningGenotype& x, const PlacementGenotype& omega,
                                const MappingProblem& p) {
  std::vector<Violation> out;
  const auto layers = p.layer_count();
  const auto total = static_cast<std::size_t>(p.total_cores());

  if (x.extra.size() != layers) {
    out.push_back({ViolationKind::shape, "partitioning has " + std::to_string(x.extra.size()) +
                                             " layer genes, workload has " + std::to_string(layers)});
  }
  bool negative = x.unused < 0;
  for (int e : x.extra) negative = negative || e < 0;
  if (negative) out.push_back({ViolationKind::shape, "partitioning genes must be non-negative"});
  if (x.total_extra() + x.unused != p.spare_cores()) {
    out.push_back({ViolationKind::budget, "sum(extra) + unused = " + std::to_string(x.total_extra() + x.unused) +
                                              ", expected C_tot - C_min = " + std::to_string(p.spare_cores())});
  }

  if (omega.order.size() != total) {
    out.push_back({ViolationKind::permutation, "placement has " + std::to_string(omega.order.size()) +
                                                   " entries, architecture has " + std::to_string(total) +
                                                   " usable cores"});
  } else {
    std::vector<bool> seen(total, false);
    for (auto id : omega.order) {
      if (id >= total) {
        out.push_back({ViolationKind::permutation, "core id " + std::to_string(id) + " out of range"});
        break;
      }
      if (seen[id]) {
        out.push_back({ViolationKind::permutation,
                       "core " + to_string(p.arch.core(id)) + " appears more than once"});
        break;
      }
      seen[id] = true;
    }
  }

  if (x.extra.size() == layers && !negative) {
    for (std::size_t i = 0; i < layers; ++i) {
      const auto cores = p.min_cores[i] + x.extra[i];
      if (!is_feasible(p.workload.layers[i], cores, p.arch)) {
        out.push_back({ViolationKind::feasibility,
                       "layer " + std::to_string(i) + " does not fit on " + std::to_string(cores) + " cores"});
      }
    }
  }
  return out;
}

Mapping build_mapping(const PartitioningGenotype& x, const PlacementGenotype& omega, const MappingProblem& p) {
  const auto violations = validate(x, omega, p);
  for (const auto& v : violations) {
    if (v.kind != ViolationKind::feasibility) throw GenotypeError(to_string(v.kind) + ": " + v.message);
  }
  if (!violations.empty()) throw InfeasibleError(violations.front().message);

  Mapping m;
  m.partitioning = x;
  m.placement = omega;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < p.layer_count(); ++i) {
    const auto n = static_cast<std::size_t>(p.min_cores[i] + x.extra[i]);
    m.layer_cores.emplace_back(omega.order.begin() + pos, omega.order.begin() + pos + n);
    pos += n;
  }
  m.unused_cores.assign(omega.order.begin() + pos, omega.order.end());
  return m;
}

BigInt count_partitionings(std::int64_t total_cores, std::int64_t min_cores, std::int64_t layers) {
  if (total_cores < min_cores) {
    throw InfeasibleError("C_tot = " + std::to_string(total_cores) + " is below C_min = " + std::to_string(min_cores));
  }
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  // binom(n, k) with n = spare + L, k = L, built incrementally (exact at every step).
  const std::int64_t n = total_cores - min_cores + layers;
  BigInt result = 1;
  for (std::int64_t i = 1; i <= layers; ++i) {
    result *= n - layers + i;
    result /= i;
  }
  return result;
}

BigInt count_placements(std::int64_t total_cores, std::int64_t used_cores) {
  if (used_cores < 0 || used_cores > total_cores) {
    throw ConfigError("need 0 <= C_used <= C_tot");
  }
  BigInt result = 1;
  for (std::int64_t i = 0; i < used_cores; ++i) result *= total_cores - i;
  return result;
}

double log10_big(const BigInt& value) {
  if (value <= 0) throw ConfigError("log10 of a non-positive value");
  const std::string digits = value.str();
  const auto lead = digits.substr(0, std::min<std::size_t>(17, digits.size()));
  return std::log10(std::stod(lead)) + static_cast<double>(digits.size() - lead.size());
}

}  // namespace meshmap
