#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meshmap/model_rates.hpp"

namespace meshmap {

// Index of a usable core in Architecture::cores() (canonical order).
using CoreId = std::uint32_t;

// Core slot `c` (1-based) attached to router (x, y) of `chip`.
// A location with c == 0 denotes the router itself (used for link endpoints).
// Ordering is the canonical core order: chip, then y, then x, then c.
struct CoreLocation {
  int chip = 0;
  int x = 0;
  int y = 0;
  int c = 1;

  bool operator==(const CoreLocation&) const = default;
  std::strong_ordering operator<=>(const CoreLocation& o) const {
    if (auto r = chip <=> o.chip; r != 0) return r;
    if (auto r = y <=> o.y; r != 0) return r;
    if (auto r = x <=> o.x; r != 0) return r;
    return c <=> o.c;
  }

  CoreLocation router() const { return {chip, x, y, 0}; }
  bool same_router(const CoreLocation& o) const {
    return chip == o.chip && x == o.x && y == o.y;
  }
};

std::string to_string(const CoreLocation& loc);

enum class LinkKind { core_to_router, router_to_core, router_to_router, inter_chip };

std::string to_string(LinkKind kind);

// Directed link. Router endpoints carry c == 0.
struct Link {
  LinkKind kind = LinkKind::router_to_router;
  CoreLocation from;
  CoreLocation to;

  bool operator==(const Link&) const = default;
  auto operator<=>(const Link& o) const {
    if (auto r = static_cast<int>(kind) <=> static_cast<int>(o.kind); r != 0) return r;
    if (auto r = from <=> o.from; r != 0) return r;
    return to <=> o.to;
  }
};

std::string to_string(const Link& link);

enum class Direction { east, west, north, south };

// Compass direction of a same-chip router-router link (east = +x, north = +y).
Direction direction_of(const Link& link);

// Bidirectional link between two boundary routers of different chips.
struct InterchipLinkSpec {
  int chip_a = 0, x_a = 0, y_a = 0;
  int chip_b = 1, x_b = 0, y_b = 0;
  bool operator==(const InterchipLinkSpec&) const = default;
};

struct ArchitectureSpec {
  int chips = 1;
  int mesh_width = 8;
  int mesh_height = 5;
  int cores_per_router = 4;
  std::vector<CoreLocation> disabled_cores;
  std::int64_t max_neurons_per_core = 8192;
  std::int64_t core_memory_words = std::int64_t{1} << 17;
  int interchip_hop_penalty = 1;
  ModelRates rates;
  // Empty with chips > 1 means: chain chip i (east-middle router) to
  // chip i+1 (west-middle router).
  std::vector<InterchipLinkSpec> interchip_links;
};

// Default substrate: one 8x5-router chip with four cores per router and the
// two routers (0,0) and (7,0) left without neuromorphic cores, giving 152
// usable cores.
ArchitectureSpec default_architecture_spec(int chips = 1);

// Immutable multi-chip 2D mesh with deterministic XY routing.
class Architecture {
 public:
  explicit Architecture(ArchitectureSpec spec);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  const ModelRates& rates() const noexcept { return spec_.rates; }
  int chips() const noexcept { return spec_.chips; }
  int mesh_width() const noexcept { return spec_.mesh_width; }
  int mesh_height() const noexcept { return spec_.mesh_height; }
  int cores_per_router() const noexcept { return spec_.cores_per_router; }
  std::int64_t max_neurons_per_core() const noexcept { return spec_.max_neurons_per_core; }
  std::int64_t core_memory_words() const noexcept { return spec_.core_memory_words; }

  // Usable cores in canonical order; CoreId indexes this span.
  std::span<const CoreLocation> cores() const noexcept { return cores_; }
  std::size_t core_count() const noexcept { return cores_.size(); }
  const CoreLocation& core(CoreId id) const { return cores_.at(id); }
  // Throws ConfigError when `loc` is not a usable core.
  CoreId core_id(const CoreLocation& loc) const;
  std::optional<CoreId> find_core(const CoreLocation& loc) const;

  bool in_bounds(const CoreLocation& loc) const noexcept;
  bool is_usable(const CoreLocation& loc) const noexcept { return find_core(loc).has_value(); }
  std::size_t usable_cores_on_chip(int chip) const { return chip_core_counts_.at(chip); }

  // Every directed link of the substrate; routes only use these.
  const std::vector<Link>& links() const noexcept { return links_; }
  std::optional<std::size_t> link_index(const Link& link) const;

  // XY dimension-order route between two usable cores. Empty when a == b.
  std::vector<Link> route(const CoreLocation& a, const CoreLocation& b) const;
  // Same route expressed as indices into links().
  std::vector<std::size_t> route_links(CoreId a, CoreId b) const;

  // Router-router hops between the routers of a and b. Cross-chip pairs add
  // interchip_hop_penalty per inter-chip link traversed.
  int hop_distance(const CoreLocation& a, const CoreLocation& b) const;

  // Chips visited from `from` to `to` (inclusive), shortest over declared
  // inter-chip links; ties resolved toward lower chip indices.
  std::vector<int> chip_path(int from, int to) const;

  // The declared link endpoints leaving chip `from` toward adjacent `to`.
  std::optional<std::pair<CoreLocation, CoreLocation>> interchip_endpoints(int from, int to) const;

 private:
  std::size_t router_index(int chip, int x, int y) const {
    return (static_cast<std::size_t>(chip) * spec_.mesh_height + y) * spec_.mesh_width + x;
  }
  void append_xy(std::vector<std::size_t>& out, CoreLocation from, const CoreLocation& to) const;
  std::size_t mesh_link_index(int chip, int x, int y, Direction d) const;

  ArchitectureSpec spec_;
  std::vector<CoreLocation> cores_;
  std::vector<std::int32_t> slot_to_core_;  // per (router, slot) -> CoreId or -1
  std::vector<std::size_t> chip_core_counts_;
  std::vector<Link> links_;
  std::map<Link, std::size_t> link_lookup_;
  std::vector<std::int64_t> mesh_slot_to_link_;  // per (router, direction)
  std::map<std::pair<int, int>, std::size_t> interchip_lookup_;
  std::vector<std::vector<std::vector<int>>> chip_paths_;  // [from][to], empty if unreachable
};

// Validates `spec` and builds the architecture. Throws ConfigError on
// out-of-bounds or duplicate disabled cores, zero usable cores, or bad links.
Architecture build_architecture(const ArchitectureSpec& spec);

}  // namespace meshmap
