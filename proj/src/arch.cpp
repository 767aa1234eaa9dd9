#include "meshmap/arch.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <deque>
#include <set>
#include <sstream>

#include "meshmap/errors.hpp"

namespace meshmap {

namespace {

constexpr std::array<Direction, 4> kDirections = {Direction::east, Direction::west, Direction::north,
                                                  Direction::south};

std::pair<int, int> step(Direction d) {
  switch (d) {
    case Direction::east: return {1, 0};
    case Direction::west: return {-1, 0};
    case Direction::north: return {0, 1};
    case Direction::south: return {0, -1};
  }
  return {0, 0};
}

bool on_boundary(const ArchitectureSpec& s, int x, int y) {
  return x == 0 || y == 0 || x == s.mesh_width - 1 || y == s.mesh_height - 1;
}

void validate_spec(const ArchitectureSpec& s) {
  if (s.chips < 1) throw ConfigError("must be >= 1", "chips");
  if (s.mesh_width < 1) throw ConfigError("must be >= 1", "mesh_width");
  if (s.mesh_height < 1) throw ConfigError("must be >= 1", "mesh_height");
  if (s.cores_per_router < 1) throw ConfigError("must be >= 1", "cores_per_router");
  if (s.max_neurons_per_core < 1) throw ConfigError("must be >= 1", "max_neurons_per_core");
  if (s.core_memory_words < 1) throw ConfigError("must be >= 1", "core_memory_words");
  if (s.interchip_hop_penalty < 0) throw ConfigError("must be >= 0", "interchip_hop_penalty");
  s.rates.validate();

  std::set<CoreLocation> seen;
  for (const auto& d : s.disabled_cores) {
    if (d.chip < 0 || d.chip >= s.chips || d.x < 0 || d.x >= s.mesh_width || d.y < 0 ||
        d.y >= s.mesh_height || d.c < 1 || d.c > s.cores_per_router) {
      throw ConfigError("disabled core " + to_string(d) + " is out of bounds", "disabled_cores");
    }
    if (!seen.insert(d).second) {
      throw ConfigError("duplicate disabled core " + to_string(d), "disabled_cores");
    }
  }

  std::set<std::pair<int, int>> pairs;
  for (const auto& l : s.interchip_links) {
    auto router_ok = [&](int chip, int x, int y) {
      return chip >= 0 && chip < s.chips && x >= 0 && x < s.mesh_width && y >= 0 &&
             y < s.mesh_height && on_boundary(s, x, y);
    };
    if (l.chip_a == l.chip_b || !router_ok(l.chip_a, l.x_a, l.y_a) ||
        !router_ok(l.chip_b, l.x_b, l.y_b)) {
      throw ConfigError("inter-chip link must join boundary routers of two distinct chips",
                        "interchip_links");
    }
    auto key = std::minmax(l.chip_a, l.chip_b);
    if (!pairs.insert(key).second) {
      throw ConfigError("more than one link declared between chips " + std::to_string(key.first) +
                            " and " + std::to_string(key.second),
                        "interchip_links");
    }
  }
}

}  // namespace

std::string to_string(const CoreLocation& loc) {
  std::ostringstream os;
  os << '(' << loc.chip << ',' << loc.x << ',' << loc.y << ',' << loc.c << ')';
  return os.str();
}

std::string to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::core_to_router: return "core_to_router";
    case LinkKind::router_to_core: return "router_to_core";
    case LinkKind::router_to_router: return "router_to_router";
    case LinkKind::inter_chip: return "inter_chip";
  }
  return "unknown";
}

std::string to_string(const Link& link) {
  return to_string(link.kind) + ' ' + to_string(link.from) + "->" + to_string(link.to);
}

Direction direction_of(const Link& link) {
  if (link.to.x > link.from.x) return Direction::east;
  if (link.to.x < link.from.x) return Direction::west;
  if (link.to.y > link.from.y) return Direction::north;
  return Direction::south;
}

ArchitectureSpec default_architecture_spec(int chips) {
  ArchitectureSpec spec;
  spec.chips = chips;
  for (int chip = 0; chip < chips; ++chip) {
    for (int x : {0, spec.mesh_width - 1}) {
      for (int c = 1; c <= spec.cores_per_router; ++c) spec.disabled_cores.push_back({chip, x, 0, c});
    }
  }
  return spec;
}

Architecture::Architecture(ArchitectureSpec spec) : spec_(std::move(spec)) {
  validate_spec(spec_);
  const int w = spec_.mesh_width, h = spec_.mesh_height, cpr = spec_.cores_per_router;

  if (spec_.interchip_links.empty()) {
    for (int chip = 0; chip + 1 < spec_.chips; ++chip) {
      spec_.interchip_links.push_back({chip, w - 1, h / 2, chip + 1, 0, h / 2});
    }
  }

  const std::set<CoreLocation> disabled(spec_.disabled_cores.begin(), spec_.disabled_cores.end());
  const std::size_t routers = static_cast<std::size_t>(spec_.chips) * w * h;
  slot_to_core_.assign(routers * cpr, -1);
  chip_core_counts_.assign(spec_.chips, 0);
  for (int chip = 0; chip < spec_.chips; ++chip) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 1; c <= cpr; ++c) {
          CoreLocation loc{chip, x, y, c};
          if (disabled.contains(loc)) continue;
          slot_to_core_[router_index(chip, x, y) * cpr + (c - 1)] = static_cast<std::int32_t>(cores_.size());
          cores_.push_back(loc);
          ++chip_core_counts_[chip];
        }
      }
    }
  }
  if (cores_.empty()) throw ConfigError("architecture has zero usable cores", "disabled_cores");

  auto add_link = [this](Link link) {
    link_lookup_.emplace(link, links_.size());
    links_.push_back(link);
  };
  // Attach links: index 2k is core k -> router, 2k+1 is router -> core k.
  for (const auto& loc : cores_) {
    add_link({LinkKind::core_to_router, loc, loc.router()});
    add_link({LinkKind::router_to_core, loc.router(), loc});
  }
  mesh_slot_to_link_.assign(routers * kDirections.size(), -1);
  for (int chip = 0; chip < spec_.chips; ++chip) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (std::size_t d = 0; d < kDirections.size(); ++d) {
          auto [dx, dy] = step(kDirections[d]);
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          mesh_slot_to_link_[router_index(chip, x, y) * kDirections.size() + d] =
              static_cast<std::int64_t>(links_.size());
          add_link({LinkKind::router_to_router, {chip, x, y, 0}, {chip, nx, ny, 0}});
        }
      }
    }
  }
  for (const auto& l : spec_.interchip_links) {
    const CoreLocation a{l.chip_a, l.x_a, l.y_a, 0}, b{l.chip_b, l.x_b, l.y_b, 0};
    interchip_lookup_[{l.chip_a, l.chip_b}] = links_.size();
    add_link({LinkKind::inter_chip, a, b});
    interchip_lookup_[{l.chip_b, l.chip_a}] = links_.size();
    add_link({LinkKind::inter_chip, b, a});
  }

  // Chip-level BFS, neighbours visited in ascending order.
  std::vector<std::vector<int>> adj(spec_.chips);
  for (const auto& [pair, idx] : interchip_lookup_) adj[pair.first].push_back(pair.second);
  for (auto& a : adj) std::sort(a.begin(), a.end());
  chip_paths_.assign(spec_.chips, std::vector<std::vector<int>>(spec_.chips));
  for (int src = 0; src < spec_.chips; ++src) {
    std::vector<int> parent(spec_.chips, -2);
    parent[src] = -1;
    std::deque<int> queue{src};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (parent[v] != -2) continue;
        parent[v] = u;
        queue.push_back(v);
      }
    }
    for (int dst = 0; dst < spec_.chips; ++dst) {
      if (parent[dst] == -2) continue;
      std::vector<int> path;
      for (int v = dst; v != -1; v = parent[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      chip_paths_[src][dst] = std::move(path);
    }
  }
}

std::optional<CoreId> Architecture::find_core(const CoreLocation& loc) const {
  if (!in_bounds(loc) || loc.c < 1) return std::nullopt;
  const auto id = slot_to_core_[router_index(loc.chip, loc.x, loc.y) * spec_.cores_per_router + (loc.c - 1)];
  if (id < 0) return std::nullopt;
  return static_cast<CoreId>(id);
}

CoreId Architecture::core_id(const CoreLocation& loc) const {
  auto id = find_core(loc);
  if (!id) throw ConfigError("core " + to_string(loc) + " is not a usable core");
  return *id;
}

bool Architecture::in_bounds(const CoreLocation& loc) const noexcept {
  return loc.chip >= 0 && loc.chip < spec_.chips && loc.x >= 0 && loc.x < spec_.mesh_width &&
         loc.y >= 0 && loc.y < spec_.mesh_height && loc.c >= 0 && loc.c <= spec_.cores_per_router;
}

std::optional<std::size_t> Architecture::link_index(const Link& link) const {
  auto it = link_lookup_.find(link);
  if (it == link_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Architecture::mesh_link_index(int chip, int x, int y, Direction d) const {
  const auto idx = mesh_slot_to_link_[router_index(chip, x, y) * kDirections.size() + static_cast<std::size_t>(d)];
  return static_cast<std::size_t>(idx);
}

void Architecture::append_xy(std::vector<std::size_t>& out, CoreLocation from, const CoreLocation& to) const {
  while (from.x != to.x) {
    const auto d = to.x > from.x ? Direction::east : Direction::west;
    out.push_back(mesh_link_index(from.chip, from.x, from.y, d));
    from.x += step(d).first;
  }
  while (from.y != to.y) {
    const auto d = to.y > from.y ? Direction::north : Direction::south;
    out.push_back(mesh_link_index(from.chip, from.x, from.y, d));
    from.y += step(d).second;
  }
}

std::vector<int> Architecture::chip_path(int from, int to) const {
  return chip_paths_.at(from).at(to);
}

std::optional<std::pair<CoreLocation, CoreLocation>> Architecture::interchip_endpoints(int from, int to) const {
  auto it = interchip_lookup_.find({from, to});
  if (it == interchip_lookup_.end()) return std::nullopt;
  const auto& link = links_[it->second];
  return std::pair{link.from, link.to};
}

std::vector<std::size_t> Architecture::route_links(CoreId a, CoreId b) const {
  std::vector<std::size_t> out;
  if (a == b) return out;
  const auto& src = cores_.at(a);
  const auto& dst = cores_.at(b);
  out.push_back(2 * static_cast<std::size_t>(a));
  CoreLocation here = src.router();
  if (src.chip != dst.chip) {
    const auto& path = chip_paths_[src.chip][dst.chip];
    if (path.empty()) {
      throw RoutingError("no inter-chip route from chip " + std::to_string(src.chip) + " to chip " +
                         std::to_string(dst.chip));
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const auto idx = interchip_lookup_.at({path[i], path[i + 1]});
      append_xy(out, here, links_[idx].from);
      out.push_back(idx);
      here = links_[idx].to;
    }
  }
  append_xy(out, here, dst.router());
  out.push_back(2 * static_cast<std::size_t>(b) + 1);
  return out;
}

std::vector<Link> Architecture::route(const CoreLocation& a, const CoreLocation& b) const {
  const auto ids = route_links(core_id(a), core_id(b));
  std::vector<Link> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(links_[id]);
  return out;
}

int Architecture::hop_distance(const CoreLocation& a, const CoreLocation& b) const {
  auto manhattan = [](const CoreLocation& p, const CoreLocation& q) {
    return std::abs(p.x - q.x) + std::abs(p.y - q.y);
  };
  if (a.chip == b.chip) return manhattan(a, b);
  const auto& path = chip_paths_.at(a.chip).at(b.chip);
  if (path.empty()) {
    throw RoutingError("no inter-chip route from chip " + std::to_string(a.chip) + " to chip " +
                       std::to_string(b.chip));
  }
  int hops = 0;
  CoreLocation here = a;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto& link = links_[interchip_lookup_.at({path[i], path[i + 1]})];
    hops += manhattan(here, link.from) + spec_.interchip_hop_penalty;
    here = link.to;
  }
  return hops + manhattan(here, b);
}

Architecture build_architecture(const ArchitectureSpec& spec) { return Architecture(spec); }

void ModelRates::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError("must be > 0", std::string("rates.") + name);
  };
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0)) throw ConfigError("must be >= 0", std::string("rates.") + name);
  };
  positive(synops_rate, "synops_rate");
  positive(synmem_rate, "synmem_rate");
  positive(dendops_rate, "dendops_rate");
  positive(link_bandwidth, "link_bandwidth");
  positive(interchip_bandwidth, "interchip_bandwidth");
  nonneg(barrier_overhead_us, "barrier_overhead_us");
  nonneg(axon_row_words, "axon_row_words");
  nonneg(static_power_per_core_w, "static_power_per_core_w");
  nonneg(chip_idle_power_w, "chip_idle_power_w");
  nonneg(e_synop_j, "e_synop_j");
  nonneg(e_packet_hop_j, "e_packet_hop_j");
  nonneg(e_neuron_update_j, "e_neuron_update_j");
}

}  // namespace meshmap
