#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "meshmap/arch.hpp"
#include "meshmap/errors.hpp"
#include "support.hpp"

using namespace meshmap;
using test::mesh;
using test::mesh_spec;

TEST_CASE("default chip has 152 usable cores and the 8192 neuron cap") {
  const Architecture a(default_architecture_spec());
  CHECK(a.core_count() == 152);
  CHECK(a.max_neurons_per_core() == 8192);
  CHECK(a.spec().disabled_cores.size() == 8);
  CHECK(a.usable_cores_on_chip(0) == 152);
}

TEST_CASE("usable core counts") {
  CHECK(mesh(1, 1, 4).core_count() == 4);
  CHECK(mesh(2, 2, 4, 2).core_count() == 32);
  const Architecture two(default_architecture_spec(2));
  CHECK(two.core_count() == 304);
  CHECK(two.usable_cores_on_chip(1) == 152);
}

TEST_CASE("cores are listed in canonical chip, y, x, c order") {
  const auto a = mesh(3, 2, 2, 2);
  const auto cores = a.cores();
  for (std::size_t i = 1; i < cores.size(); ++i) CHECK(cores[i - 1] < cores[i]);
  CHECK(cores[0] == CoreLocation{0, 0, 0, 1});
  CHECK(cores[1] == CoreLocation{0, 0, 0, 2});
  CHECK(cores[2] == CoreLocation{0, 1, 0, 1});
  CHECK(cores[6] == CoreLocation{0, 0, 1, 1});
  for (CoreId id = 0; id < a.core_count(); ++id) CHECK(a.core_id(a.core(id)) == id);
}

TEST_CASE("invalid specs are rejected") {
  auto s = mesh_spec(1, 1, 1);
  s.disabled_cores = {{0, 0, 0, 1}};
  CHECK_THROWS_AS(Architecture{s}, ConfigError);  // zero usable cores

  s = mesh_spec(2, 2, 4);
  s.disabled_cores = {{0, 0, 0, 1}, {0, 0, 0, 1}};
  CHECK_THROWS_AS(Architecture{s}, ConfigError);

  s = mesh_spec(2, 2, 4);
  s.disabled_cores = {{0, 2, 0, 1}};
  CHECK_THROWS_AS(Architecture{s}, ConfigError);

  s = mesh_spec(0, 2, 4);
  CHECK_THROWS_AS(Architecture{s}, ConfigError);

  s = mesh_spec(3, 3, 4, 2);
  s.interchip_links = {{0, 1, 1, 1, 0, 1}};  // (1,1) is not on the boundary
  CHECK_THROWS_AS(Architecture{s}, ConfigError);
}

TEST_CASE("same-router route uses only the attach links") {
  const Architecture a(default_architecture_spec());
  const auto r = a.route({0, 1, 0, 1}, {0, 1, 0, 2});
  REQUIRE(r.size() == 2);
  CHECK(r[0].kind == LinkKind::core_to_router);
  CHECK(r[1].kind == LinkKind::router_to_core);
}

TEST_CASE("XY route goes east first, then north") {
  const auto a = mesh(4, 4, 4);
  const auto r = a.route({0, 0, 0, 1}, {0, 2, 1, 1});
  REQUIRE(r.size() == 5);
  CHECK(r[0] == Link{LinkKind::core_to_router, {0, 0, 0, 1}, {0, 0, 0, 0}});
  CHECK(r[1] == Link{LinkKind::router_to_router, {0, 0, 0, 0}, {0, 1, 0, 0}});
  CHECK(r[2] == Link{LinkKind::router_to_router, {0, 1, 0, 0}, {0, 2, 0, 0}});
  CHECK(r[3] == Link{LinkKind::router_to_router, {0, 2, 0, 0}, {0, 2, 1, 0}});
  CHECK(r[4] == Link{LinkKind::router_to_core, {0, 2, 1, 0}, {0, 2, 1, 1}});
  CHECK(direction_of(r[1]) == Direction::east);
  CHECK(direction_of(r[3]) == Direction::north);
  CHECK(a.route({0, 1, 1, 1}, {0, 1, 1, 1}).empty());
}

TEST_CASE("hop distance") {
  const Architecture a(default_architecture_spec());
  CHECK(a.hop_distance({0, 0, 0, 1}, {0, 3, 4, 2}) == 7);
  CHECK(a.hop_distance({0, 2, 2, 1}, {0, 2, 2, 1}) == 0);
  CHECK(a.hop_distance({0, 1, 1, 1}, {0, 1, 1, 4}) == 0);
}

TEST_CASE("route length equals hop distance and only uses declared links") {
  for (int w = 1; w <= 4; ++w) {
    for (int h = 1; h <= 4; ++h) {
      const auto a = mesh(w, h, 2);
      const std::set<Link> declared(a.links().begin(), a.links().end());
      for (const auto& src : a.cores()) {
        for (const auto& dst : a.cores()) {
          const auto r = a.route(src, dst);
          int mesh_hops = 0;
          for (const auto& l : r) {
            CHECK(declared.count(l) == 1);
            if (l.kind == LinkKind::router_to_router) {
              ++mesh_hops;
              CHECK(std::abs(l.from.x - l.to.x) + std::abs(l.from.y - l.to.y) == 1);
            }
          }
          CHECK(mesh_hops == a.hop_distance(src, dst));
          CHECK(r == a.route(src, dst));
        }
      }
    }
  }
}

TEST_CASE("x hops precede y hops") {
  const auto a = mesh(4, 4, 1);
  for (const auto& src : a.cores()) {
    for (const auto& dst : a.cores()) {
      bool seen_y = false;
      for (const auto& l : a.route(src, dst)) {
        if (l.kind != LinkKind::router_to_router) continue;
        const bool y_move = l.from.x == l.to.x;
        CHECK_FALSE((seen_y && !y_move));
        seen_y = seen_y || y_move;
      }
    }
  }
}

TEST_CASE("link indices put attach links first") {
  const auto a = mesh(2, 2, 4);
  for (CoreId k = 0; k < a.core_count(); ++k) {
    CHECK(a.links()[2 * k] == Link{LinkKind::core_to_router, a.core(k), a.core(k).router()});
    CHECK(a.links()[2 * k + 1] == Link{LinkKind::router_to_core, a.core(k).router(), a.core(k)});
    CHECK(*a.link_index(a.links()[2 * k]) == 2 * k);
  }
}

TEST_CASE("cross-chip routes cross the declared link") {
  const Architecture a(default_architecture_spec(2));
  const CoreLocation src{0, 1, 1, 1}, dst{1, 3, 4, 2};
  const auto r = a.route(src, dst);
  int crossings = 0;
  for (const auto& l : r) {
    if (l.kind != LinkKind::inter_chip) continue;
    ++crossings;
    CHECK(l.from == CoreLocation{0, 7, 2, 0});
    CHECK(l.to == CoreLocation{1, 0, 2, 0});
  }
  CHECK(crossings == 1);
  // (1,1)->(7,2): 7 hops; (0,2)->(3,4): 5 hops; one inter-chip link.
  CHECK(a.hop_distance(src, dst) == 7 + 1 + 5);
  CHECK(a.chip_path(0, 1) == std::vector<int>{0, 1});
}

TEST_CASE("chip pairs without a path are unroutable") {
  auto s = mesh_spec(2, 2, 1, 3);
  s.interchip_links = {{0, 1, 0, 1, 0, 0}};
  const Architecture a(s);
  CHECK_THROWS_AS(a.route({0, 0, 0, 1}, {2, 0, 0, 1}), RoutingError);
  CHECK_THROWS_AS(a.hop_distance({0, 0, 0, 1}, {2, 0, 0, 1}), RoutingError);
  CHECK_NOTHROW(a.route({0, 0, 0, 1}, {1, 1, 1, 1}));
}

TEST_CASE("multi-hop chip paths prefer lower chip indices") {
  auto s = mesh_spec(2, 2, 1, 4);
  // 0-1, 0-2, 1-3, 2-3: both 0->1->3 and 0->2->3 are shortest.
  s.interchip_links = {{0, 1, 0, 1, 0, 0}, {0, 0, 1, 2, 0, 0}, {1, 1, 1, 3, 0, 1}, {2, 1, 0, 3, 1, 1}};
  const Architecture a(s);
  CHECK(a.chip_path(0, 3) == std::vector<int>{0, 1, 3});
}
