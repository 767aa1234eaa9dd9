#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "meshmap/operators.hpp"
#include "support.hpp"

using namespace meshmap;
using test::genotype;

namespace {

bool is_permutation_of(const PlacementGenotype& a, const PlacementGenotype& b) {
  auto x = a.order, y = b.order;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

PlacementGenotype iota(std::size_t n) {
  PlacementGenotype p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), CoreId{0});
  return p;
}

}  // namespace

TEST_CASE("p_mut = 0 leaves the partitioning unchanged") {
  PartitionMutationParams params;
  params.p_mut = 0.0;
  Rng rng(1);
  const auto x = genotype({1, 2, 3}, 4);
  for (int i = 0; i < 100; ++i) CHECK(mutate_partitioning(x, params, rng) == x);
}

TEST_CASE("forced addition and redistribution") {
  auto x = genotype({0, 0}, 3);
  add_cores(x, 0, 2);
  CHECK(x == genotype({2, 0}, 1));
  add_cores(x, 1, 5);
  CHECK(x == genotype({2, 1}, 0));
  redistribute_cores(x, 0, 5, 1);
  CHECK(x == genotype({0, 3}, 0));
  redistribute_cores(x, 1, 2, std::nullopt);
  CHECK(x == genotype({0, 1}, 2));
}

TEST_CASE("additions from an empty pool are capped to zero") {
  PartitionMutationParams params;
  params.p_mut = 1.0;
  params.p_add = 1.0;
  Rng rng(3);
  const auto x = genotype({2, 0, 5}, 0);
  for (int i = 0; i < 100; ++i) CHECK(mutate_partitioning(x, params, rng) == x);
}

TEST_CASE("partitioning mutation preserves the budget identity") {
  Rng rng(11);
  for (double p_add : {0.0, 0.5, 1.0}) {
    for (int delta : {1, 2, 5}) {
      PartitionMutationParams params{1.0, p_add, delta};
      auto x = genotype({0, 1, 0, 4}, 3);
      const int total = x.total_extra() + x.unused;
      for (int i = 0; i < 2000; ++i) {
        x = mutate_partitioning(x, params, rng);
        CHECK(x.total_extra() + x.unused == total);
        CHECK(x.unused >= 0);
        for (int e : x.extra) CHECK(e >= 0);
      }
    }
  }
}

TEST_CASE("redistribution targets every other layer and the pool") {
  PartitionMutationParams params{1.0, 0.0, 1};
  Rng rng(5);
  std::map<int, int> hits;  // receiving layer, -1 = pool
  for (int i = 0; i < 3000; ++i) {
    // Only layer 1 has cores to give.
    const auto y = mutate_partitioning(genotype({0, 1, 0}, 0), params, rng);
    if (y.unused == 1) ++hits[-1];
    if (y.extra[0] == 1) ++hits[0];
    if (y.extra[2] == 1) ++hits[2];
    CHECK(y.extra[1] <= 1);
  }
  CHECK(hits.size() == 3);
  // A receiving layer visited later may pass the core on, so the pool
  // collects more than a third.
  for (auto [target, n] : hits) CHECK(n > 400);
}

TEST_CASE("unit inversion is the identity") {
  auto p = iota(10);
  for (std::size_t s = 0; s < 10; ++s) {
    invert_window(p.order, s, 1);
    CHECK(p == iota(10));
  }
}

TEST_CASE("inversion and scramble windows are truncated at the end") {
  auto p = iota(6);
  invert_window(p.order, 4, 5);
  CHECK(p.order == std::vector<CoreId>{0, 1, 2, 3, 5, 4});
  Rng rng(2);
  auto q = iota(6);
  scramble_window(q.order, 3, 100, rng);
  CHECK(std::equal(q.order.begin(), q.order.begin() + 3, iota(6).order.begin()));
  CHECK(is_permutation_of(q, iota(6)));
}

TEST_CASE("a single swap on two cores exchanges the first and last entries") {
  Rng rng(12);
  auto p = iota(2);
  active_global_swap(p.order, 1, 1, rng);
  CHECK(p.order == std::vector<CoreId>{1, 0});
}

TEST_CASE("active-global swap touches the active prefix") {
  Rng rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    auto p = iota(20);
    active_global_swap(p.order, 3, 1, rng);  // one swap
    std::vector<std::size_t> moved;
    for (std::size_t i = 0; i < 20; ++i)
      if (p.order[i] != i) moved.push_back(i);
    REQUIRE(moved.size() == 2);
    CHECK(moved[0] < 3);
  }
}

TEST_CASE("placement mutation keeps the inactive tail except through swaps") {
  PlacementMutationParams params{0.0, 0.5, 1.0};  // inversion or scramble only
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = iota(30);
    PlacementMove move{};
    const auto q = mutate_placement(p, 10, params, rng, move);
    CHECK(move != PlacementMove::active_global_swap);
    // A window starting inside the active prefix reaches at most 10 past it.
    CHECK(std::equal(q.order.begin() + 20, q.order.end(), p.order.begin() + 20));
    CHECK(is_permutation_of(p, q));
  }
}

TEST_CASE("operator selection follows the probabilities") {
  PlacementMutationParams params{0.2, 0.5, 0.25};
  Rng rng(8);
  std::map<PlacementMove, int> n;
  const auto p = iota(40);
  for (int i = 0; i < 10000; ++i) {
    PlacementMove move{};
    mutate_placement(p, 40, params, rng, move);
    ++n[move];
  }
  CHECK(n[PlacementMove::active_global_swap] == doctest::Approx(2000).epsilon(0.1));
  CHECK(n[PlacementMove::inversion] == doctest::Approx(5000).epsilon(0.05));
  CHECK(n[PlacementMove::scramble] == doctest::Approx(3000).epsilon(0.1));
}

TEST_CASE("operators are deterministic in the seed") {
  const auto p = iota(50);
  PlacementMutationParams params;
  PartitionMutationParams pparams{0.7, 0.5, 3};
  Rng a(123), b(123);
  for (int i = 0; i < 200; ++i) {
    CHECK(mutate_placement(p, 17, params, a) == mutate_placement(p, 17, params, b));
    const auto x = genotype({1, 2, 3}, 5);
    CHECK(mutate_partitioning(x, pparams, a) == mutate_partitioning(x, pparams, b));
  }
}

TEST_CASE("reorder with an unchanged partitioning is the identity") {
  const std::vector<int> mins{1, 2, 1};
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto omega = iota(12);
    rng.shuffle(std::span<CoreId>(omega.order));
    const auto x = genotype({1, 0, 2}, 5);
    CHECK(reorder_placement(omega, x, x, mins) == omega);
  }
}

TEST_CASE("reorder keeps leading cores of shrinking layers") {
  // Cores A..F = 0..5. Layer sizes 3,1 -> 2,2 with min (1,1).
  const PlacementGenotype omega{{0, 1, 2, 3, 4, 5}};
  const std::vector<int> mins{1, 1};
  const auto out = reorder_placement(omega, genotype({2, 0}, 2), genotype({1, 1}, 2), mins);
  // Layer 0 keeps (A,B) and releases C; pool = (E,F) then C; layer 1 grows by E.
  CHECK(out.order == std::vector<CoreId>{0, 1, 3, 4, 5, 2});
}

TEST_CASE("reorder grows layers from the pool in order") {
  // Block (A,B), pool (D,E): growing by one takes D.
  const PlacementGenotype omega{{0, 1, 3, 4}};
  const std::vector<int> mins{2};
  const auto out = reorder_placement(omega, genotype({0}, 2), genotype({1}, 1), mins);
  CHECK(out.order == std::vector<CoreId>{0, 1, 3, 4});
}

TEST_CASE("reorder preserves every layer's cores as far as possible") {
  Rng rng(10);
  const std::vector<int> mins{1, 1, 2};
  for (int trial = 0; trial < 2000; ++trial) {
    const int total = 12, spare = total - 4;
    auto draw = [&] {
      std::vector<int> e(3);
      int left = spare;
      for (auto& v : e) {
        v = rng.uniform_int(0, left);
        left -= v;
      }
      return genotype(e, left);
    };
    const auto x_old = draw(), x_new = draw();
    auto omega = iota(total);
    rng.shuffle(std::span<CoreId>(omega.order));
    const auto out = reorder_placement(omega, x_old, x_new, mins);
    REQUIRE(is_permutation_of(out, omega));
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto so = static_cast<std::size_t>(mins[i] + x_old.extra[i]);
      const auto sn = static_cast<std::size_t>(mins[i] + x_new.extra[i]);
      const std::set<CoreId> before(omega.order.begin() + a, omega.order.begin() + a + so);
      std::size_t overlap = 0;
      for (std::size_t j = b; j < b + sn; ++j) overlap += before.count(out.order[j]);
      CHECK(overlap == std::min(so, sn));
      a += so;
      b += sn;
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS(PartitionMutationParams{1.5, 0.5, 2}.validate());
  CHECK_THROWS(PartitionMutationParams{0.5, 0.5, 0}.validate());
  CHECK_THROWS(PlacementMutationParams{0.6, 0.6, 0.25}.validate());
  CHECK_THROWS(PlacementMutationParams{0.4, 0.3, 0.0}.validate());
  CHECK_NOTHROW(PlacementMutationParams{}.validate());
  CHECK_NOTHROW(PartitionMutationParams{}.validate());
}
