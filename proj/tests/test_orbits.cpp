#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include <pseudoshift/errors.hpp>
#include <pseudoshift/orbits.hpp>

#include "fixture_maps.hpp"

using namespace pseudoshift;

namespace {

// phi^{-1}(k) by scanning 1..bound; 0 when nothing maps to k
uint64_t scan_back(const SelfMapRule& m, uint64_t k, uint64_t bound) {
  for (uint64_t l = 1; l <= bound; ++l)
    if (m.apply(l) == k) return l;
  return 0;
}

// points phi^{jn}(k) for |j| small, backward by scan
std::set<uint64_t> stride_window(const SelfMapRule& m, uint64_t k, uint64_t n, uint64_t steps, uint64_t bound) {
  std::set<uint64_t> out{k};
  uint64_t f = k;
  for (uint64_t t = 1; t <= steps * n; ++t) {
    f = m.apply(f);
    if (t % n == 0) out.insert(f);
  }
  uint64_t b = k;
  for (uint64_t t = 1; t <= steps * n && b; ++t) {
    b = scan_back(m, b, bound);
    if (b && t % n == 0) out.insert(b);
  }
  return out;
}

// largest n <= n_max whose stride window, k itself excluded, meets F
uint64_t escape_oracle(const SelfMapRule& m, uint64_t k, const std::set<uint64_t>& F, uint64_t n_max) {
  uint64_t last = 0;
  for (uint64_t n = 1; n <= n_max; ++n) {
    auto w = stride_window(m, k, n, 40, 2000);
    w.erase(k);
    for (uint64_t f : F)
      if (w.count(f)) last = n;
  }
  return last;
}

}  // namespace

TEST_CASE("bi-orbit slices") {
  auto s = bi_orbit(fixtures::successor(), 5, 1, 4, 1000);
  CHECK(s.forward == std::vector<uint64_t>{6, 7, 8, 9});
  CHECK(s.backward == std::vector<uint64_t>{4, 3, 2, 1});
  CHECK(s.generator_found);
  CHECK(s.backward_end == "sentinel");
  CHECK(s.min() == 1);

  auto t = bi_orbit(fixtures::successor(), 8, 3, 2, 1000);
  CHECK(t.forward == std::vector<uint64_t>{11, 14});
  CHECK(t.backward == std::vector<uint64_t>{5, 2});

  auto e = bi_orbit(fixtures::mod5_drift(), 1, 1, 10, 60);
  CHECK_FALSE(e.generator_found);
  CHECK(e.backward_end == "horizon");
  uint64_t b = 1;
  for (uint64_t v : e.backward) CHECK(v == (b = scan_back(fixtures::mod5_drift(), b, 1000)));

  CHECK_THROWS_AS(bi_orbit(fixtures::first_map(), 1, 1, 10, 100), PeriodicOrbitDetected);
  CHECK_THROWS_AS(bi_orbit(fixtures::successor(), 0, 1, 10, 100), std::invalid_argument);
}

TEST_CASE("generators match a brute-force minimum") {
  struct Case {
    SelfMapRule map;
    uint64_t n;
  };
  std::vector<Case> cases{{fixtures::successor(), 1}, {fixtures::successor(), 3}, {fixtures::two_orbit(), 1},
                          {fixtures::two_orbit(), 2}, {fixtures::mod5_drift(), 1},     {fixtures::block4(), 2}};
  for (const auto& c : cases)
    for (uint64_t k = 1; k <= 25; ++k) {
      auto w = stride_window(c.map, k, c.n, 60, 5000);
      auto g = generator(c.map, k, c.n, 100000);
      CHECK(g.g == *w.begin());
      CHECK(g.exact);
    }
  auto pc = generator(fixtures::prime_chain(), 8, 1, 100000);
  CHECK(pc.g == 2);
  CHECK(pc.exact);
}

TEST_CASE("generator sets") {
  CHECK(generator_set(fixtures::successor(), 1, 50, 100000).values() == std::set<uint64_t>{1});
  CHECK(generator_set(fixtures::successor(), 2, 50, 100000).values() == std::set<uint64_t>{1, 2});
  CHECK(generator_set(fixtures::mod5_drift(), 1, 50, 100000).values() == std::set<uint64_t>{1});
  CHECK(generator_set(fixtures::two_orbit(), 1, 50, 100000).values() == std::set<uint64_t>{1, 2});
  auto g2 = generator_set(fixtures::two_orbit(), 2, 50, 100000);
  CHECK(g2.values() == std::set<uint64_t>{1, 2, 3, 5});
  CHECK(g2.exact());
  // G_1 sits inside G_n
  for (uint64_t n = 2; n <= 4; ++n) {
    auto gn = generator_set(fixtures::two_orbit(), n, 50, 100000).values();
    auto g1 = generator_set(fixtures::two_orbit(), 1, 50, 100000).values();
    CHECK(std::includes(gn.begin(), gn.end(), g1.begin(), g1.end()));
  }
  std::set<uint64_t> prime_gens{1};
  for (uint64_t v : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29}) prime_gens.insert(v);
  CHECK(generator_set(fixtures::prime_chain(), 1, 30, 100000).values() == prime_gens);
  CHECK_THROWS_AS(generator_set(fixtures::first_map(), 1, 10, 100), PeriodicOrbitDetected);
}

TEST_CASE("partition covers every index once") {
  for (uint64_t n = 1; n <= 3; ++n) {
    auto groups = partition(fixtures::two_orbit(), n, 40, 100000);
    std::set<uint64_t> seen;
    size_t total = 0;
    for (const auto& g : groups) {
      total += g.members.size();
      seen.insert(g.members.begin(), g.members.end());
      for (uint64_t m : g.members) CHECK(generator(fixtures::two_orbit(), m, n, 100000).g == g.generator);
    }
    CHECK(total == 40);
    CHECK(seen.size() == 40);
    CHECK(*seen.rbegin() == 40);
  }
  CHECK(partition(fixtures::successor(), 3, 30, 100000).size() == 3);
  CHECK(to_json(partition(fixtures::mod5_drift(), 1, 20, 100000)).size() == 1);
}

TEST_CASE("orbit refinement") {
  for (uint64_t n = 1; n <= 5; ++n) {
    CHECK(orbit_refinement_check(fixtures::mod5_drift(), 1, n, 200, 100000));
    CHECK(orbit_refinement_check(fixtures::two_orbit(), 2, n, 200, 100000));
    CHECK(orbit_refinement_check(fixtures::prime_triple(), 2, n, 100, 100000));
  }
}

TEST_CASE("escape thresholds") {
  std::set<uint64_t> F;
  for (uint64_t i = 1; i <= 10; ++i) F.insert(i);
  auto e = escape_threshold(fixtures::successor(), 3, F, 50, 100000);
  CHECK(e.N == 7);
  CHECK(e.uniform);
  CHECK(e.verdict.is(VerdictKind::ExactTailBound));
  CHECK(e.N == escape_oracle(fixtures::successor(), 3, F, 50));

  for (uint64_t k : {1, 2, 4, 7}) {
    auto r = escape_threshold(fixtures::mod5_drift(), k, F, 40, 100000);
    CHECK(r.N == escape_oracle(fixtures::mod5_drift(), k, F, 40));
    CHECK(r.verdict.positive());
  }
  auto b = escape_threshold(fixtures::block4(), 2, {1, 2, 3, 4, 5}, 30, 100000);
  CHECK(b.N == escape_oracle(fixtures::block4(), 2, {1, 2, 3, 4, 5}, 30));
  CHECK_THROWS_AS(escape_threshold(fixtures::successor(), 1, {}, 10, 100), std::invalid_argument);
}

TEST_CASE("dot output") {
  auto d = orbit_dot(fixtures::successor(), 3, 3, 100);
  CHECK(d.find("digraph") != std::string::npos);
  CHECK(d.find("3 -> 4") != std::string::npos);
}
