#include <doctest.h>

#include <set>
#include <unordered_map>

#include <pseudoshift/errors.hpp>
#include <pseudoshift/lattice.hpp>
#include <pseudoshift/primes.hpp>
#include <pseudoshift/selfmap.hpp>

#include "fixture_maps.hpp"

using namespace pseudoshift;

namespace {

// brute-force preimage: every l <= bound with phi(l) = k
std::vector<uint64_t> scan_preimages(const SelfMapRule& map, uint64_t k, uint64_t bound) {
  std::vector<uint64_t> out;
  for (uint64_t l = 1; l <= bound; ++l)
    if (map.apply(l) == k) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("apply follows the first matching clause") {
  CHECK(apply(fixtures::successor(), 7) == 8);
  auto m = fixtures::mod5_drift();
  CHECK(apply(m, 5) == 7);
  CHECK(apply(m, 6) == 1);
  CHECK(apply(m, 4) == 5);
  CHECK(apply(m, 10) == 12);
  CHECK(apply(fixtures::prime_chain(), 4) == 8);
  CHECK(apply(fixtures::prime_chain(), 6) == 10);  // 6 is the second non-prime-power after 1
  auto first = fixtures::first_map();
  CHECK(apply(first, 1) == 2);
  CHECK(apply(first, 3) == 1);
  CHECK(apply(first, 99) == 4);
}

TEST_CASE("prime positions") {
  const PrimeTable& t = PrimeTable::shared();
  auto p = t.locate(8);
  REQUIRE(p);
  CHECK(p->family == 1);
  CHECK(p->pos == 3);
  CHECK(t.element(2, 1) == 3);
  CHECK(t.element(0, 1) == 1);
  CHECK(t.element(0, 2) == 6);
  auto q = t.locate(1);
  REQUIRE(q);
  CHECK(q->family == 0);
  CHECK(q->pos == 1);
}

TEST_CASE("iterate composes apply") {
  auto m = fixtures::mod5_drift();
  CHECK(iterate(m, 13, 0) == 13);
  CHECK(iterate(fixtures::successor(), 3, 5) == 8);
  uint64_t v = 1;
  for (int i = 0; i < 5; ++i) v = m.apply(v);
  CHECK(iterate(m, 1, 5) == v);
}

TEST_CASE("preimage uses symbolic inversion when it can") {
  auto s = fixtures::successor();
  auto r = preimage(s, 1, 100);
  CHECK(r.value == 0);
  CHECK(r.certain);
  CHECK(preimage(s, 5, 100).value == 4);

  auto m = fixtures::mod5_drift();
  auto scanned = scan_preimages(m, 1, 100);
  REQUIRE(scanned.size() == 1);
  CHECK(preimage(m, 1, 100).value == scanned[0]);
  CHECK(scanned[0] == 6);
}

TEST_CASE("preimage scan without a lattice") {
  // doubling map: odd numbers have no preimage, but only a scan can say so
  SelfMapRule dbl({}, AffineExpr{2, 0});
  CHECK(dbl.lattice() == nullptr);
  CHECK(preimage(dbl, 8, 100).value == 4);
  auto r = preimage(dbl, 7, 100);
  CHECK(r.value == 0);
  CHECK_FALSE(r.certain);
}

TEST_CASE("preimage reports a collision") {
  CHECK_THROWS_AS(preimage(fixtures::first_map(), 4, 20), NotInjectiveWitness);
}

TEST_CASE("backward iteration absorbs the sentinel") {
  auto r = backward_iterate(fixtures::successor(), 3, 5, 100);
  CHECK(r.value == 0);
  CHECK(r.hit_sentinel);
  CHECK(r.steps_taken == 3);

  auto m = fixtures::mod5_drift();
  uint64_t oracle = 1;
  for (int j = 0; j < 2; ++j) {
    auto pre = scan_preimages(m, oracle, 1000);
    REQUIRE(pre.size() == 1);
    oracle = pre[0];
  }
  auto b = backward_iterate(m, 1, 2, 1000);
  CHECK(b.value == oracle);
  CHECK(b.value == 11);
  CHECK_FALSE(b.hit_sentinel);

  auto c = backward_iterate(fixtures::prime_chain(), 3, 1, 1000);
  CHECK(c.value == 0);
  CHECK(c.hit_sentinel);
  CHECK(c.certain);
}

TEST_CASE("injectivity") {
  auto v = check_injective(fixtures::first_map(), 10);
  REQUIRE(v.is(VerdictKind::Refuted));
  auto w = v.evidence.at("witness");
  uint64_t a = w[0], b = w[1];
  CHECK(a == 4);
  CHECK(b == 5);
  CHECK(apply(fixtures::first_map(), a) == apply(fixtures::first_map(), b));

  CHECK(check_injective(fixtures::successor(), 1000).is(VerdictKind::ExactTailBound));

  // duplicate scan oracle agrees with the positive verdict
  auto m = fixtures::mod5_drift();
  std::set<uint64_t> images;
  bool dup = false;
  for (uint64_t n = 1; n <= 10000; ++n) dup = dup || !images.insert(m.apply(n)).second;
  CHECK_FALSE(dup);
  CHECK(check_injective(m, 10000).positive());
  CHECK(check_injective(fixtures::prime_triple(), 1000).positive());
}

TEST_CASE("periodic points") {
  auto pp = find_periodic_point(fixtures::first_map(), 10, 10);
  REQUIRE(pp);
  CHECK(pp->first == 1);
  CHECK(pp->second == 3);
  CHECK_FALSE(find_periodic_point(fixtures::successor(), 100, 100));

  auto m = fixtures::mod5_drift();
  bool oracle = false;
  for (uint64_t k = 1; k <= 50; ++k)
    for (uint64_t n = 1; n <= 50; ++n) oracle = oracle || iterate(m, k, n) == k;
  CHECK_FALSE(oracle);
  CHECK_FALSE(find_periodic_point(m, 50, 50));

  CHECK(check_periodic_points(fixtures::first_map(), 10, 10).is(VerdictKind::Refuted));
  CHECK(check_periodic_points(fixtures::mod5_drift(), 50, 50).is(VerdictKind::ExactTailBound));
  CHECK(check_periodic_points(fixtures::prime_triple(), 20, 50).is(VerdictKind::ExactTailBound));
}

TEST_CASE("lattice classification") {
  const Lattice* l = fixtures::mod5_drift().lattice();
  REQUIRE(l);
  CHECK(l->kind() == LatticeKind::Arithmetic);
  CHECK(l->modulus() == 5);
  CHECK(l->injective());
  CHECK(l->aperiodic());
  CHECK(fixtures::first_map().lattice() == nullptr);
  const Lattice* p = fixtures::prime_triple().lattice();
  REQUIRE(p);
  CHECK(p->kind() == LatticeKind::Prime);
  CHECK(p->modulus() == 3);
  // a zero-gain cycle: 2k+1 -> 2k+2 -> 2k+1 is periodic
  json flip{{"clauses", {{{"guard", fixtures::residue(2, 1, 1)}, {"expr", fixtures::shift(1)}}}},
            {"default", fixtures::shift(-1)}};
  auto fm = SelfMapRule::from_json(flip);
  REQUIRE(fm.lattice());
  CHECK_FALSE(fm.lattice()->aperiodic());
  CHECK(check_periodic_points(fm, 5, 5).is(VerdictKind::Refuted));
}

TEST_CASE("rules round-trip through JSON") {
  for (const json& j : {fixtures::first_map_json(), fixtures::mod5_drift_json(), fixtures::two_orbit_json(),
                        fixtures::prime_triple_json()}) {
    auto m = SelfMapRule::from_json(j);
    auto again = SelfMapRule::from_json(m.to_json());
    for (uint64_t n = 1; n <= 200; ++n) CHECK(m.apply(n) == again.apply(n));
  }
}

TEST_CASE("malformed rules") {
  CHECK_THROWS_AS(SelfMapRule({}, AffineExpr{1, -5}), MalformedRule);
  CHECK_THROWS_AS(SelfMapRule::from_json(json{{"clauses", json::array()}}), MalformedRule);
  CHECK_THROWS_AS(SelfMapRule::from_json(json{{"clauses", json::array()}, {"default", {{"value", 0}}}}),
                  MalformedRule);
  CHECK_THROWS_AS(
      SelfMapRule::from_json(json{{"clauses", {{{"guard", {{"residue", {{"mod", 3}, {"rem", 5}}}}}, {"expr", fixtures::shift(1)}}}},
                                  {"default", fixtures::shift(1)}}),
      MalformedRule);
}
